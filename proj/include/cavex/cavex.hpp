// cavex.hpp — umbrella header for the whole library.
#pragma once

#include "device.hpp"
#include "dispersive.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "fitting.hpp"
#include "io.hpp"
#include "spectroscopy.hpp"
#include "transmon.hpp"
#include "version.hpp"
