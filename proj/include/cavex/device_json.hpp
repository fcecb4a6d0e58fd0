// device_json.hpp — JSON (de)serialization for the device description types.
// Kept separate from device.hpp so the core types carry no JSON dependency.
#pragma once

#include <string>

#include "device.hpp"
#include "json.hpp"

namespace cavex {

inline void to_json(nlohmann::json& j, const End& e) { j = std::string(to_string(e)); }

inline void from_json(const nlohmann::json& j, End& e) {
  const std::string s = j.get<std::string>();
  if (s == "left") {
    e = End::left;
  } else if (s == "right") {
    e = End::right;
  } else {
    throw ConfigError("end must be \"left\" or \"right\", got \"" + s + "\"");
  }
}

inline void to_json(nlohmann::json& j, const ResonatorSpec& r) {
  j = {{"f0", r.f0},
       {"kappa", r.kappa},
       {"n_modes", r.n_modes},
       {"mode_sign_rule", r.mode_sign_rule}};
}

inline void from_json(const nlohmann::json& j, ResonatorSpec& r) {
  j.at("f0").get_to(r.f0);
  j.at("kappa").get_to(r.kappa);
  j.at("n_modes").get_to(r.n_modes);
  r.mode_sign_rule = j.value("mode_sign_rule", std::string("alternating"));
}

inline void to_json(nlohmann::json& j, const QubitSpec& q) {
  j = {{"ec", q.ec}, {"ej_max", q.ej_max}, {"g0", q.g0}, {"end", q.end}};
}

inline void from_json(const nlohmann::json& j, QubitSpec& q) {
  j.at("ec").get_to(q.ec);
  j.at("ej_max").get_to(q.ej_max);
  j.at("g0").get_to(q.g0);
  j.at("end").get_to(q.end);
}

inline void to_json(nlohmann::json& j, const SpuriousModeSpec& s) {
  j = {{"freq", s.freq}, {"g_ratio", s.g_ratio}, {"sign_rule", s.sign_rule}};
}

inline void from_json(const nlohmann::json& j, SpuriousModeSpec& s) {
  j.at("freq").get_to(s.freq);
  j.at("g_ratio").get_to(s.g_ratio);
  j.at("sign_rule").get_to(s.sign_rule);
}

inline void to_json(nlohmann::json& j, const DriveGeometry& g) {
  j = {{"qubit_separation", g.qubit_separation}, {"c_eff", g.c_eff}};
}

inline void from_json(const nlohmann::json& j, DriveGeometry& g) {
  j.at("qubit_separation").get_to(g.qubit_separation);
  j.at("c_eff").get_to(g.c_eff);
}

inline void to_json(nlohmann::json& j, const DeviceSpec& d) {
  j = {{"resonator", d.resonator},
       {"qubit1", d.qubit1},
       {"qubit2", d.qubit2},
       {"spurious", d.spurious},
       {"geometry", d.geometry}};
}

inline void from_json(const nlohmann::json& j, DeviceSpec& d) {
  j.at("resonator").get_to(d.resonator);
  j.at("qubit1").get_to(d.qubit1);
  j.at("qubit2").get_to(d.qubit2);
  d.spurious.clear();
  if (j.contains("spurious")) j.at("spurious").get_to(d.spurious);
  j.at("geometry").get_to(d.geometry);
}

inline void to_json(nlohmann::json& j, const FluxMap& m) {
  if (m.kind == FluxMap::Kind::linear) {
    j = {{"type", "linear"}, {"slope", m.slope}, {"offset", m.offset}};
  } else {
    j = {{"type", "transmon"}, {"qubit", m.qubit}};
  }
}

inline void from_json(const nlohmann::json& j, FluxMap& m) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear") {
    m.kind = FluxMap::Kind::linear;
    j.at("slope").get_to(m.slope);
    j.at("offset").get_to(m.offset);
  } else if (type == "transmon") {
    m.kind = FluxMap::Kind::transmon;
    j.at("qubit").get_to(m.qubit);
  } else {
    throw ConfigError("flux map type must be \"linear\" or \"transmon\", got \"" + type + "\"");
  }
}

}  // namespace cavex
