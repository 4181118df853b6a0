#ifndef TSHUNT_SCENARIO_FILE_HPP
#define TSHUNT_SCENARIO_FILE_HPP

// JSON scenario files.
//
// Flat object, units in the key names, complex values as [re, im]. Every key is
// optional; a missing key takes the default scenario's value and, when a notice
// stream is given, says so. Unknown keys are errors.
//
//   {
//     "length_m": 789, "carrier_hz": 2300, "ballast_ohm_km": 6,
//     "z11_ohm_km": [5.2, 6.5], "capacitor_uf": 46,
//     "capacitor_positions_m": [43.8, 131.5, ...],
//     "wheel_resistance_ohm": 0.15, "axle_offsets_m": [0, 2.5, 17.5, ...]
//   }

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tshunt/errors.hpp"
#include "tshunt/jtc.hpp"

namespace tshunt {

namespace detail {

using json = nlohmann::json;

inline std::size_t line_of(const std::string& text, std::size_t byte) {
    const auto end = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

inline double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("key '" + key + "': expected a number");
    return v.get<double>();
}

inline cplx as_complex(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("key '" + key + "': expected a number or an [re, im] pair");
}

inline std::vector<double> as_numbers(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("key '" + key + "': expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e, key));
    return out;
}

// One complex value per entry; entries are numbers or [re, im] pairs.
inline std::vector<cplx> as_complex_list(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("key '" + key + "': expected an array");
    std::vector<cplx> out;
    for (const auto& e : v) out.push_back(as_complex(e, key));
    return out;
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline double capacitance_uf(const ShuntElement& c, double carrier_hz) {
    return 1e6 / (2.0 * std::numbers::pi * carrier_hz * -c.z.imag());
}

}  // namespace detail

/// Scenario to JSON with every key written out.
inline nlohmann::json scenario_to_json(const JtcScenario& s) {
    using detail::complex_json;
    nlohmann::json j;
    j["length_m"] = s.length_m;
    j["carrier_hz"] = s.carrier_hz;
    j["ballast_ohm_km"] = s.ballast_ohm_km;
    j["ground_leak_fraction"] = s.ground_leak_fraction;
    j["z11_ohm_km"] = complex_json(s.rail.z11);
    j["z22_ohm_km"] = complex_json(s.rail.z22);
    j["z12_ohm_km"] = complex_json(s.rail.z12);
    std::vector<double> uf, pos;
    for (const auto& c : s.capacitors) {
        uf.push_back(detail::capacitance_uf(c, s.carrier_hz));
        pos.push_back(*c.position_m);
    }
    j["capacitor_uf"] = uf;
    j["capacitor_positions_m"] = pos;
    j["tuning_length_m"] = s.tuning_length_m;
    j["z_sva_ohm"] = complex_json(s.z_sva);
    j["z_rz_ohm"] = complex_json(s.z_rz);
    j["z_rm_ohm"] = complex_json(s.z_rm);
    j["z_rs_ohm"] = complex_json(s.z_rs);
    j["z_es_ohm"] = complex_json(s.z_es);
    j["u_es_v"] = complex_json(s.u_es);
    j["axle_offsets_m"] = s.train.axle_offsets_m;
    nlohmann::json r = nlohmann::json::array();
    for (cplx w : s.train.wheel_resistance) r.push_back(complex_json(w));
    j["wheel_resistance_ohm"] = r;
    j["tcr_a1"] = s.tcr_a1;
    j["tcr_a2"] = s.tcr_a2;
    return j;
}

/// Scenario from a parsed JSON object. Missing keys are defaulted; `notices`, if
/// given, receives one line per defaulted key.
inline JtcScenario scenario_from_json(const nlohmann::json& j, std::ostream* notices = nullptr) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("scenario file must hold a JSON object");
    const JtcScenario def = default_scenario();
    JtcScenario s = def;
    const json def_json = scenario_to_json(def);

    std::map<std::string, std::function<void(const json&)>> setters{
        {"length_m", [&](const json& v) { s.length_m = as_number(v, "length_m"); }},
        {"carrier_hz", [&](const json& v) { s.carrier_hz = as_number(v, "carrier_hz"); }},
        {"ballast_ohm_km", [&](const json& v) { s.ballast_ohm_km = as_number(v, "ballast_ohm_km"); }},
        {"ground_leak_fraction", [&](const json& v) { s.ground_leak_fraction = as_number(v, "ground_leak_fraction"); }},
        {"z11_ohm_km", [&](const json& v) { s.rail.z11 = as_complex(v, "z11_ohm_km"); }},
        {"z22_ohm_km", [&](const json& v) { s.rail.z22 = as_complex(v, "z22_ohm_km"); }},
        {"z12_ohm_km", [&](const json& v) { s.rail.z12 = as_complex(v, "z12_ohm_km"); }},
        {"capacitor_uf", [](const json&) {}},  // handled below, needs positions
        {"capacitor_positions_m", [](const json&) {}},
        {"tuning_length_m", [&](const json& v) { s.tuning_length_m = as_number(v, "tuning_length_m"); }},
        {"z_sva_ohm", [&](const json& v) { s.z_sva = as_complex(v, "z_sva_ohm"); }},
        {"z_rz_ohm", [&](const json& v) { s.z_rz = as_complex(v, "z_rz_ohm"); }},
        {"z_rm_ohm", [&](const json& v) { s.z_rm = as_complex(v, "z_rm_ohm"); }},
        {"z_rs_ohm", [&](const json& v) { s.z_rs = as_complex(v, "z_rs_ohm"); }},
        {"z_es_ohm", [&](const json& v) { s.z_es = as_complex(v, "z_es_ohm"); }},
        {"u_es_v", [&](const json& v) { s.u_es = as_complex(v, "u_es_v"); }},
        {"axle_offsets_m", [](const json&) {}},  // handled below with the resistances
        {"wheel_resistance_ohm", [](const json&) {}},
        {"tcr_a1", [&](const json& v) { s.tcr_a1 = as_number(v, "tcr_a1"); }},
        {"tcr_a2", [&](const json& v) { s.tcr_a2 = as_number(v, "tcr_a2"); }},
    };
    for (const auto& [key, value] : j.items())
        if (!setters.count(key)) throw ConfigError("key '" + key + "': unknown key");

    for (const auto& [key, set] : setters) {
        if (j.contains(key)) {
            set(j.at(key));
        } else if (notices && key != "z22_ohm_km") {
            *notices << "notice: " << key << " not set, using default " << def_json.at(key).dump() << "\n";
        }
    }
    // An asymmetric line is opt-in: z22 follows z11 unless given.
    if (!j.contains("z22_ohm_km")) s.rail.z22 = s.rail.z11;
    s.rail.frequency_hz = s.carrier_hz;

    // Capacitors: positions default to uniform spacing over the section.
    std::vector<double> uf;
    if (j.contains("capacitor_uf")) {
        const json& v = j.at("capacitor_uf");
        uf = v.is_array() ? as_numbers(v, "capacitor_uf") : std::vector<double>{as_number(v, "capacitor_uf")};
    } else {
        uf = {kNominalCapacitorF * 1e6};
    }
    std::vector<double> pos;
    if (j.contains("capacitor_positions_m")) {
        pos = as_numbers(j.at("capacitor_positions_m"), "capacitor_positions_m");
    } else {
        const std::size_t n = uf.size() > 1 ? uf.size() : def.capacitors.size();
        pos = uniform_capacitor_positions(s.length_m, n);
    }
    if (uf.size() == 1) uf.assign(pos.size(), uf.front());
    if (uf.size() != pos.size()) throw ConfigError("key 'capacitor_uf': count differs from capacitor_positions_m");
    s.capacitors.clear();
    for (std::size_t i = 0; i < pos.size(); ++i) {
        if (!(uf[i] > 0.0)) throw ConfigError("key 'capacitor_uf': capacitance must be positive");
        s.capacitors.push_back(make_capacitor(uf[i] * 1e-6, s.carrier_hz, pos[i]));
    }

    // Train: a number or a single [re, im] pair applies to every axle; otherwise one
    // entry per axle. A two-number array is a list only for a two-axle train.
    if (j.contains("axle_offsets_m")) s.train.axle_offsets_m = as_numbers(j.at("axle_offsets_m"), "axle_offsets_m");
    if (j.contains("wheel_resistance_ohm")) {
        const json& v = j.at("wheel_resistance_ohm");
        const bool list = v.is_array() && !(v.size() == 2 && v[0].is_number() && v[1].is_number() &&
                                             s.train.axle_offsets_m.size() != 2);
        if (list) {
            s.train.wheel_resistance = as_complex_list(v, "wheel_resistance_ohm");
        } else {
            s.train.wheel_resistance.assign(s.train.axle_offsets_m.size(), as_complex(v, "wheel_resistance_ohm"));
        }
    } else {
        s.train.wheel_resistance.assign(s.train.axle_offsets_m.size(), kDefaultWheelResistanceOhm);
    }
    if (s.train.wheel_resistance.size() != s.train.axle_offsets_m.size())
        throw ConfigError("key 'wheel_resistance_ohm': count differs from axle_offsets_m");

    try {
        s.validate();
    } catch (const InputError& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
    return s;
}

/// Parse scenario text; syntax errors carry the line number.
inline JtcScenario parse_scenario(const std::string& text, std::ostream* notices = nullptr) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
    }
    return scenario_from_json(j, notices);
}

inline JtcScenario load_scenario(const std::string& path, std::ostream* notices = nullptr) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), notices);
}

}  // namespace tshunt

#endif  // TSHUNT_SCENARIO_FILE_HPP
