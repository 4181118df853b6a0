#include <gtest/gtest.h>

#include <sstream>

#include "tshunt/scenario_file.hpp"

using namespace tshunt;

namespace {

double crel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(ScenarioFile, RoundTrip) {
    const auto s = default_scenario();
    std::ostringstream notices;
    const auto r = parse_scenario(scenario_to_json(s).dump(2), &notices);
    EXPECT_TRUE(notices.str().empty()) << notices.str();
    EXPECT_EQ(r.length_m, s.length_m);
    EXPECT_EQ(r.ballast_ohm_km, s.ballast_ohm_km);
    EXPECT_EQ(r.rail.z11, s.rail.z11);
    EXPECT_EQ(r.rail.z12, s.rail.z12);
    EXPECT_EQ(r.z_sva, s.z_sva);
    EXPECT_EQ(r.u_es, s.u_es);
    EXPECT_EQ(r.train.axle_offsets_m, s.train.axle_offsets_m);
    EXPECT_EQ(r.train.wheel_resistance, s.train.wheel_resistance);
    ASSERT_EQ(r.capacitors.size(), s.capacitors.size());
    for (std::size_t i = 0; i < s.capacitors.size(); ++i) {
        EXPECT_EQ(*r.capacitors[i].position_m, *s.capacitors[i].position_m);
        EXPECT_LT(crel(r.capacitors[i].z, s.capacitors[i].z), 1e-14);
    }
    EXPECT_EQ(scenario_to_json(r).dump(), scenario_to_json(parse_scenario(scenario_to_json(r).dump())).dump());
}

TEST(ScenarioFile, EmptyObjectIsDefaultWithNotices) {
    std::ostringstream notices;
    const auto r = parse_scenario("{}", &notices);
    EXPECT_EQ(scenario_to_json(r).dump(), scenario_to_json(default_scenario()).dump());
    EXPECT_NE(notices.str().find("notice: ballast_ohm_km not set"), std::string::npos);
    EXPECT_EQ(notices.str().find("z22_ohm_km"), std::string::npos);
}

TEST(ScenarioFile, UnknownKeyRejected) {
    try {
        parse_scenario(R"({"ballast_ohm": 6})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("ballast_ohm"), std::string::npos);
    }
}

TEST(ScenarioFile, SyntaxErrorCarriesLine) {
    try {
        parse_scenario("{\n  \"length_m\": 789,\n  \"carrier_hz\": ,\n}");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("line 3:", 0), 0u) << e.what();
    }
}

TEST(ScenarioFile, TypeErrors) {
    EXPECT_THROW(parse_scenario(R"({"length_m": "long"})"), ConfigError);
    EXPECT_THROW(parse_scenario(R"({"z_sva_ohm": [1, 2, 3]})"), ConfigError);
    EXPECT_THROW(parse_scenario("[]"), ConfigError);
}

TEST(ScenarioFile, ValidationWrapped) {
    EXPECT_THROW(parse_scenario(R"({"ballast_ohm_km": -1})"), ConfigError);
    EXPECT_THROW(parse_scenario(R"({"capacitor_uf": 0})"), ConfigError);
    EXPECT_THROW(parse_scenario(R"({"capacitor_uf": [46, 46], "capacitor_positions_m": [100]})"), ConfigError);
    EXPECT_THROW(parse_scenario(R"({"wheel_resistance_ohm": [0.1, 0.2, 0.3]})"), ConfigError);
}

TEST(ScenarioFile, ScalarAndListForms) {
    auto s = parse_scenario(R"({"capacitor_uf": 40, "wheel_resistance_ohm": 0.3, "z11_ohm_km": 5})");
    EXPECT_EQ(s.capacitors.size(), 9u);
    EXPECT_LT(crel(s.capacitors[0].z, capacitor_impedance(40e-6, 2300.0)), 1e-14);
    for (cplx r : s.train.wheel_resistance) EXPECT_EQ(r, cplx(0.3, 0.0));
    EXPECT_EQ(s.rail.z22, cplx(5.0, 0.0));

    s = parse_scenario(R"({"capacitor_uf": [46, 23, 46, 46], "wheel_resistance_ohm": [0.2, 0.01]})");
    ASSERT_EQ(s.capacitors.size(), 4u);
    EXPECT_DOUBLE_EQ(*s.capacitors[0].position_m, 789.0 / 8.0);
    for (cplx r : s.train.wheel_resistance) EXPECT_EQ(r, cplx(0.2, 0.01));

    s = parse_scenario(R"({"axle_offsets_m": [0, 2.5], "wheel_resistance_ohm": [0.2, 0.3]})");
    EXPECT_EQ(s.train.wheel_resistance, (std::vector<cplx>{0.2, 0.3}));
    s = parse_scenario(R"({"axle_offsets_m": [0, 2.5], "wheel_resistance_ohm": [[0.2, 0.0], [0.3, 0.1]]})");
    EXPECT_EQ(s.train.wheel_resistance[1], cplx(0.3, 0.1));
}

TEST(ScenarioFile, AsymmetricRails) {
    const auto s = parse_scenario(R"({"z11_ohm_km": [5, 6], "z22_ohm_km": [5.5, 6.5]})");
    EXPECT_EQ(s.rail.z22, cplx(5.5, 6.5));
    EXPECT_FALSE(s.rail.is_symmetric());
}

TEST(ScenarioFile, MissingFile) { EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ConfigError); }
