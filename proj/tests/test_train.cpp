#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tshunt/nodal_oracle.hpp"
#include "tshunt/train.hpp"

using namespace tshunt;

namespace {

std::size_t count_in(const std::vector<WheelSite>& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](const WheelSite& w) { return w.in_section; }));
}

}  // namespace

TEST(Formation, DefaultHas32Axles) {
    const auto t = crh380b_formation();
    ASSERT_EQ(t.size(), 32u);
    EXPECT_NO_THROW(t.validate());
    // Car 1: 0, 2.5, 17.5, 20; car 2 starts 5 m behind the last axle of car 1.
    EXPECT_DOUBLE_EQ(t.axle_offsets_m[1], 2.5);
    EXPECT_DOUBLE_EQ(t.axle_offsets_m[2], 17.5);
    EXPECT_DOUBLE_EQ(t.axle_offsets_m[3], 20.0);
    EXPECT_DOUBLE_EQ(t.axle_offsets_m[4], 25.0);
    EXPECT_DOUBLE_EQ(t.axle_offsets_m.back(), 195.0);
    for (cplx r : t.wheel_resistance) EXPECT_EQ(r, cplx(0.15, 0.0));
}

TEST(Formation, ValidationRejectsBadInput) {
    TrainFormation t{{0.0, 2.5}, {0.15}};
    EXPECT_THROW(t.validate(), InputError);
    t = {{1.0, 2.5}, {0.15, 0.15}};
    EXPECT_THROW(t.validate(), InputError);
    t = {{0.0, 0.0}, {0.15, 0.15}};
    EXPECT_THROW(t.validate(), InputError);
    t = {{0.0, 2.5}, {0.15, 0.0}};
    EXPECT_THROW(t.validate(), InputError);
}

TEST(Formation, FirstWheelOnlyAndUniform) {
    const auto t = crh380b_formation().with_uniform_resistance({0.3, 0.0});
    for (cplx r : t.wheel_resistance) EXPECT_EQ(r, cplx(0.3, 0.0));
    const auto f = t.first_wheel_only();
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f.axle_offsets_m[0], 0.0);
    EXPECT_EQ(f.wheel_resistance[0], cplx(0.3, 0.0));
}

TEST(WheelPositions, TrailBehindHead) {
    const TrainFormation t{{0.0, 2.5, 17.5}, {0.1, 0.2, 0.3}};
    const auto s = wheel_positions(t, 10.0, 789.0);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s[0].position_m, 10.0);
    EXPECT_DOUBLE_EQ(s[1].position_m, 7.5);
    EXPECT_DOUBLE_EQ(s[2].position_m, -7.5);
    EXPECT_TRUE(s[0].in_section);
    EXPECT_TRUE(s[1].in_section);
    EXPECT_FALSE(s[2].in_section);
    EXPECT_EQ(s[1].resistance, cplx(0.2, 0.0));
    EXPECT_EQ(s[2].index, 2u);
}

TEST(WheelPositions, WholeTrainInSectionAtSendingEnd) {
    const auto s = wheel_positions(crh380b_formation(), 789.0, 789.0);
    EXPECT_EQ(count_in(s), 32u);
    EXPECT_EQ(in_section_wheels(s).size(), 32u);
}

TEST(WheelPositions, EntryCountsAxles) {
    EXPECT_EQ(count_in(wheel_positions(crh380b_formation(), 1.0, 789.0)), 1u);
    EXPECT_EQ(count_in(wheel_positions(crh380b_formation(), 3.0, 789.0)), 2u);
    EXPECT_EQ(count_in(wheel_positions(crh380b_formation(), 25.0, 789.0)), 5u);
}

TEST(PartitionUnits, AssignsByInterval) {
    const std::vector<double> fixed{0.0, 100.0, 200.0};
    const std::vector<Wheel> wheels{{50.0, 0.1}, {150.0, 0.1}, {100.0, 0.1}, {120.0, 0.1}};
    const auto u = partition_units(wheels, fixed);
    ASSERT_EQ(u.size(), 2u);
    ASSERT_EQ(u[0].wheels.size(), 1u);
    ASSERT_EQ(u[1].wheels.size(), 3u);
    // The tie at 100 goes to the sending side; wheels sorted by descending position.
    EXPECT_DOUBLE_EQ(u[1].wheels[0].position_m, 150.0);
    EXPECT_DOUBLE_EQ(u[1].wheels[2].position_m, 100.0);
}

TEST(PartitionUnits, RejectsBadInput) {
    const std::vector<double> one{0.0};
    EXPECT_THROW(partition_units({}, one), InputError);
    const std::vector<double> unsorted{0.0, 200.0, 100.0};
    EXPECT_THROW(partition_units({}, unsorted), InputError);
    const std::vector<double> fixed{0.0, 100.0};
    const std::vector<Wheel> outside{{120.0, 0.1}};
    EXPECT_THROW(partition_units(outside, fixed), OutOfSection);
}

TEST(PartitionUnitsProperty, EveryInSectionWheelOnce) {
    std::mt19937_64 g(31);
    std::uniform_real_distribution<double> head(-10.0, 1000.0);
    const auto t = crh380b_formation();
    const auto caps = uniform_capacitor_positions(789.0, 9);
    std::vector<double> fixed{0.0};
    fixed.insert(fixed.end(), caps.begin(), caps.end());
    fixed.push_back(789.0);
    for (int i = 0; i < 1000; ++i) {
        const double h = head(g);
        const auto sites = wheel_positions(t, h, 789.0);
        const auto wheels = in_section_wheels(sites);
        const auto units = partition_units(wheels, fixed);
        std::size_t total = 0;
        for (const auto& u : units) {
            total += u.wheels.size();
            for (const auto& w : u.wheels) {
                EXPECT_GE(w.position_m, u.x_start_m);
                EXPECT_LE(w.position_m, u.x_end_m);
            }
        }
        EXPECT_EQ(total, wheels.size()) << h;
        EXPECT_EQ(count_in(sites) + (sites.size() - count_in(sites)), t.size());
    }
}

TEST(RailWheelUnit, EmptyUnitIsBareRail) {
    const auto e = line_eigen(default_rail_params());
    const RailWheelUnit u{100.0, 187.7, {}};
    EXPECT_LT(block_relative_error(rail_wheel_estn(u, e), rail_estn(e, 0.0877)), 1e-12);
}

TEST(RailWheelUnit, FactorsAlternate) {
    const auto e = line_eigen(default_rail_params());
    const RailWheelUnit u{0.0, 80.0, {{60.0, 0.15}, {57.5, 0.15}, {0.0, 0.15}}};
    const auto f = rail_wheel_factors(u, e);
    // rail 20, wheel, rail 2.5, wheel, rail 57.5, wheel (no zero-length tail)
    EXPECT_EQ(f.size(), 6u);
}

TEST(RailWheelUnit, SplitConsistency) {
    const auto e = line_eigen(default_rail_params());
    const RailWheelUnit whole{0.0, 87.7, {{70.0, 0.15}, {67.5, 0.15}, {52.5, 0.15}, {20.0, 0.15}}};
    const RailWheelUnit upper{60.0, 87.7, {{70.0, 0.15}, {67.5, 0.15}}};
    const RailWheelUnit lower{0.0, 60.0, {{52.5, 0.15}, {20.0, 0.15}}};
    EXPECT_LT(block_relative_error(rail_wheel_estn(upper, e) * rail_wheel_estn(lower, e), rail_wheel_estn(whole, e)),
              1e-10);
}

TEST(RailWheelUnit, AgreesWithNodalOracle) {
    const auto p = default_rail_params();
    const auto e = line_eigen(p);
    const RailWheelUnit u{43.8, 131.5, {{100.0, 0.15}}};
    const Estn oracle = nodal_chain_matrix(p, u.length_m(), {{100.0 - 43.8, 0.15}});
    EXPECT_LT(block_relative_error(rail_wheel_estn(u, e), oracle), 1e-6);
}

TEST(RailWheelUnit, OpenWheelLimit) {
    const auto e = line_eigen(default_rail_params());
    const RailWheelUnit open{0.0, 87.7, {{40.0, kOpenCircuitOhm}}};
    EXPECT_LT(block_relative_error(rail_wheel_estn(open, e), rail_estn(e, 0.0877)), 1e-9);
}

TEST(RailWheelUnit, RejectsMisorderedWheels) {
    const auto e = line_eigen(default_rail_params());
    const RailWheelUnit bad{0.0, 80.0, {{10.0, 0.15}, {60.0, 0.15}}};
    EXPECT_THROW(rail_wheel_factors(bad, e), InputError);
}
