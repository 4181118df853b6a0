#include <gtest/gtest.h>

#include <sstream>

#include "tshunt/analysis.hpp"

using namespace tshunt;

namespace {

SweepSeries series_of(const std::vector<double>& xs, const std::function<cplx(double)>& f) {
    SweepSeries s{"x_f", "m", {}, {}, {}, {}};
    for (double x : xs) s.samples.push_back({x, f(x), true, {}});
    return s;
}

std::vector<TracePoint> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
}

JtcScenario short_train() {
    auto s = default_scenario();
    s.train = TrainFormation{{0.0, 2.5, 17.5, 20.0}, std::vector<cplx>(4, 0.15)};
    return s;
}

}  // namespace

TEST(Grids, SteppedRangeIsInclusive) {
    const auto v = stepped_range(0.01, 1.0, 0.01);
    ASSERT_EQ(v.size(), 100u);
    EXPECT_NEAR(v.back(), 1.0, 1e-12);
    EXPECT_EQ(stepped_range(1.0, 20.0, 1.0).size(), 20u);
    EXPECT_EQ(stepped_range(0.8, 1.2, 0.01).size(), 41u);
    EXPECT_THROW(stepped_range(1.0, 0.0, 0.1), InputError);
    EXPECT_THROW(stepped_range(0.0, 1.0, 0.0), NonPositive);
}

TEST(Grids, ProfilePoints) {
    const auto v = profile_points(789.0, 1.0);
    ASSERT_EQ(v.size(), 789u);
    EXPECT_EQ(v.front(), 1.0);
    EXPECT_EQ(v.back(), 789.0);
    EXPECT_EQ(profile_points(789.0, 10.0).back(), 780.0);
}

TEST(Median, OddEvenEmpty) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_THROW(median({}), EmptyAfterExclusion);
}

TEST(SteadyWindow, Keeps) {
    const SteadyWindow w{789.0, 29.0, {100.0, 400.0}, 30.0};
    EXPECT_FALSE(w.keeps(10.0));
    EXPECT_FALSE(w.keeps(770.0));
    EXPECT_TRUE(w.keeps(99.0));
    EXPECT_FALSE(w.keeps(100.0));
    EXPECT_FALSE(w.keeps(130.0));
    EXPECT_TRUE(w.keeps(131.0));
    const auto d = SteadyWindow::of(default_scenario());
    EXPECT_EQ(d.capacitors_m.size(), 9u);
    EXPECT_EQ(d.end_margin_m, 29.0);
}

TEST(SteadyValue, ConstantSeries) {
    const auto s = series_of(profile_points(789.0, 1.0), [](double) { return cplx(0.07, 0.015); });
    EXPECT_EQ(steady_value(default_scenario(), s), cplx(0.07, 0.015));
}

TEST(SteadyValue, PulsesAtCapacitorsAreIgnored) {
    const auto sc = default_scenario();
    const auto caps = sc.capacitor_positions();
    const auto s = series_of(profile_points(789.0, 1.0), [&](double x) {
        for (double c : caps)
            if (x >= c && x <= c + 25.0) return cplx(0.09, 0.001);
        return cplx(0.07, 0.015);
    });
    EXPECT_EQ(steady_value(sc, s), cplx(0.07, 0.015));
}

TEST(SteadyValue, EmptyWindowThrows) {
    const auto s = series_of({1.0, 2.0}, [](double) { return cplx(1.0, 1.0); });
    EXPECT_THROW(steady_value(default_scenario(), s), EmptyAfterExclusion);
}

TEST(SteadyValue, ProfileAndDirectSolveAgree) {
    const auto s = short_train();
    const auto profile = impedance_profile(s, 5.0);
    EXPECT_EQ(profile.gaps(), 0u);
    const cplx a = steady_value(s, profile);
    const cplx b = steady_impedance(s, 5.0);
    EXPECT_LT(std::abs(a - b), 1e-15);
}

TEST(SteadyValue, MedianSitsInTheHistogramMode) {
    const auto s = default_scenario();
    const auto p = impedance_profile(s, 2.0);
    const auto w = SteadyWindow::of(s);
    std::vector<double> re;
    for (const auto& q : p.samples)
        if (w.keeps(q.x)) re.push_back(q.z.real());
    const double lo = *std::min_element(re.begin(), re.end());
    const double hi = *std::max_element(re.begin(), re.end());
    const int bins = 20;
    std::vector<int> h(bins, 0);
    auto bin = [&](double v) { return std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins)); };
    for (double v : re) ++h[static_cast<std::size_t>(bin(v))];
    const int mode = static_cast<int>(std::max_element(h.begin(), h.end()) - h.begin());
    EXPECT_LE(std::abs(bin(steady_value(s, p).real()) - mode), 1);
}

TEST(Profile, NoTrainThrows) {
    auto s = default_scenario();
    s.train = {};
    EXPECT_THROW(impedance_profile(s), NoShuntingPoint);
    EXPECT_THROW(steady_impedance(s), NoShuntingPoint);
}

TEST(CapacitorFault, NoFaultGivesZeroDelta) {
    const auto d = capacitor_fault_delta(short_train(), 4, std::nullopt, 10.0);
    for (const auto& q : d.samples) EXPECT_EQ(q.z, cplx{});
    EXPECT_THROW(capacitor_fault_delta(short_train(), 9, CapacitorFault::LineBreakage), InputError);
}

TEST(CapacitorFault, ReceivingSideUnaffected) {
    const auto s = default_scenario();
    const double c = s.capacitor_positions()[4];
    const auto d = capacitor_fault_delta(s, 4, CapacitorFault::LineBreakage, 2.0);
    // Zero up to the rounding of the boundary solve.
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(steady_impedance(s, 10.0));
    double peak = 0.0;
    for (const auto& q : d.samples) {
        ASSERT_TRUE(q.valid);
        if (q.x < c) EXPECT_LE(std::abs(q.z), tol) << q.x;
        peak = std::max(peak, std::abs(q.z));
    }
    EXPECT_GT(peak, 0.0);
}

TEST(CapacitorFault, WithFaultTouchesOneCapacitor) {
    const auto s = default_scenario();
    const auto f = with_capacitor_fault(s, 2, CapacitorFault::DegradedHalf);
    for (std::size_t i = 0; i < s.capacitors.size(); ++i) {
        if (i == 2)
            EXPECT_NEAR(std::abs(f.capacitors[i].z / s.capacitors[i].z - 2.0), 0.0, 1e-12);
        else
            EXPECT_EQ(f.capacitors[i].z, s.capacitors[i].z);
    }
}

TEST(Importance, MaxNormalized) {
    const auto p = max_normalized({0.5, 2.0, 1.0});
    EXPECT_EQ(p, (std::vector<double>{0.25, 1.0, 0.5}));
    EXPECT_EQ(max_normalized({0.0, 0.0}), (std::vector<double>{0.0, 0.0}));
}

TEST(Importance, ShortTrain) {
    const auto r = structural_importance(short_train(), 1.0, {10.0, 30.0});
    ASSERT_EQ(r.p_re.size(), 4u);
    EXPECT_EQ(*std::max_element(r.p_re.begin(), r.p_re.end()), 1.0);
    EXPECT_EQ(*std::max_element(r.p_im.begin(), r.p_im.end()), 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_GE(r.p_re[i], 0.0);
        EXPECT_GE(r.dp_im[i], 0.0);
    }
    EXPECT_THROW(structural_importance(short_train(), 0.0), NonPositive);
}

TEST(Sweeps, RejectNonPositiveStart) {
    EXPECT_THROW(sweep_wheel_resistance(short_train(), 0.0, 1.0, 0.1), NonPositive);
    EXPECT_THROW(sweep_ballast(short_train(), 0.0, 1.0, 0.1), NonPositiveBallast);
    EXPECT_THROW(sweep_rail_impedance(short_train(), 0.0, 1.0, 0.1), NonPositive);
}

TEST(Sweeps, WheelResistanceSmall) {
    const auto w = sweep_wheel_resistance(short_train(), 0.05, 0.5, 0.05, {10.0, 30.0});
    ASSERT_EQ(w.samples.size(), 10u);
    ASSERT_TRUE(w.re_fit && w.im_fit);
    for (std::size_t i = 1; i < w.samples.size(); ++i) EXPECT_GT(w.samples[i].z.real(), w.samples[i - 1].z.real());
    EXPECT_GT(w.re_fit->gof.r_square, 0.9);
}

TEST(Trace, Formats) {
    auto p = parse("# measured\nx_m,amp_v\n10,0.5\n5;0.25\n20 1.0\n");
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0].x_m, 5.0);
    EXPECT_EQ(p[2].amplitude_v, 1.0);
    p = parse("1\t2\r\n3\t4\r\n");
    EXPECT_EQ(p.size(), 2u);
}

TEST(Trace, ErrorsCarryLineNumbers) {
    try {
        parse("x,y\n1,2\n3,abc\n");
        FAIL();
    } catch (const TraceFormat& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse("1,2,3\n4,5,6\n"), TraceFormat);
    EXPECT_THROW(parse("1,2\n"), TraceFormat);
    EXPECT_THROW(parse("a,b\nc,d\n1,2\n3,4\n"), TraceFormat);
    EXPECT_THROW(parse("1,nan\n2,3\n"), TraceFormat);
}

TEST(Trace, Interpolate) {
    const std::vector<double> x{0.0, 1.0, 2.0}, y{0.0, 10.0, 30.0};
    EXPECT_EQ(interpolate(x, y, 1.5), 20.0);
    EXPECT_EQ(interpolate(x, y, 0.0), 0.0);
    EXPECT_EQ(interpolate(x, y, 2.0), 30.0);
    EXPECT_THROW(interpolate(x, y, 2.5), OutOfSection);
}

TEST(Tcr, SingleWheelTrainMatchesFirstWheelModel) {
    auto s = default_scenario();
    s.train = s.train.first_wheel_only();
    const auto c = tcr_comparison(s, {}, 20.0);
    ASSERT_EQ(c.a_zf.size(), c.a_rwh.size());
    for (std::size_t i = 0; i < c.a_zf.size(); ++i) EXPECT_EQ(c.a_zf[i], c.a_rwh[i]);
    EXPECT_FALSE(c.gof_zf);
}

TEST(Tcr, FullTrainDiffersAndFitsAgainstItself) {
    const auto s = short_train();
    const auto c = tcr_comparison(s, {}, 20.0);
    std::vector<TracePoint> m;
    for (std::size_t i = 0; i < c.x_m.size(); ++i) m.push_back({c.x_m[i], c.a_zf[i]});
    const auto d = tcr_comparison(s, m, 20.0);
    ASSERT_TRUE(d.gof_zf && d.gof_rwh);
    EXPECT_NEAR(d.gof_zf->r_square, 1.0, 1e-12);
    EXPECT_GT(d.gof_rwh->sse, 0.0);
}

TEST(Parallel, OrderAndErrors) {
    const auto v = parallel_map<std::size_t>(100, [](std::size_t i) { return i * i; }, 4);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
    EXPECT_THROW(parallel_map<int>(10, [](std::size_t i) -> int { if (i == 7) throw InputError("x"); return 0; }, 3),
                 InputError);
    EXPECT_TRUE(parallel_map<int>(0, [](std::size_t) { return 1; }).empty());
}

TEST(Parallel, ThreadCountIndependent) {
    const auto s = short_train();
    const ShuntingModel m(s);
    const auto a = parallel_map<cplx>(40, [&](std::size_t i) { return m.solve(10.0 + 19.0 * i).z_f; }, 1);
    const auto b = parallel_map<cplx>(40, [&](std::size_t i) { return m.solve(10.0 + 19.0 * i).z_f; }, 4);
    EXPECT_EQ(a, b);
}
