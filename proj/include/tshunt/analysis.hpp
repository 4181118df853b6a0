#ifndef TSHUNT_ANALYSIS_HPP
#define TSHUNT_ANALYSIS_HPP

// Sweeps over the shunting point and over scenario parameters, fault studies,
// wheel-set importance and the reader-amplitude comparison.

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tshunt/errors.hpp"
#include "tshunt/jtc.hpp"
#include "tshunt/parallel.hpp"
#include "tshunt/regression.hpp"

namespace tshunt {

struct SweepSample {
    double x = 0.0;
    cplx z{};
    bool valid = true;
    std::string error;  // set for gaps
};

struct SweepSeries {
    std::string parameter;
    std::string unit;
    std::vector<SweepSample> samples;
    std::optional<FitResult> re_fit;
    std::optional<FitResult> im_fit;
    std::optional<Vertex> im_vertex;

    std::vector<double> xs() const { return collect([](const SweepSample& s) { return s.x; }); }
    std::vector<double> re() const { return collect([](const SweepSample& s) { return s.z.real(); }); }
    std::vector<double> im() const { return collect([](const SweepSample& s) { return s.z.imag(); }); }

    std::size_t gaps() const {
        return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](auto& s) { return !s.valid; }));
    }

private:
    template <class F>
    std::vector<double> collect(F f) const {
        std::vector<double> out;
        out.reserve(samples.size());
        for (const auto& s : samples)
            if (s.valid) out.push_back(f(s));
        return out;
    }
};

/// lo, lo + step, ... up to hi (inclusive within rounding).
inline std::vector<double> stepped_range(double lo, double hi, double step) {
    if (!(step > 0.0)) throw NonPositive("step must be positive");
    if (!(hi >= lo)) throw InputError("range upper bound below lower bound");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> v;
    v.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v.push_back(lo + step * static_cast<double>(i));
    return v;
}

/// Shunting points step, 2 step, ... up to the section length.
inline std::vector<double> profile_points(double length_m, double step_m) {
    if (!(step_m > 0.0)) throw NonPositive("profile step must be positive");
    const auto n = static_cast<std::size_t>(std::floor(length_m / step_m + 1e-9));
    std::vector<double> v;
    v.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) v.push_back(std::min(step_m * static_cast<double>(i), length_m));
    return v;
}

inline constexpr double kDefaultProfileStepM = 1.0;
inline constexpr double kDefaultExclusionRadiusM = 30.0;

/// z_f at every profile point. Numerical failures become gaps in the series.
inline SweepSeries impedance_profile(const JtcScenario& s, double step_m = kDefaultProfileStepM) {
    if (s.train.size() == 0) throw NoShuntingPoint("no train in the section");
    const ShuntingModel model(s);
    const auto xs = profile_points(s.length_m, step_m);
    SweepSeries out{"x_f", "m", {}, {}, {}, {}};
    out.samples = parallel_map<SweepSample>(xs.size(), [&](std::size_t i) {
        try {
            return SweepSample{xs[i], model.solve(xs[i]).z_f, true, {}};
        } catch (const NumericalError& e) {
            return SweepSample{xs[i], {}, false, e.what()};
        }
    });
    return out;
}

/// Where steady-value samples may come from.
struct SteadyWindow {
    double length_m = 0.0;
    double end_margin_m = 0.0;  // samples closer than this to either end are dropped
    std::vector<double> capacitors_m;
    double exclusion_radius_m = kDefaultExclusionRadiusM;

    static SteadyWindow of(const JtcScenario& s, double radius_m = kDefaultExclusionRadiusM) {
        return {s.length_m, s.tuning_length_m, s.capacitor_positions(), radius_m};
    }

    // A capacitor disturbs z_f from its own position up to about 25 m on its
    // sending side, so the window drops [c, c + radius] around each one.
    bool keeps(double x) const {
        if (x < end_margin_m || x > length_m - end_margin_m) return false;
        for (double c : capacitors_m)
            if (x >= c && x <= c + exclusion_radius_m) return false;
        return true;
    }
};

inline double median(std::vector<double> v) {
    if (v.empty()) throw EmptyAfterExclusion("no samples to take a median of");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lo + hi) / 2.0;
}

/// Median real and imaginary parts over the samples the window keeps.
inline cplx steady_value(const SweepSeries& series, const SteadyWindow& w) {
    if (series.samples.empty()) throw EmptyAfterExclusion("series is empty");
    std::vector<double> re, im;
    for (const auto& s : series.samples)
        if (s.valid && w.keeps(s.x)) {
            re.push_back(s.z.real());
            im.push_back(s.z.imag());
        }
    if (re.empty()) throw EmptyAfterExclusion("every sample falls inside an exclusion zone");
    return {median(std::move(re)), median(std::move(im))};
}

inline cplx steady_value(const JtcScenario& s, const SweepSeries& series, double radius_m = kDefaultExclusionRadiusM) {
    return steady_value(series, SteadyWindow::of(s, radius_m));
}

/// Steady z_f of a scenario, solving only at the profile points the window keeps.
inline cplx steady_impedance(const JtcScenario& s, double step_m = kDefaultProfileStepM,
                             double radius_m = kDefaultExclusionRadiusM) {
    if (s.train.size() == 0) throw NoShuntingPoint("no train in the section");
    const ShuntingModel model(s);
    const SteadyWindow w = SteadyWindow::of(s, radius_m);
    std::vector<double> xs;
    for (double x : profile_points(s.length_m, step_m))
        if (w.keeps(x)) xs.push_back(x);
    if (xs.empty()) throw EmptyAfterExclusion("every profile point falls inside an exclusion zone");
    const auto z = parallel_map<cplx>(xs.size(), [&](std::size_t i) { return model.solve(xs[i]).z_f; });
    std::vector<double> re, im;
    for (cplx v : z) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    return {median(std::move(re)), median(std::move(im))};
}

struct SweepOptions {
    double profile_step_m = kDefaultProfileStepM;
    double exclusion_radius_m = kDefaultExclusionRadiusM;
};

template <class Apply>
SweepSeries parameter_sweep(const JtcScenario& base, std::string name, std::string unit, const std::vector<double>& values,
                            Apply apply, const SweepOptions& opt) {
    SweepSeries out{std::move(name), std::move(unit), {}, {}, {}, {}};
    for (double v : values) {
        JtcScenario s = base;
        apply(s, v);
        out.samples.push_back({v, steady_impedance(s, opt.profile_step_m, opt.exclusion_radius_m), true, {}});
    }
    return out;
}

/// Steady z_f against a common wheel-set resistance, with Re and Im fitted by 1/(a + b/r).
inline SweepSeries sweep_wheel_resistance(const JtcScenario& s, double lo = 0.01, double hi = 1.0, double step = 0.01,
                                          const SweepOptions& opt = {}) {
    if (!(lo > 0.0)) throw NonPositive("wheel resistance must be positive");
    auto out = parameter_sweep(
        s, "r_ws", "ohm", stepped_range(lo, hi, step),
        [](JtcScenario& sc, double r) { sc.train = sc.train.with_uniform_resistance(r); }, opt);
    out.re_fit = fit_reciprocal(out.xs(), out.re());
    out.im_fit = fit_reciprocal(out.xs(), out.im());
    return out;
}

/// Steady z_f against ballast resistance.
inline SweepSeries sweep_ballast(const JtcScenario& s, double lo = 1.0, double hi = 20.0, double step = 1.0,
                                 const SweepOptions& opt = {}) {
    if (!(lo > 0.0)) throw NonPositiveBallast("ballast resistance must be positive");
    return parameter_sweep(
        s, "r_b", "ohm_km", stepped_range(lo, hi, step), [](JtcScenario& sc, double r) { sc.ballast_ohm_km = r; }, opt);
}

/// Steady z_f against rail impedance as a multiple of the scenario's own.
/// Re is fitted linearly, Im by a quadratic whose vertex is reported.
inline SweepSeries sweep_rail_impedance(const JtcScenario& s, double lo = 0.8, double hi = 1.2, double step = 0.01,
                                        const SweepOptions& opt = {}) {
    if (!(lo > 0.0)) throw NonPositive("rail impedance scale must be positive");
    auto out = parameter_sweep(
        s, "z_r/z_r0", "1", stepped_range(lo, hi, step),
        [](JtcScenario& sc, double k) {
            sc.rail.z11 *= k;
            sc.rail.z22 *= k;
            sc.rail.z12 *= k;
        },
        opt);
    out.re_fit = fit_linear(out.xs(), out.re());
    out.im_fit = fit_quadratic(out.xs(), out.im());
    out.im_vertex = quadratic_vertex(*out.im_fit);
    return out;
}

/// Scenario with capacitor `index` (0-based, receiving end first) faulted.
inline JtcScenario with_capacitor_fault(JtcScenario s, std::size_t index, CapacitorFault fault) {
    if (index >= s.capacitors.size()) throw InputError("capacitor index out of range");
    s.capacitors[index] = capacitor_fault(s.capacitors[index], fault);
    return s;
}

/// z_f(faulted) - z_f(normal) along the section. No fault gives a zero series.
inline SweepSeries capacitor_fault_delta(const JtcScenario& s, std::size_t index, std::optional<CapacitorFault> fault,
                                         double step_m = kDefaultProfileStepM) {
    if (index >= s.capacitors.size()) throw InputError("capacitor index out of range");
    const SweepSeries normal = impedance_profile(s, step_m);
    const SweepSeries faulted = fault ? impedance_profile(with_capacitor_fault(s, index, *fault), step_m) : normal;
    SweepSeries out{"x_f", "m", {}, {}, {}, {}};
    for (std::size_t i = 0; i < normal.samples.size(); ++i) {
        const auto& a = normal.samples[i];
        const auto& b = faulted.samples[i];
        if (a.valid && b.valid)
            out.samples.push_back({a.x, b.z - a.z, true, {}});
        else
            out.samples.push_back({a.x, {}, false, a.valid ? b.error : a.error});
    }
    return out;
}

struct ImportanceResult {
    cplx z0{};
    std::vector<cplx> zi;
    std::vector<double> dp_re, p_re, dp_im, p_im;
};

inline std::vector<double> max_normalized(const std::vector<double>& dp) {
    const double m = dp.empty() ? 0.0 : *std::max_element(dp.begin(), dp.end());
    std::vector<double> p(dp.size(), 0.0);
    if (m > 0.0)
        for (std::size_t i = 0; i < dp.size(); ++i) p[i] = dp[i] / m;
    return p;
}

/// Relative change of the steady z_f when wheel set i alone has resistance
/// `abnormal_ohm`, then normalized by the largest change.
inline ImportanceResult structural_importance(const JtcScenario& s, double abnormal_ohm = 1.0,
                                              const SweepOptions& opt = {}) {
    if (!(abnormal_ohm > 0.0)) throw NonPositive("abnormal wheel resistance must be positive");
    ImportanceResult r;
    r.z0 = steady_impedance(s, opt.profile_step_m, opt.exclusion_radius_m);
    for (std::size_t i = 0; i < s.train.size(); ++i) {
        JtcScenario a = s;
        a.train.wheel_resistance[i] = abnormal_ohm;
        const cplx zi = steady_impedance(a, opt.profile_step_m, opt.exclusion_radius_m);
        r.zi.push_back(zi);
        r.dp_re.push_back(std::abs(zi.real() - r.z0.real()) / r.z0.real());
        r.dp_im.push_back(std::abs(zi.imag() - r.z0.imag()) / r.z0.imag());
    }
    r.p_re = max_normalized(r.dp_re);
    r.p_im = max_normalized(r.dp_im);
    return r;
}

struct TracePoint {
    double x_m = 0.0;
    double amplitude_v = 0.0;
};

/// Two numeric columns (position in m, amplitude in V) split by commas, semicolons
/// or whitespace. '#' starts a comment line; one header line before the data is allowed.
inline std::vector<TracePoint> parse_trace(std::istream& in) {
    std::vector<TracePoint> pts;
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
        std::istringstream ss(line);
        std::vector<std::string> fields;
        for (std::string f; ss >> f;) fields.push_back(f);
        std::vector<double> nums;
        bool numeric = true;
        for (const auto& f : fields) {
            try {
                std::size_t used = 0;
                const double v = std::stod(f, &used);
                if (used != f.size()) numeric = false;
                nums.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (header_allowed && fields.size() == 2) {
                header_allowed = false;
                continue;
            }
            throw TraceFormat("expected two numeric columns", lineno);
        }
        header_allowed = false;
        if (nums.size() != 2) throw TraceFormat("expected two columns, found " + std::to_string(nums.size()), lineno);
        if (!std::isfinite(nums[0]) || !std::isfinite(nums[1])) throw TraceFormat("non-finite value", lineno);
        pts.push_back({nums[0], nums[1]});
    }
    if (pts.size() < 2) throw TraceFormat("trace needs at least two points", lineno);
    std::stable_sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.x_m < b.x_m; });
    return pts;
}

struct TcrComparison {
    std::vector<double> x_m;
    std::vector<double> a_zf;   // full train
    std::vector<double> a_rwh;  // first wheel set only
    std::vector<TracePoint> measured;
    std::optional<GoodnessOfFit> gof_zf, gof_rwh;
};

/// Linear interpolation of (xs, ys) at x; xs ascending.
inline double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.empty() || x < xs.front() || x > xs.back()) throw OutOfSection("trace position outside the simulated range");
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    const auto k = static_cast<std::size_t>(it - xs.begin());
    if (xs[k] == x || k == 0) return ys[k];
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

/// Reader amplitude along the section for the full train and for its first wheel
/// set alone; with a measured trace, the fit of each against it.
inline TcrComparison tcr_comparison(const JtcScenario& s, const std::vector<TracePoint>& measured = {},
                                    double step_m = kDefaultProfileStepM) {
    if (s.train.size() == 0) throw NoShuntingPoint("no train in the section");
    JtcScenario single = s;
    single.train = s.train.first_wheel_only();
    const ShuntingModel full(s), head(single);
    const auto xs = profile_points(s.length_m, step_m);
    struct Pair {
        double zf, rwh;
    };
    const auto amps = parallel_map<Pair>(xs.size(), [&](std::size_t i) {
        return Pair{tcr_amplitude(full.solve(xs[i]), s.tcr_a1, s.tcr_a2),
                    tcr_amplitude(head.solve(xs[i]), s.tcr_a1, s.tcr_a2)};
    });
    TcrComparison out;
    out.x_m = xs;
    for (const auto& a : amps) {
        out.a_zf.push_back(a.zf);
        out.a_rwh.push_back(a.rwh);
    }
    if (!measured.empty()) {
        out.measured = measured;
        std::vector<double> y, y_zf, y_rwh;
        for (const auto& p : measured) {
            y.push_back(p.amplitude_v);
            y_zf.push_back(interpolate(out.x_m, out.a_zf, p.x_m));
            y_rwh.push_back(interpolate(out.x_m, out.a_rwh, p.x_m));
        }
        out.gof_zf = goodness_of_fit(y, y_zf);
        out.gof_rwh = goodness_of_fit(y, y_rwh);
    }
    return out;
}

}  // namespace tshunt

#endif  // TSHUNT_ANALYSIS_HPP
