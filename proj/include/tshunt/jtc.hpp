#ifndef TSHUNT_JTC_HPP
#define TSHUNT_JTC_HPP

// Jointless track circuit occupied by a train.
//
// Layout along x (metres, receiving end at 0):
//
//   receiving tuning area      main track                  sending tuning area
//   [BA2 z_rz]--l/2--SVA--l/2--[BA1 z_rm] 0 .. caps .. L [source U_es, z_es]--l/2--SVA--l/2--[BA2 z_rs]
//
// The first wheel set sits at the shunting point x_f and the rest of the train
// trails towards the receiving end. The state at x_f is taken on the sending
// side of the first wheel set, so the shunting impedance z_f is the apparent
// impedance of the whole train and everything behind it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tshunt/elements.hpp"
#include "tshunt/errors.hpp"
#include "tshunt/netcore.hpp"
#include "tshunt/railline.hpp"
#include "tshunt/train.hpp"

namespace tshunt {

using Constraint24 = Eigen::Matrix<cplx, 2, 4>;

struct JtcScenario {
    double length_m = 789.0;
    double carrier_hz = 2300.0;
    RailUnitParams rail;  // impedances are used as given; admittances come from the ballast
    double ballast_ohm_km = 6.0;
    double ground_leak_fraction = kDefaultGroundLeakFraction;
    std::vector<ShuntElement> capacitors;  // sorted by position
    double tuning_length_m = 29.0;
    cplx z_sva{};
    cplx z_rz{};  // far tuning unit, receiving end
    cplx z_rm{};  // near tuning unit plus receiver
    cplx z_rs{};  // far tuning unit, sending end
    cplx z_es{};  // sending channel source impedance
    cplx u_es{};  // sending channel source voltage
    TrainFormation train;
    double tcr_a1 = 1.0;
    double tcr_a2 = 1.0;

    RailUnitParams line_params() const { return ballast_to_params(ballast_ohm_km, rail, ground_leak_fraction); }

    std::vector<double> capacitor_positions() const {
        std::vector<double> p;
        p.reserve(capacitors.size());
        for (const auto& c : capacitors) p.push_back(*c.position_m);
        return p;
    }

    void validate() const {
        if (!(length_m > 0.0)) throw InputError("section length must be positive");
        if (!(carrier_hz > 0.0)) throw InputError("carrier frequency must be positive");
        if (!(tuning_length_m >= 0.0)) throw InputError("tuning area length must be non-negative");
        if (!(ballast_ohm_km > 0.0)) throw NonPositiveBallast("ballast resistance must be positive");
        rail.validate();
        double prev = 0.0;
        for (const auto& c : capacitors) {
            c.validate();
            if (c.kind != ShuntKind::Capacitor) throw WrongKind("main-track shunts must be capacitors");
            if (!c.position_m) throw InputError("capacitor without a position");
            const double x = *c.position_m;
            if (!(x > prev && x < length_m)) throw InputError("capacitor positions must be sorted and inside (0, length)");
            prev = x;
        }
        for (cplx z : {z_sva, z_rz, z_rm, z_rs, z_es})
            if (!is_finite(z) || z == cplx{}) throw ZeroImpedance("tuning-area impedances must be finite and nonzero");
        if (!is_finite(u_es)) throw NonFinite("source voltage must be finite");
        train.validate();
    }
};

/// Nominal compensation capacitor, farad.
inline constexpr double kNominalCapacitorF = 46e-6;

/// The reference section: 789 m, 2300 Hz, nine 46 uF capacitors, 6 ohm km ballast,
/// 8-car train at 0.15 ohm per wheel set.
///
/// Tuning-area impedances, rail impedances and source values are calibration
/// placeholders, not measured data.
inline JtcScenario default_scenario() {
    JtcScenario s;
    s.rail = default_rail_params();
    for (double x : uniform_capacitor_positions(s.length_m, 9))
        s.capacitors.push_back(make_capacitor(kNominalCapacitorF, s.carrier_hz, x));
    s.z_sva = {0.02, 0.477};  // ~33 uH air-core coil at 2300 Hz
    s.z_rz = {0.03, 0.02};
    s.z_rm = {1.2, 0.6};
    s.z_rs = {0.03, 0.02};
    s.z_es = {0.4, 0.3};
    s.u_es = {10.0, 0.0};
    s.train = crh380b_formation();
    return s;
}

struct ReceivingTuning {
    Estn chain;               // tuning area between the two tuning units
    Constraint24 termination; // far tuning unit as a two-row boundary condition
};

struct SendingTuning {
    Estn chain;
    Mat4 source_main;          // acts on the main-track side of the source node
    Mat4 source_tuning;        // acts on the tuning-area side of the source node
    Constraint24 termination;  // far tuning unit
    Vec4 source;               // [0, 0, 0, U_es]
};

/// Two-row boundary condition of a tuning unit of impedance z terminating a chain.
inline Constraint24 termination_constraint(cplx z) {
    Constraint24 m;
    m << 1.0, -1.0, -z / 2.0, z / 2.0,  //
        0.0, 0.0, 1.0, 1.0;
    return m;
}

inline Estn tuning_chain(const LineEigen& e, double tuning_length_m, cplx z_sva) {
    const Estn half = rail_estn(e, tuning_length_m / 2000.0);
    return half * shunt_estn(z_sva) * half;
}

inline ReceivingTuning receiving_tuning(const JtcScenario& s, const LineEigen& e) {
    return {tuning_chain(e, s.tuning_length_m, s.z_sva), termination_constraint(s.z_rz)};
}

inline ReceivingTuning receiving_tuning(const JtcScenario& s) { return receiving_tuning(s, line_eigen(s.line_params())); }

inline SendingTuning sending_tuning(const JtcScenario& s, const LineEigen& e) {
    SendingTuning t;
    t.chain = tuning_chain(e, s.tuning_length_m, s.z_sva);
    const cplx h = s.z_es / 2.0;
    t.source_main << 1.0, 0.0, 0.0, 0.0,  //
        0.0, 1.0, 0.0, 0.0,               //
        0.0, 0.0, 1.0, 1.0,               //
        1.0, -1.0, h, -h;
    t.source_tuning << -1.0, 0.0, 0.0, 0.0,  //
        0.0, -1.0, 0.0, 0.0,                 //
        0.0, 0.0, 1.0, 1.0,                  //
        0.0, 0.0, h, -h;
    t.termination = termination_constraint(s.z_rs);
    t.source = Vec4(0.0, 0.0, 0.0, s.u_es);
    return t;
}

inline SendingTuning sending_tuning(const JtcScenario& s) { return sending_tuning(s, line_eigen(s.line_params())); }

enum class SolveMethod {
    Stacked,         // receiving-side subspace carried to x_f, closed by the sending-side rows
    ChainedInverse,  // explicit inverses of the chains, reduced to a 4x4 system
};

struct ShuntingSolution {
    double x_f_m = 0.0;
    PortState state;      // at x_f, sending side of the first wheel set
    cplx z_f{};           // (U1 - U2) / ((I1 - I2) / 2)
    double rcond = 1.0;   // worst reciprocal condition estimate met while solving
    double residual = 0.0;
};

inline cplx shunting_impedance(const PortState& s) { return s.differential_voltage() / s.loop_current(); }

/// Relative residual above which a solve is rejected.
inline constexpr double kResidualTol = 1e-8;

/// Pre-assembled pieces of one scenario, reused across shunting points.
class ShuntingModel {
public:
    explicit ShuntingModel(JtcScenario s) : s_(std::move(s)) {
        s_.validate();
        line_ = line_eigen(s_.line_params());
        rx_ = receiving_tuning(s_, line_);
        tx_ = sending_tuning(s_, line_);
        fixed_ = {0.0};
        for (const auto& c : s_.capacitors) {
            fixed_.push_back(*c.position_m);
            cap_.push_back(shunt_estn(c.z));
        }
        fixed_.push_back(s_.length_m);
        for (std::size_t u = 0; u + 1 < fixed_.size(); ++u) bare_units_.push_back(rail_estn(line_, span_km(u)));
        rx_full_ = shunt_estn(s_.z_rm) * rx_.chain;
        rx_kernel_ = kernel(rx_.termination);
        tx_kernel_ = kernel(tx_.termination);
    }

    const JtcScenario& scenario() const { return s_; }
    const LineEigen& line() const { return line_; }
    const std::vector<double>& fixed_points() const { return fixed_; }

    /// Index of the rail-wheel unit holding x_f; ties on a capacitor go to the sending side.
    std::size_t unit_of(double x_f_m) const {
        check_point(x_f_m);
        auto it = std::upper_bound(fixed_.begin(), fixed_.end(), x_f_m);
        std::size_t k = static_cast<std::size_t>(it - fixed_.begin()) - 1;
        return std::min(k, fixed_.size() - 2);
    }

    /// In-section wheels with the first wheel set at x_f.
    std::vector<Wheel> wheels_at(double x_f_m) const {
        const auto sites = wheel_positions(s_.train, x_f_m, s_.length_m);
        return in_section_wheels(sites);
    }

    /// Chain factors of the main track from x_f to the receiving boundary, in product order.
    std::vector<Estn> after_factors(double x_f_m) const {
        const std::size_t k = unit_of(x_f_m);
        const auto wheels = wheels_at(x_f_m);
        const auto units = partition_units(wheels, fixed_);
        // The part of unit k on the receiving side of x_f holds all of its wheels.
        std::vector<Estn> f = rail_wheel_factors(RailWheelUnit{fixed_[k], x_f_m, units[k].wheels}, line_);
        for (std::size_t u = k; u-- > 0;) {
            f.push_back(cap_[u]);
            if (units[u].wheels.empty()) {
                f.push_back(bare_units_[u]);
            } else {
                const auto g = rail_wheel_factors(units[u], line_);
                f.insert(f.end(), g.begin(), g.end());
            }
        }
        return f;
    }

    /// Main track from x_f to the receiving boundary, train included.
    Estn after_network(double x_f_m) const {
        Estn n;
        for (const Estn& f : after_factors(x_f_m)) n = n * f;
        return n;
    }

    /// Main track from the sending boundary to x_f; no wheels on this side.
    Estn before_network(double x_f_m) const {
        const std::size_t k = unit_of(x_f_m);
        Estn n;
        for (std::size_t u = fixed_.size() - 2; u > k; --u) {
            n = n * bare_units_[u];
            n = n * cap_[u - 1];
        }
        return n * rail_estn(line_, (fixed_[k + 1] - x_f_m) / 1000.0);
    }

    ShuntingSolution solve(double x_f_m, SolveMethod method = SolveMethod::Stacked) const {
        if (s_.train.size() == 0) throw NoShuntingPoint("no train in the section");
        const Estn before = before_network(x_f_m);
        // A zero source leaves z_f defined by the network alone; use a unit test source.
        const bool test_source = s_.u_es == cplx{};
        Vec4 source = tx_.source;
        if (test_source) source(3) = 1.0;

        ShuntingSolution sol = method == SolveMethod::Stacked
                                   ? solve_stacked(x_f_m, after_factors(x_f_m), before, source)
                                   : solve_chained(x_f_m, after_network(x_f_m), before, source);
        sol.z_f = shunting_impedance(sol.state);
        if (!is_finite(sol.z_f)) throw SingularSystem("shunting impedance is not finite", x_f_m);
        if (test_source) sol.state = PortState{};
        return sol;
    }

private:
    using Basis = Eigen::Matrix<cplx, 4, 2>;

    double span_km(std::size_t u) const { return (fixed_[u + 1] - fixed_[u]) / 1000.0; }

    void check_point(double x_f_m) const {
        if (!(x_f_m > 0.0 && x_f_m <= s_.length_m)) throw OutOfSection("shunting point outside (0, length]");
    }

    static Basis orthonormal(const Basis& m) {
        Eigen::HouseholderQR<Basis> qr(m);
        return qr.householderQ() * Basis::Identity();
    }

    static Basis kernel(const Constraint24& c) {
        Eigen::FullPivLU<Constraint24> lu(c);
        const Eigen::Matrix<cplx, 4, Eigen::Dynamic> k = lu.kernel();
        if (k.cols() != 2) throw SingularSystem("termination constraint is rank deficient", 0.0);
        return orthonormal(k);
    }

    // States admitted by the receiving side are a 2-dimensional subspace. Its basis
    // is carried factor by factor up to x_f and re-orthonormalized at every step, so
    // the strong attenuation of the wheel shunts cannot wash out either direction.
    // At x_f the sending-side relations close the system with four unknowns.
    ShuntingSolution solve_stacked(double x_f_m, const std::vector<Estn>& after, const Estn& before,
                                   const Vec4& source) const {
        Basis b = orthonormal(rx_full_.matrix() * rx_kernel_);
        for (auto it = after.rbegin(); it != after.rend(); ++it) b = orthonormal(it->matrix() * b);

        Mat4 a;
        a.leftCols<2>() = tx_.source_main * before.matrix() * b;
        a.rightCols<2>() = tx_.source_tuning * tx_.chain.matrix() * tx_kernel_;
        Vec4 rhs = source;
        for (int r = 0; r < 4; ++r) {
            const double scale = a.row(r).cwiseAbs().maxCoeff();
            a.row(r) /= scale;
            rhs(r) /= scale;
        }
        Eigen::PartialPivLU<Mat4> lu(a);
        const double rc = lu.rcond();
        if (!(rc >= kSingularRcond)) throw SingularSystem("boundary system is singular", x_f_m);
        const Vec4 y = lu.solve(rhs);
        const double residual = (a * y - rhs).norm() / (rhs.norm() + a.norm() * y.norm());
        if (!(residual < kResidualTol)) throw SingularSystem("boundary system residual too large", x_f_m);

        ShuntingSolution sol;
        sol.x_f_m = x_f_m;
        sol.state = PortState::from(b * y.head<2>());
        sol.rcond = rc;
        sol.residual = residual;
        return sol;
    }

    ShuntingSolution solve_chained(double x_f_m, const Estn& after, const Estn& before, const Vec4& source) const {
        double worst = 1.0;
        auto inv = [&worst](const Estn& n) {
            Inverted r = invert(n);
            worst = std::min(worst, r.rcond);
            return r.value.matrix();
        };
        const Mat4 st_inv = inv(tx_.chain);
        const Mat4 n3_inv = inv(Estn(tx_.source_tuning));
        const Mat4 rt_inv = inv(rx_.chain);
        const Mat4 rm_inv = inv(shunt_estn(s_.z_rm));
        const Mat4 af_inv = inv(after);

        const Constraint24 sending_rows = tx_.termination * st_inv * n3_inv;
        Mat4 m;
        m.topRows<2>() = sending_rows * tx_.source_main * before.matrix();
        m.bottomRows<2>() = rx_.termination * rt_inv * rm_inv * af_inv;
        Vec4 rhs = Vec4::Zero();
        rhs.head<2>() = sending_rows * source;

        Eigen::PartialPivLU<Mat4> lu(m);
        const double rc = lu.rcond();
        worst = std::min(worst, rc);
        if (!(rc >= kSingularRcond)) throw SingularSystem("reduced boundary system is singular", x_f_m);
        const Vec4 u = lu.solve(rhs);

        ShuntingSolution sol;
        sol.x_f_m = x_f_m;
        sol.state = PortState::from(u);
        sol.rcond = worst;
        sol.residual = (m * u - rhs).norm() / (rhs.norm() + m.norm() * u.norm());
        return sol;
    }

    JtcScenario s_;
    LineEigen line_;
    ReceivingTuning rx_;
    SendingTuning tx_;
    std::vector<double> fixed_;      // 0, capacitor positions, length
    std::vector<Estn> cap_;          // capacitor u sits at fixed_[u + 1]
    std::vector<Estn> bare_units_;   // wheel-free chain of each unit
    Estn rx_full_;                   // near tuning unit followed by the receiving tuning area
    Basis rx_kernel_;                // states allowed by the receiving far tuning unit
    Basis tx_kernel_;                // states allowed by the sending far tuning unit
};

inline Estn after_network(const JtcScenario& s, double x_f_m) { return ShuntingModel(s).after_network(x_f_m); }

inline Estn before_network(const JtcScenario& s, double x_f_m) { return ShuntingModel(s).before_network(x_f_m); }

inline ShuntingSolution solve_shunting_point(const JtcScenario& s, double x_f_m, SolveMethod method = SolveMethod::Stacked) {
    return ShuntingModel(s).solve(x_f_m, method);
}

/// Amplitude of the voltage induced in the on-board reader antenna.
inline double tcr_amplitude(const ShuntingSolution& sol, double a1, double a2) {
    if (sol.z_f == cplx{}) throw ZeroImpedance("shunting impedance is zero");
    return std::abs(a1 * a2 * sol.state.differential_voltage() / sol.z_f);
}

}  // namespace tshunt

#endif  // TSHUNT_JTC_HPP
