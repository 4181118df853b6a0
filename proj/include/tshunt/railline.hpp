#ifndef TSHUNT_RAILLINE_HPP
#define TSHUNT_RAILLINE_HPP

// Uniform two-rail line over a lossy ground.
//
// The per-unit-length model is the telegrapher system
//
//     dU/dx = z_t I,    dI/dx = g_t U
//
// with z_t = -[[z11, z12], [z12, z22]] and
//      g_t = [[-g11 - g12, g12], [g12, -g22 - g12]],
// so that U'' = z_t g_t U. The chain matrix of a length l follows from the
// modal decomposition z_t g_t = H diag(lambda) H^-1. Lengths are in km here;
// callers working in metres convert at their boundary.

#include <cmath>
#include <cstddef>

#include "tshunt/errors.hpp"
#include "tshunt/netcore.hpp"

namespace tshunt {

/// Per-km impedances (ohm/km) and admittances (S/km) of the rail pair.
struct RailUnitParams {
    cplx z11{}, z22{}, z12{};
    cplx g11{}, g22{}, g12{};
    double frequency_hz = 0.0;

    static RailUnitParams symmetric(cplx z_self, cplx z_mutual, cplx g_ground, cplx g_between, double frequency_hz) {
        return {z_self, z_self, z_mutual, g_ground, g_ground, g_between, frequency_hz};
    }

    bool is_symmetric() const { return z11 == z22 && g11 == g22; }

    void validate() const {
        for (cplx v : {z11, z22, z12, g11, g22, g12})
            if (!is_finite(v)) throw NonFinite("rail parameters must be finite");
        if (z11.real() < 0.0 || z22.real() < 0.0) throw InputError("rail self resistance must be non-negative");
        if (g11.real() < 0.0 || g22.real() < 0.0 || g12.real() < 0.0)
            throw InputError("rail leakage conductance must be non-negative");
    }

    /// z_t, with the sign convention of the telegrapher system above.
    Mat2 zt() const {
        Mat2 m;
        m << -z11, -z12, -z12, -z22;
        return m;
    }

    /// g_t, with the sign convention of the telegrapher system above.
    Mat2 gt() const {
        Mat2 m;
        m << -g11 - g12, g12, g12, -g22 - g12;
        return m;
    }

    /// Series impedance matrix per km (positive convention, as a branch element).
    Mat2 series_impedance() const { return -zt(); }

    /// Nodal shunt admittance matrix per km (current leaving each rail node).
    Mat2 shunt_admittance() const { return -gt(); }

    /// Impedance of the rail loop per km, as seen by a differential current.
    cplx loop_impedance() const { return z11 + z22 - 2.0 * z12; }
};

/// Modal solution of the line.
struct LineEigen {
    cplx lambda1{}, lambda2{};  // 1/km^2
    Mat2 h;                     // eigenvectors as unit-norm columns
    Mat2 zt;                    // z_t the eigenvectors were computed from
};

/// Eigenvalues closer than this (relative) are treated as repeated.
inline constexpr double kDegenerateModeTol = 1e-9;

inline LineEigen line_eigen(const RailUnitParams& p) {
    p.validate();
    const Mat2 zt = p.zt();
    const Mat2 a = zt * p.gt();
    const cplx half_trace = (a(0, 0) + a(1, 1)) / 2.0;
    const cplx half_gap = (a(0, 0) - a(1, 1)) / 2.0;
    const cplx root = std::sqrt(half_gap * half_gap + a(0, 1) * a(1, 0));
    const cplx l1 = half_trace + root;
    const cplx l2 = half_trace - root;
    const double scale = std::max(std::abs(l1), std::abs(l2));
    if (scale == 0.0 || std::abs(l1 - l2) <= kDegenerateModeTol * scale)
        throw DegenerateModes("rail line modes coincide; couple the rails or use the lumped oracle");

    auto eigenvector = [&a](cplx lambda) {
        // Two candidate null vectors of (a - lambda I); keep the better scaled one.
        Eigen::Matrix<cplx, 2, 1> v1(a(0, 1), lambda - a(0, 0));
        Eigen::Matrix<cplx, 2, 1> v2(lambda - a(1, 1), a(1, 0));
        Eigen::Matrix<cplx, 2, 1> v = v1.norm() >= v2.norm() ? v1 : v2;
        return Eigen::Matrix<cplx, 2, 1>(v / v.norm());
    };

    LineEigen e;
    e.lambda1 = l1;
    e.lambda2 = l2;
    e.h.col(0) = eigenvector(l1);
    e.h.col(1) = eigenvector(l2);
    e.zt = zt;
    return e;
}

/// Chain matrix of a rail line of `length_km`.
///
/// Builds the forward map from the input state at x = 0 to the state at
/// x = l out of the modal blocks cosh, sinh and sqrt(lambda), then inverts it.
inline Estn rail_estn(const LineEigen& e, double length_km) {
    if (!(length_km >= 0.0)) throw InputError("rail length must be non-negative");
    if (length_km == 0.0) return Estn::identity();

    const cplx k1 = std::sqrt(e.lambda1);
    const cplx k2 = std::sqrt(e.lambda2);
    const Mat2 d1 = Eigen::Matrix<cplx, 2, 1>(std::cosh(k1 * length_km), std::cosh(k2 * length_km)).asDiagonal();
    const Mat2 d2 = Eigen::Matrix<cplx, 2, 1>(std::sinh(k1 * length_km), std::sinh(k2 * length_km)).asDiagonal();
    const Mat2 d3 = Eigen::Matrix<cplx, 2, 1>(k1, k2).asDiagonal();
    const Mat2 d3_inv = Eigen::Matrix<cplx, 2, 1>(1.0 / k1, 1.0 / k2).asDiagonal();

    const Mat2& h = e.h;
    const Mat2 h_inv = h.inverse();
    const Mat2& zt = e.zt;
    const Mat2 zt_inv = zt.inverse();

    const Estn forward = Estn::from_blocks(h * d1 * h_inv,                                  //
                                           h * d2 * d3_inv * h_inv * zt,                    //
                                           zt_inv * h * d3 * d2 * h_inv,                    //
                                           zt_inv * h * d3 * d1 * d3_inv * h_inv * zt);
    return invert(forward).value;
}

/// Rail chain matrix built by cascading `n_seg` lumped pi sections.
///
/// Each section is half the segment's shunt admittance, the full series
/// impedance (with mutual coupling), then the other half of the shunt. Used
/// as an independent check of rail_estn; converges with O(1/n_seg^2).
inline Estn lumped_pi_oracle(const RailUnitParams& p, double length_km, std::size_t n_seg) {
    if (n_seg == 0) throw InputError("lumped oracle needs at least one segment");
    if (!(length_km >= 0.0)) throw InputError("rail length must be non-negative");
    const double dx = length_km / static_cast<double>(n_seg);

    const Mat2 eye = Mat2::Identity();
    const Mat2 zero = Mat2::Zero();
    const Mat4 half_shunt = Estn::from_blocks(eye, zero, p.shunt_admittance() * (dx / 2.0), eye).matrix();
    const Mat4 series = Estn::from_blocks(eye, p.series_impedance() * dx, zero, eye).matrix();
    const Mat4 section = half_shunt * series * half_shunt;

    // Cascade of identical sections by repeated squaring.
    Mat4 result = Mat4::Identity();
    Mat4 power = section;
    for (std::size_t n = n_seg; n > 0; n >>= 1) {
        if (n & 1u) result = result * power;
        power = power * power;
    }
    return Estn(result);
}

/// Default share of the total leakage that goes to ground instead of across the rails.
inline constexpr double kDefaultGroundLeakFraction = 0.1;

/// Leakage admittances for a ballast resistance `r_b` (ohm km).
///
/// The rail-to-rail leakage conductance is 1/r_b per km and each rail leaks
/// `ground_fraction / r_b` per km to ground. Impedances are kept from `base`.
inline RailUnitParams ballast_to_params(double r_b, const RailUnitParams& base,
                                        double ground_fraction = kDefaultGroundLeakFraction) {
    if (!(r_b > 0.0)) throw NonPositiveBallast("ballast resistance must be positive");
    if (!(ground_fraction > 0.0)) throw NonPositive("ground leakage fraction must be positive");
    RailUnitParams p = base;
    p.g12 = cplx(1.0 / r_b, 0.0);
    p.g11 = cplx(ground_fraction / r_b, 0.0);
    p.g22 = p.g11;
    return p;
}

/// Rail impedances used when a scenario does not supply its own.
///
/// Calibration placeholder, not measured data: chosen so the shunting
/// impedance of an 8-car train lands near 0.07 + 0.015j ohm at 2300 Hz.
inline RailUnitParams default_rail_params(double ballast_ohm_km = 6.0) {
    const RailUnitParams base = RailUnitParams::symmetric({5.2, 6.5}, {0.2, 1.0}, {}, {}, 2300.0);
    return ballast_to_params(ballast_ohm_km, base);
}

}  // namespace tshunt

#endif  // TSHUNT_RAILLINE_HPP
