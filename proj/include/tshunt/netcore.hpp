#ifndef TSHUNT_NETCORE_HPP
#define TSHUNT_NETCORE_HPP

// Chain-matrix algebra for two-rail-plus-ground networks.
//
// A six-terminal network (two rails and the ground reference on each side)
// is described by a 4x4 complex chain matrix N that maps the state at its
// output cross-section to the state at its input cross-section:
//
//     [U1 U2 I1 I2]_in^T = N [U1 U2 I1 I2]_out^T
//
// U are rail-to-ground voltages, I are rail currents flowing from input to
// output. The blocks of N carry mixed units: the upper-left block is
// dimensionless, upper-right is ohm, lower-left is siemens and lower-right is
// dimensionless. Units are not tracked at runtime.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

#include "tshunt/errors.hpp"

namespace tshunt {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix<cplx, 2, 2>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec4 = Eigen::Matrix<cplx, 4, 1>;

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (!is_finite(m(r, c))) return false;
    return true;
}

/// Voltages to ground and rail currents at one cross-section.
struct PortState {
    cplx u1{};
    cplx u2{};
    cplx i1{};
    cplx i2{};

    Vec4 vec() const { return Vec4(u1, u2, i1, i2); }
    static PortState from(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }

    bool finite() const { return is_finite(u1) && is_finite(u2) && is_finite(i1) && is_finite(i2); }
    cplx differential_voltage() const { return u1 - u2; }
    /// Loop current of the rail pair, (I1 - I2) / 2.
    cplx loop_current() const { return (i1 - i2) / 2.0; }
};

/// Equivalent six-terminal network: a 4x4 chain matrix.
class Estn {
public:
    Estn() : m_(Mat4::Identity()) {}

    explicit Estn(const Mat4& m) : m_(m) {
        if (!all_finite(m_)) throw NonFinite("chain matrix has non-finite entries");
    }

    static Estn identity() { return Estn(); }

    static Estn from_blocks(const Mat2& uu, const Mat2& ui, const Mat2& iu, const Mat2& ii) {
        Mat4 m;
        m << uu, ui, iu, ii;
        return Estn(m);
    }

    const Mat4& matrix() const { return m_; }
    cplx operator()(int row, int col) const { return m_(row, col); }

    Mat2 uu() const { return m_.topLeftCorner<2, 2>(); }
    Mat2 ui() const { return m_.topRightCorner<2, 2>(); }
    Mat2 iu() const { return m_.bottomLeftCorner<2, 2>(); }
    Mat2 ii() const { return m_.bottomRightCorner<2, 2>(); }

    cplx determinant() const { return m_.determinant(); }

private:
    Mat4 m_;
};

/// Cascade: the network `a` followed by the network `b` along the chain.
inline Estn compose(const Estn& a, const Estn& b) { return Estn(Mat4(a.matrix() * b.matrix())); }

inline Estn operator*(const Estn& a, const Estn& b) { return compose(a, b); }

inline PortState apply(const Estn& n, const PortState& s) { return PortState::from(n.matrix() * s.vec()); }

/// Inversion refuses matrices whose reciprocal condition estimate is below this.
inline constexpr double kSingularRcond = 1e-14;

struct Inverted {
    Estn value;
    double rcond;  // L1 reciprocal condition estimate of the input
};

/// Partial-pivoted LU inverse with a reciprocal condition estimate.
inline Inverted invert(const Estn& n) {
    const Mat4& m = n.matrix();
    if (m.cwiseAbs().maxCoeff() == 0.0) throw SingularMatrix(0.0);
    Eigen::PartialPivLU<Mat4> lu(m);
    const double rc = lu.rcond();
    if (!(rc >= kSingularRcond)) throw SingularMatrix(rc);
    return {Estn(Mat4(lu.inverse())), rc};
}

/// Largest entrywise deviation of `a` from `b`, each 2x2 block scaled by the
/// largest magnitude in the matching block of `b`. Blocks of `b` that are
/// exactly zero are compared in absolute terms.
inline double block_relative_error(const Estn& a, const Estn& b) {
    double worst = 0.0;
    for (int br = 0; br < 2; ++br) {
        for (int bc = 0; bc < 2; ++bc) {
            const Mat2 ba = a.matrix().block<2, 2>(2 * br, 2 * bc);
            const Mat2 bb = b.matrix().block<2, 2>(2 * br, 2 * bc);
            double scale = bb.cwiseAbs().maxCoeff();
            if (scale == 0.0) scale = 1.0;
            worst = std::max(worst, (ba - bb).cwiseAbs().maxCoeff() / scale);
        }
    }
    return worst;
}

}  // namespace tshunt

#endif  // TSHUNT_NETCORE_HPP
