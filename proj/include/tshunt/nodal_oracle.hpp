#ifndef TSHUNT_NODAL_ORACLE_HPP
#define TSHUNT_NODAL_ORACLE_HPP

// Independent check of the chain-matrix model.
//
// Every rail span is cut into short pi sections and the whole circuit, from the
// receiving far tuning unit to the sending far tuning unit, is solved as one
// node-admittance system. No chain matrix is formed anywhere in here.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tshunt/errors.hpp"
#include "tshunt/jtc.hpp"
#include "tshunt/netcore.hpp"
#include "tshunt/railline.hpp"

namespace tshunt {

inline constexpr double kDefaultOracleStepM = 0.5;

struct PointShunt {
    double position_m = 0.0;
    cplx z{};
};

namespace detail {

using SpMat = Eigen::SparseMatrix<cplx>;
using Triplets = std::vector<Eigen::Triplet<cplx>>;
using VecX = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using MatX = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

// Node grid over [x0, x1] that hits every event point and keeps spans at most h.
inline std::vector<double> node_grid(double x0, double x1, std::vector<double> events, double h) {
    events.push_back(x0);
    events.push_back(x1);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    std::vector<double> grid;
    for (std::size_t i = 0; i + 1 < events.size(); ++i) {
        const double a = events[i], b = events[i + 1];
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / h - 1e-9)));
        for (std::size_t k = 0; k < n; ++k) grid.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n));
    }
    grid.push_back(events.back());
    return grid;
}

inline std::size_t node_at(const std::vector<double>& grid, double x) {
    auto it = std::lower_bound(grid.begin(), grid.end(), x - 1e-9);
    if (it == grid.end() || std::abs(*it - x) > 1e-9) throw InputError("oracle grid misses an event point");
    return static_cast<std::size_t>(it - grid.begin());
}

inline void stamp_block(Triplets& t, std::size_t a, std::size_t b, const Mat2& y) {
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) t.emplace_back(static_cast<int>(2 * a + r), static_cast<int>(2 * b + c), y(r, c));
}

inline Mat2 rail_to_rail(cplx z) {
    const cplx y = 1.0 / z;
    Mat2 m;
    m << y, -y, -y, y;
    return m;
}

struct Segment {
    Mat2 series;  // branch admittance
    Mat2 half;    // half of the segment's shunt admittance
};

inline Segment segment(const RailUnitParams& p, double dx_m) {
    const double dx = dx_m / 1000.0;
    return {(p.series_impedance() * dx).inverse(), p.shunt_admittance() * (dx / 2.0)};
}

inline void stamp_line(Triplets& t, const RailUnitParams& p, const std::vector<double>& grid) {
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const Segment s = segment(p, grid[k + 1] - grid[k]);
        stamp_block(t, k, k, s.series + s.half);
        stamp_block(t, k + 1, k + 1, s.series + s.half);
        stamp_block(t, k, k + 1, -s.series);
        stamp_block(t, k + 1, k, -s.series);
    }
}

}  // namespace detail

/// Chain matrix of a rail span of `length_m` carrying point shunts, by Kron reduction
/// of a pi-section node model onto its two end ports.
inline Estn nodal_chain_matrix(const RailUnitParams& p, double length_m, const std::vector<PointShunt>& shunts,
                               double h_m = kDefaultOracleStepM) {
    using namespace detail;
    if (!(length_m > 0.0) || !(h_m > 0.0)) throw InputError("oracle span and step must be positive");
    std::vector<double> events;
    for (const auto& s : shunts) events.push_back(s.position_m);
    // Grid runs from the output port (x = 0) to the input port (x = length).
    const auto grid = node_grid(0.0, length_m, events, h_m);
    const std::size_t n = grid.size();
    Triplets t;
    stamp_line(t, p, grid);
    for (const auto& s : shunts) {
        const std::size_t k = node_at(grid, s.position_m);
        stamp_block(t, k, k, rail_to_rail(s.z));
    }
    SpMat y(static_cast<int>(2 * n), static_cast<int>(2 * n));
    y.setFromTriplets(t.begin(), t.end());
    const MatX dense = MatX(y);

    // Order ports first: input (last node), output (node 0), then interior.
    const std::size_t in = n - 1, out = 0;
    std::vector<int> order = {int(2 * in), int(2 * in + 1), int(2 * out), int(2 * out + 1)};
    for (std::size_t k = 1; k + 1 < n; ++k) {
        order.push_back(static_cast<int>(2 * k));
        order.push_back(static_cast<int>(2 * k + 1));
    }
    const int m = static_cast<int>(order.size());
    MatX perm(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) perm(r, c) = dense(order[r], order[c]);
    Eigen::Matrix<cplx, 4, 4> yp = perm.topLeftCorner(4, 4);
    if (m > 4) {
        const MatX yii = perm.bottomRightCorner(m - 4, m - 4);
        const MatX yie = perm.bottomLeftCorner(m - 4, 4);
        const MatX yei = perm.topRightCorner(4, m - 4);
        yp -= yei * yii.partialPivLu().solve(yie);
    }
    // Injected currents: [J_in; J_out] = yp [U_in; U_out]. The chain state at the
    // output carries the current leaving the span, I_o = -J_out.
    const Mat2 yaa = yp.block<2, 2>(0, 0), yab = yp.block<2, 2>(0, 2);
    const Mat2 yba = yp.block<2, 2>(2, 0), ybb = yp.block<2, 2>(2, 2);
    const Mat2 yba_inv = yba.inverse();
    const Mat2 uu = -yba_inv * ybb;
    const Mat2 ui = -yba_inv;
    return Estn::from_blocks(uu, ui, yaa * uu + yab, yaa * ui);
}

struct NodalOptions {
    double step_m = kDefaultOracleStepM;
};

/// Shunting-point state of the occupied section from one global nodal solve.
inline ShuntingSolution nodal_oracle(const JtcScenario& s, double x_f_m, NodalOptions opt = {}) {
    using namespace detail;
    s.validate();
    if (!(x_f_m > 0.0 && x_f_m <= s.length_m)) throw OutOfSection("shunting point outside (0, length]");
    if (!(opt.step_m > 0.0)) throw InputError("oracle step must be positive");
    const RailUnitParams p = s.line_params();
    const double lt = s.tuning_length_m;
    const double L = s.length_m;

    std::vector<PointShunt> shunts;
    shunts.push_back({-lt, s.z_rz});
    shunts.push_back({0.0, s.z_rm});
    shunts.push_back({L, s.z_es});
    shunts.push_back({L + lt, s.z_rs});
    if (lt > 0.0) {
        shunts.push_back({-lt / 2.0, s.z_sva});
        shunts.push_back({L + lt / 2.0, s.z_sva});
    } else {
        shunts.push_back({0.0, s.z_sva});
        shunts.push_back({L, s.z_sva});
    }
    std::vector<PointShunt> at_f;  // elements on the receiving side of the state at x_f
    for (const auto& c : s.capacitors) {
        shunts.push_back({*c.position_m, c.z});
        if (*c.position_m == x_f_m) at_f.push_back(shunts.back());
    }
    for (const auto& w : in_section_wheels(wheel_positions(s.train, x_f_m, L))) {
        shunts.push_back({w.position_m, w.resistance});
        if (w.position_m == x_f_m) at_f.push_back(shunts.back());
    }

    std::vector<double> events{x_f_m};
    for (const auto& sh : shunts) events.push_back(sh.position_m);
    const auto grid = node_grid(-lt, L + lt, events, opt.step_m);
    const std::size_t n = grid.size();

    Triplets t;
    stamp_line(t, p, grid);
    for (const auto& sh : shunts) {
        const std::size_t k = node_at(grid, sh.position_m);
        stamp_block(t, k, k, rail_to_rail(sh.z));
    }
    SpMat y(static_cast<int>(2 * n), static_cast<int>(2 * n));
    y.setFromTriplets(t.begin(), t.end());
    y.makeCompressed();

    // Thevenin source as its Norton equivalent across the rails at the sending boundary.
    const bool test_source = s.u_es == cplx{};
    const cplx u_es = test_source ? cplx{1.0, 0.0} : s.u_es;
    VecX j = VecX::Zero(static_cast<int>(2 * n));
    const std::size_t ks = node_at(grid, L);
    j(static_cast<int>(2 * ks)) = u_es / s.z_es;
    j(static_cast<int>(2 * ks + 1)) = -u_es / s.z_es;

    Eigen::SparseLU<SpMat> lu;
    lu.compute(y);
    if (lu.info() != Eigen::Success) throw SingularSystem("nodal system is singular", x_f_m);
    const VecX v = lu.solve(j);
    if (lu.info() != Eigen::Success) throw SingularSystem("nodal solve failed", x_f_m);
    const double residual = (y * v - j).norm() / j.norm();
    if (!(residual < kResidualTol)) throw SingularSystem("nodal residual too large", x_f_m);

    // Current leaving x_f towards the receiving end: point shunts at x_f plus the
    // pi section on the receiving side.
    const std::size_t kf = node_at(grid, x_f_m);
    const Eigen::Matrix<cplx, 2, 1> vf = v.segment<2>(static_cast<int>(2 * kf));
    Eigen::Matrix<cplx, 2, 1> i_f = Eigen::Matrix<cplx, 2, 1>::Zero();
    for (const auto& sh : at_f) i_f += rail_to_rail(sh.z) * vf;
    const Segment seg = segment(p, grid[kf] - grid[kf - 1]);
    const Eigen::Matrix<cplx, 2, 1> vd = v.segment<2>(static_cast<int>(2 * (kf - 1)));
    i_f += seg.series * (vf - vd) + seg.half * vf;

    ShuntingSolution sol;
    sol.x_f_m = x_f_m;
    sol.state = {vf(0), vf(1), i_f(0), i_f(1)};
    sol.z_f = shunting_impedance(sol.state);
    sol.rcond = 1.0;  // sparse LU gives no estimate; the residual check stands in
    sol.residual = residual;
    if (test_source) sol.state = PortState{};
    return sol;
}

}  // namespace tshunt

#endif  // TSHUNT_NODAL_ORACLE_HPP
