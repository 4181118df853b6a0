#ifndef TSHUNT_REGRESSION_HPP
#define TSHUNT_REGRESSION_HPP

// Curve fits used by the sweeps: linear, quadratic and the reciprocal law
// y = 1 / (a + b / x).

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <cmath>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "tshunt/errors.hpp"

namespace tshunt {

enum class FitKind { Reciprocal, Linear, Quadratic };

inline std::string_view to_string(FitKind k) {
    switch (k) {
        case FitKind::Reciprocal: return "reciprocal";
        case FitKind::Linear: return "linear";
        case FitKind::Quadratic: return "quadratic";
    }
    return "?";
}

struct GoodnessOfFit {
    double sse = 0.0;
    double r_square = 0.0;
    double rmse = 0.0;
};

/// SSE, R^2 = 1 - SSE/SST and RMSE = sqrt(SSE / (n - n_params)).
inline GoodnessOfFit goodness_of_fit(std::span<const double> y, std::span<const double> y_hat, std::size_t n_params = 0) {
    if (y.size() != y_hat.size()) throw InputError("goodness of fit needs equal-length series");
    if (y.size() < 2) throw InputError("goodness of fit needs at least two samples");
    if (n_params >= y.size()) throw InputError("more parameters than samples");
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        sst += (y[i] - mean) * (y[i] - mean);
    }
    if (sst == 0.0) throw DegenerateVariance("observed series has zero variance");
    return {sse, 1.0 - sse / sst, std::sqrt(sse / (n - static_cast<double>(n_params)))};
}

struct FitResult {
    FitKind kind = FitKind::Linear;
    // Reciprocal: {a, b}. Linear: {slope, intercept}. Quadratic: {c2, c1, c0}.
    std::vector<double> params;
    GoodnessOfFit gof;

    double operator()(double x) const {
        switch (kind) {
            case FitKind::Reciprocal: return 1.0 / (params[0] + params[1] / x);
            case FitKind::Linear: return params[0] * x + params[1];
            case FitKind::Quadratic: return (params[0] * x + params[1]) * x + params[2];
        }
        return std::nan("");
    }
};

namespace detail {

inline void check_xy(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
    if (x.size() != y.size()) throw InputError("fit abscissae and ordinates differ in length");
    if (x.size() < min_n) throw InputError("too few samples for the fit");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw NonFinite("fit data must be finite");
}

inline std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree) {
    check_xy(x, y, static_cast<std::size_t>(degree) + 2);
    const auto n = static_cast<Eigen::Index>(x.size());
    // Centre and scale the abscissa so the Vandermonde columns stay comparable.
    const double mu = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v - mu));
    if (s == 0.0) throw DegenerateVariance("abscissae are all equal");
    Eigen::MatrixXd v(n, degree + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = (x[i] - mu) / s;
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            v(i, degree - k) = p;
            p *= t;
        }
        b(i) = y[i];
    }
    const Eigen::VectorXd q = v.colPivHouseholderQr().solve(b);
    // Expand the polynomial in t = (x - mu)/s back to powers of x (highest first).
    std::vector<double> coef(static_cast<std::size_t>(degree) + 1, 0.0);
    for (int k = 0; k <= degree; ++k) {
        const double ck = q(degree - k) / std::pow(s, k);  // coefficient of (x - mu)^k
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
            // (x - mu)^k = sum_j C(k, j) x^j (-mu)^(k-j)
            coef[static_cast<std::size_t>(degree - j)] += ck * binom * std::pow(-mu, k - j);
            binom = binom * (k - j) / (j + 1);
        }
    }
    return coef;
}

inline std::vector<double> evaluate(const FitResult& f, std::span<const double> x) {
    std::vector<double> out;
    out.reserve(x.size());
    for (double v : x) out.push_back(f(v));
    return out;
}

struct ReciprocalFunctor : Eigen::DenseFunctor<double> {
    std::span<const double> x, y;
    ReciprocalFunctor(std::span<const double> xs, std::span<const double> ys)
        : Eigen::DenseFunctor<double>(2, static_cast<int>(xs.size())), x(xs), y(ys) {}

    int operator()(const InputType& p, ValueType& r) const {
        for (std::size_t i = 0; i < x.size(); ++i) r(static_cast<Eigen::Index>(i)) = 1.0 / (p(0) + p(1) / x[i]) - y[i];
        return 0;
    }
    int df(const InputType& p, JacobianType& j) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = p(0) + p(1) / x[i];
            const auto k = static_cast<Eigen::Index>(i);
            j(k, 0) = -1.0 / (d * d);
            j(k, 1) = -1.0 / (d * d * x[i]);
        }
        return 0;
    }
};

}  // namespace detail

inline FitResult fit_linear(std::span<const double> x, std::span<const double> y) {
    FitResult f{FitKind::Linear, detail::polyfit(x, y, 1), {}};
    f.gof = goodness_of_fit(y, detail::evaluate(f, x), 2);
    return f;
}

inline FitResult fit_quadratic(std::span<const double> x, std::span<const double> y) {
    FitResult f{FitKind::Quadratic, detail::polyfit(x, y, 2), {}};
    f.gof = goodness_of_fit(y, detail::evaluate(f, x), 3);
    return f;
}

/// Least-squares fit of y = 1/(a + b/x).
///
/// Starts from ordinary least squares on 1/y = a + b (1/x), which is exact for
/// noiseless data, then refines with Levenberg-Marquardt on the original residuals.
inline FitResult fit_reciprocal(std::span<const double> x, std::span<const double> y) {
    detail::check_xy(x, y, 3);
    std::vector<double> u, v;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0 || y[i] == 0.0) throw InputError("reciprocal fit needs nonzero data");
        u.push_back(1.0 / x[i]);
        v.push_back(1.0 / y[i]);
    }
    const std::vector<double> init = detail::polyfit(u, v, 1);  // {b, a}
    Eigen::VectorXd p(2);
    p << init[1], init[0];

    detail::ReciprocalFunctor fn(x, y);
    Eigen::LevenbergMarquardt<detail::ReciprocalFunctor> lm(fn);
    lm.setXtol(1e-15);
    lm.setFtol(1e-15);
    lm.setMaxfev(2000);
    const auto status = lm.minimize(p);
    if (!p.allFinite() || status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
        throw FitDiverged("reciprocal fit did not converge");
    for (double xi : x)
        if (!(std::abs(p(0) + p(1) / xi) > 0.0)) throw FitDiverged("reciprocal fit crosses a pole");

    FitResult f{FitKind::Reciprocal, {p(0), p(1)}, {}};
    f.gof = goodness_of_fit(y, detail::evaluate(f, x), 2);
    return f;
}

struct Vertex {
    double x = 0.0;
    double y = 0.0;
};

/// Extremum of c2 x^2 + c1 x + c0.
inline Vertex quadratic_vertex(double c2, double c1, double c0) {
    if (c2 == 0.0) throw DegenerateVariance("quadratic coefficient is zero; no vertex");
    return {-c1 / (2.0 * c2), c0 - c1 * c1 / (4.0 * c2)};
}

inline Vertex quadratic_vertex(const FitResult& f) {
    if (f.kind != FitKind::Quadratic) throw InputError("vertex needs a quadratic fit");
    return quadratic_vertex(f.params[0], f.params[1], f.params[2]);
}

}  // namespace tshunt

#endif  // TSHUNT_REGRESSION_HPP
