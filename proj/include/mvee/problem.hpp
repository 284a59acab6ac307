#ifndef MVEE_PROBLEM_HPP
#define MVEE_PROBLEM_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "mvee/errors.hpp"
#include "mvee/linalg.hpp"
#include "mvee/point_set.hpp"

namespace mvee {

/// {x : (x - c)^T H (x - c) <= level}, with level equal to the dimension.
struct Ellipsoid {
    Vector center;
    Matrix shape;
    double level = 0.0;

    Index dim() const noexcept { return center.size(); }
};

/// Embeds x_i -> (x_i, 1) and marks the result centrally symmetric.
inline PointSet lift(const PointSet& X)
{
    if (X.symmetric())
        throw Error(ErrorCode::InvalidArgument, "lift expects a non-symmetric point set");
    const Index n = X.dim();
    if (X.count() < n + 1)
        throw Error(ErrorCode::TooFewPoints, "lifting needs at least n + 1 points");
    Matrix Y(n + 1, X.count());
    Y.topRows(n) = X.points();
    Y.row(n).setOnes();
    return PointSet(std::move(Y), true);
}

/// Ellipsoid induced by weights on the original (unlifted or symmetric) set.
///
/// Non-symmetric sets give c = X u and H = (X U X^T - c c^T)^{-1}; the
/// covariance is accumulated around c rather than by subtraction. Weights are
/// normalised onto the simplex first.
inline Ellipsoid recover_ellipsoid(const DualWeights& weights, const PointSet& X)
{
    if (weights.size() != X.count())
        throw Error(ErrorCode::InvalidArgument, "weight vector length does not match point count");
    const DualWeights u = weights.normalized();
    const Index n = X.dim();

    Ellipsoid E;
    E.level = static_cast<double>(n);
    Matrix cov = Matrix::Zero(n, n);
    if (X.symmetric()) {
        E.center = Vector::Zero(n);
        for (Index i = 0; i < X.count(); ++i)
            if (u[i] > 0.0)
                cov.selfadjointView<Eigen::Lower>().rankUpdate(X.point(i), u[i]);
    } else {
        E.center = X.points() * u.values();
        for (Index i = 0; i < X.count(); ++i)
            if (u[i] > 0.0)
                cov.selfadjointView<Eigen::Lower>().rankUpdate(X.point(i) - E.center, u[i]);
    }
    cov = cov.selfadjointView<Eigen::Lower>();

    Eigen::LLT<Matrix> llt(cov);
    const double dmax = cov.diagonal().cwiseAbs().maxCoeff();
    if (llt.info() != Eigen::Success || !(dmax > 0.0))
        throw Error(ErrorCode::DegenerateCovariance, "weighted covariance is not positive definite");
    const Matrix L = llt.matrixL();
    if ((L.diagonal().array().square() <= 1e-12 * dmax).any())
        throw Error(ErrorCode::DegenerateCovariance, "support spans a lower-dimensional affine hull");

    E.shape = llt.solve(Matrix::Identity(n, n));
    E.shape = 0.5 * (E.shape + E.shape.transpose()).eval();
    return E;
}

inline double log_unit_ball_volume(Index n)
{
    const double nd = static_cast<double>(n);
    return 0.5 * nd * std::log(std::numbers::pi) - std::lgamma(0.5 * nd + 1.0);
}

inline double logdet_shape(const Ellipsoid& E)
{
    Eigen::LLT<Matrix> llt(E.shape);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::InvalidArgument, "ellipsoid shape is not positive definite");
    return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

/// n^{n/2} Vol(B_n) / sqrt(det H), evaluated in log space.
inline double volume(const Ellipsoid& E)
{
    const double nd = static_cast<double>(E.dim());
    return std::exp(0.5 * nd * std::log(nd) + log_unit_ball_volume(E.dim()) -
                    0.5 * logdet_shape(E));
}

/// Dual objective h(u) = -ln det(X U X^T) + n (e^T u - 1); `state` must factor X U X^T.
inline double objective_h(const DualWeights& u, const FactorState& state)
{
    const double n = static_cast<double>(state.dim());
    return -logdet(state) + n * (u.sum() - 1.0);
}

struct CertificateReport {
    double eps_plus = 0.0;
    double eps_minus = 0.0;
    bool eps_primal_feasible = false;
    bool eps_approx_optimal = false;
    /// Bound n ln(1 + eps_plus) on g(u) - g(u*).
    double gap_bound = 0.0;
};

inline CertificateReport certificate(const DualWeights& u, const Vector& kappa, Index n, double eps)
{
    const double nd = static_cast<double>(n);
    double kmin = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < u.size(); ++i)
        if (u.in_support(i))
            kmin = std::min(kmin, kappa[i]);

    CertificateReport r;
    r.eps_plus = kappa.maxCoeff() / nd - 1.0;
    r.eps_minus = std::isfinite(kmin) ? 1.0 - kmin / nd : std::numeric_limits<double>::infinity();
    r.eps_primal_feasible = r.eps_plus <= eps;
    r.eps_approx_optimal = std::max(r.eps_plus, r.eps_minus) <= eps;
    r.gap_bound = nd * std::log1p(std::max(r.eps_plus, 0.0));
    return r;
}

} // namespace mvee

#endif // MVEE_PROBLEM_HPP
