#ifndef MVEE_LINALG_HPP
#define MVEE_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mvee/errors.hpp"
#include "mvee/point_set.hpp"

namespace mvee {

struct FactorOptions {
    /// Relative threshold on the diagonal of L, measured against its largest entry.
    double pd_tolerance = 1e-12;
    /// Rank-one modifications between full refactorizations; 0 selects 50 * n.
    Index refactor_period = 0;
};

/// Lower-triangular factor L of M = X U X^T, with M = L L^T.
///
/// The factor only tracks how many rank-one modifications it has absorbed;
/// refactoring needs (X, u) and is therefore driven by the owner.
class FactorState {
public:
    FactorState() = default;

    FactorState(Matrix lower, FactorOptions options = {})
        : lower_(std::move(lower)), pd_tolerance_(options.pd_tolerance)
    {
        refactor_period_ = options.refactor_period > 0 ? options.refactor_period : 50 * dim();
    }

    Index dim() const noexcept { return lower_.rows(); }
    const Matrix& lower() const noexcept { return lower_; }
    Matrix& lower() noexcept { return lower_; }

    Index update_count() const noexcept { return update_count_; }
    Index refactor_period() const noexcept { return refactor_period_; }
    double pd_tolerance() const noexcept { return pd_tolerance_; }
    bool needs_refactor() const noexcept { return update_count_ >= refactor_period_; }

    FactorOptions options() const { return {pd_tolerance_, refactor_period_}; }

    /// Dense M = L L^T; meant for diagnostics and tests.
    Matrix dense() const { return lower_ * lower_.transpose(); }

    /// M <- M + theta * x x^T in O(n^2). Leaves the state untouched on failure.
    void rank_one_update(const Eigen::Ref<const Vector>& x, double theta)
    {
        if (theta == 0.0) {
            ++update_count_;
            return;
        }
        const Index n = dim();
        Matrix L = lower_;
        Vector w = std::sqrt(std::abs(theta)) * x;
        const double sign = theta > 0.0 ? 1.0 : -1.0;
        const double floor = pd_tolerance_ * lower_.diagonal().maxCoeff();

        for (Index k = 0; k < n; ++k) {
            const double lkk = L(k, k);
            const double r2 = lkk * lkk + sign * w[k] * w[k];
            if (!(r2 > floor * floor))
                throw Error(ErrorCode::DowndateBreaksPD,
                            "diagonal entry " + std::to_string(k) + " fell below tolerance");
            const double r = std::sqrt(r2);
            const double c = r / lkk;
            const double s = w[k] / lkk;
            L(k, k) = r;
            const Index tail = n - k - 1;
            if (tail > 0) {
                L.col(k).tail(tail) = (L.col(k).tail(tail) + sign * s * w.tail(tail)) / c;
                w.tail(tail) = c * w.tail(tail) - s * L.col(k).tail(tail);
            }
        }
        lower_.swap(L);
        ++update_count_;
    }

    /// M <- alpha * M for alpha > 0.
    void scale(double alpha)
    {
        if (!(alpha > 0.0))
            throw Error(ErrorCode::InvalidArgument, "scale factor must be positive");
        lower_ *= std::sqrt(alpha);
    }

    /// Solves M v = x with two triangular solves.
    Vector solve(const Eigen::Ref<const Vector>& x) const
    {
        Vector v = lower_.triangularView<Eigen::Lower>().solve(x);
        lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(v);
        return v;
    }

private:
    Matrix lower_;
    Index update_count_ = 0;
    Index refactor_period_ = 0;
    double pd_tolerance_ = 1e-12;
};

namespace detail {

inline void check_factor_diagonal(const Matrix& L, double tolerance)
{
    const double dmax = L.diagonal().cwiseAbs().maxCoeff();
    for (Index k = 0; k < L.rows(); ++k) {
        if (!(L(k, k) > tolerance * dmax))
            throw Error(ErrorCode::NotFullRank,
                        "weighted points do not span R^" + std::to_string(L.rows()) +
                            " (pivot " + std::to_string(k) + ")");
    }
}

} // namespace detail

/// Factor of M = sum_i u_i x_i x_i^T from a Householder QR of U^{1/2} X^T.
/// M is never formed; only columns in the support of u enter the QR.
inline FactorState factor_from_weights(const PointSet& X, const DualWeights& u,
                                       FactorOptions options = {})
{
    const Index n = X.dim();
    if (u.size() != X.count())
        throw Error(ErrorCode::InvalidArgument, "weight vector length does not match point count");

    const auto support = u.support();
    if (static_cast<Index>(support.size()) < n)
        throw Error(ErrorCode::NotFullRank, "support has " + std::to_string(support.size()) +
                                                " points, need at least " + std::to_string(n));

    Matrix A(static_cast<Index>(support.size()), n);
    for (Index r = 0; r < A.rows(); ++r) {
        const Index i = support[static_cast<std::size_t>(r)];
        A.row(r) = std::sqrt(u[i]) * X.point(i).transpose();
    }

    Eigen::HouseholderQR<Matrix> qr(A);
    Matrix L = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().transpose();
    for (Index k = 0; k < n; ++k)
        if (L(k, k) < 0.0)
            L.col(k) = -L.col(k);

    detail::check_factor_diagonal(L, options.pd_tolerance);
    return FactorState(std::move(L), options);
}

/// Cholesky factor of an explicit SPD matrix.
inline FactorState factor_from_matrix(const Matrix& M, FactorOptions options = {})
{
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotFullRank, "matrix is not positive definite");
    Matrix L = llt.matrixL();
    detail::check_factor_diagonal(L, options.pd_tolerance);
    return FactorState(std::move(L), options);
}

inline FactorState rank_one_modify(FactorState state, const Eigen::Ref<const Vector>& x, double theta)
{
    state.rank_one_update(x, theta);
    return state;
}

/// x^T M^{-1} x as the squared norm of L^{-1} x.
inline double quad_form(const FactorState& state, const Eigen::Ref<const Vector>& x)
{
    return state.lower().triangularView<Eigen::Lower>().solve(x).squaredNorm();
}

inline double logdet(const FactorState& state)
{
    return 2.0 * state.lower().diagonal().array().log().sum();
}

/// kappa_i = x_i^T M^{-1} x_i for every column, processed in column blocks.
inline Vector gradient_refresh(const FactorState& state, const PointSet& X)
{
    constexpr Index block = 4096;
    const Index m = X.count();
    Vector kappa(m);
    for (Index start = 0; start < m; start += block) {
        const Index width = std::min(block, m - start);
        Matrix Y = state.lower().triangularView<Eigen::Lower>().solve(
            X.points().middleCols(start, width));
        kappa.segment(start, width) = Y.colwise().squaredNorm().transpose();
    }
    return kappa;
}

/// w_i = x_i^T M^{-1} x_j for all i; O(n^2 + mn).
inline Vector cross_products(const FactorState& state, const PointSet& X, Index j)
{
    const Vector v = state.solve(X.point(j));
    return X.points().transpose() * v;
}

/// Sherman-Morrison update of kappa after M <- M + theta * x_j x_j^T, where
/// w_i = x_i^T M^{-1} x_j and kappa_j = w_j.
inline void gradient_rank_one_inplace(Vector& kappa, const Vector& w, double theta, double kappa_j,
                                      double pd_tolerance = 1e-12)
{
    if (theta == 0.0)
        return;
    const double denom = 1.0 + theta * kappa_j;
    if (!(denom > pd_tolerance))
        throw Error(ErrorCode::SingularUpdate, "1 + theta * kappa_j = " + std::to_string(denom));
    kappa.array() -= (theta / denom) * w.array().square();
}

inline Vector gradient_rank_one(Vector kappa, const Vector& w, double theta, double kappa_j,
                                double pd_tolerance = 1e-12)
{
    gradient_rank_one_inplace(kappa, w, theta, kappa_j, pd_tolerance);
    return kappa;
}

} // namespace mvee

#endif // MVEE_LINALG_HPP
