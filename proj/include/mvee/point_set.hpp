#ifndef MVEE_POINT_SET_HPP
#define MVEE_POINT_SET_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mvee/errors.hpp"

namespace mvee {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// An n x m collection of points stored column-wise.
///
/// A symmetric point set stands for {+x_i} and {-x_i} together. The mirror is
/// never materialised: every quantity the solvers touch depends on x_i only
/// through x_i x_i^T.
class PointSet {
public:
    PointSet() = default;

    PointSet(Matrix points, bool symmetric) : points_(std::move(points)), symmetric_(symmetric)
    {
        if (points_.rows() < 1)
            throw Error(ErrorCode::InvalidArgument, "point set must have dimension >= 1");
        if (!points_.allFinite())
            throw Error(ErrorCode::InvalidArgument, "point set contains non-finite entries");
        const Index need = symmetric_ ? dim() : dim() + 1;
        if (count() < need)
            throw Error(ErrorCode::TooFewPoints,
                        "need at least " + std::to_string(need) + " points in dimension " +
                            std::to_string(dim()) + ", got " + std::to_string(count()));
    }

    Index dim() const noexcept { return points_.rows(); }
    Index count() const noexcept { return points_.cols(); }
    bool symmetric() const noexcept { return symmetric_; }

    const Matrix& points() const noexcept { return points_; }
    auto point(Index i) const { return points_.col(i); }

private:
    Matrix points_;
    bool symmetric_ = false;
};

/// Nonnegative weights on the columns of a point set. The support is the set of
/// indices with a strictly positive weight; a dropped weight is stored as an
/// exact zero.
class DualWeights {
public:
    DualWeights() = default;

    explicit DualWeights(Vector u) : u_(std::move(u))
    {
        for (Index i = 0; i < u_.size(); ++i) {
            if (!(u_[i] >= 0.0) || !std::isfinite(u_[i]))
                throw Error(ErrorCode::InvalidArgument,
                            "weight " + std::to_string(i) + " is negative or non-finite");
        }
    }

    Index size() const noexcept { return u_.size(); }
    double operator[](Index i) const { return u_[i]; }
    const Vector& values() const noexcept { return u_; }
    double sum() const { return u_.sum(); }

    bool in_support(Index i) const { return u_[i] > 0.0; }

    std::vector<Index> support() const
    {
        std::vector<Index> s;
        for (Index i = 0; i < u_.size(); ++i)
            if (u_[i] > 0.0)
                s.push_back(i);
        return s;
    }

    /// Copy rescaled onto the probability simplex.
    DualWeights normalized() const
    {
        const double s = sum();
        if (!(s > 0.0))
            throw Error(ErrorCode::InvalidArgument, "cannot normalise all-zero weights");
        return DualWeights(u_ / s);
    }

private:
    Vector u_;
};

} // namespace mvee

#endif // MVEE_POINT_SET_HPP
