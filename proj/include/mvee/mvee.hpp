#ifndef MVEE_MVEE_HPP
#define MVEE_MVEE_HPP

#include "mvee/decrement.hpp"
#include "mvee/errors.hpp"
#include "mvee/linalg.hpp"
#include "mvee/point_set.hpp"
#include "mvee/problem.hpp"
#include "mvee/solvers.hpp"

namespace mvee {

struct EnclosingResult {
    Ellipsoid ellipsoid;
    SolveReport report;
};

/// Minimum-volume enclosing ellipsoid of X. Non-symmetric sets are lifted
/// one dimension up, solved as symmetric instances and mapped back.
inline EnclosingResult enclose(const PointSet& X, const SolverConfig& config)
{
    EnclosingResult r;
    if (X.symmetric()) {
        r.report = solve(X, config);
    } else {
        r.report = solve(lift(X), config);
    }
    r.ellipsoid = recover_ellipsoid(r.report.u_final, X);
    return r;
}

} // namespace mvee

#endif // MVEE_MVEE_HPP
