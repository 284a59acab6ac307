#ifndef MVEE_DECREMENT_HPP
#define MVEE_DECREMENT_HPP

#include <cmath>

// Closed-form objective decrements for single-coordinate moves on the dual
// objective h. Moving u -> u + theta e_j changes h by
//     h(u) - h(u + theta e_j) = ln(1 + theta kappa_j) - n theta,
// by the matrix determinant lemma.

namespace mvee {

inline double coordinate_decrement(double n, double kappa_j, double theta)
{
    return std::log1p(theta * kappa_j) - n * theta;
}

/// Decrement of a constant-stepsize plus step, theta = (kappa - n) / kappa^2.
inline double delta_plus(double n, double kappa_plus)
{
    return std::log(2.0 * kappa_plus - n) - std::log(kappa_plus) +
           (n - kappa_plus) * n / (kappa_plus * kappa_plus);
}

/// Decrement of an unclipped constant-stepsize minus step, theta = (kappa - n) / (n kappa).
inline double delta_minus(double n, double kappa_minus)
{
    return std::log(kappa_minus / n) + n / kappa_minus - 1.0;
}

/// Guaranteed decrement of a plus step: (n - kappa)^2 / (2 kappa^2).
inline double decrement_bound_plus(double n, double kappa_plus)
{
    const double d = n - kappa_plus;
    return d * d / (2.0 * kappa_plus * kappa_plus);
}

/// Guaranteed decrement of an unclipped minus step: (n - kappa)^2 / (2 n kappa).
inline double decrement_bound_minus(double n, double kappa_minus)
{
    const double d = n - kappa_minus;
    return d * d / (2.0 * n * kappa_minus);
}

/// delta_plus minus its guaranteed bound; nonnegative for kappa >= n > 0.
inline double slack_plus(double n, double t)
{
    return std::log(2.0 - n / t) - n * (t - n) / (t * t) - (n - t) * (n - t) / (2.0 * t * t);
}

/// delta_minus minus its guaranteed bound; nonnegative for 0 < kappa <= n.
inline double slack_minus(double n, double t)
{
    return std::log(t / n) + n / t - 1.0 - (n - t) * (n - t) / (2.0 * n * t);
}

/// Decrement of a clipped minus step that drops weight u at kappa;
/// nonnegative for 0 < u < (n - kappa) / (n kappa).
inline double slack_drop(double n, double kappa_minus, double u)
{
    return n * u + std::log1p(-u * kappa_minus);
}

} // namespace mvee

#endif // MVEE_DECREMENT_HPP
