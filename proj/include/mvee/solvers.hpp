#ifndef MVEE_SOLVERS_HPP
#define MVEE_SOLVERS_HPP

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mvee/decrement.hpp"
#include "mvee/errors.hpp"
#include "mvee/linalg.hpp"
#include "mvee/point_set.hpp"
#include "mvee/problem.hpp"

namespace mvee {

enum class Algorithm { FWK, WA, CD_CONST, CD_DIMINISH, CD_BACKTRACK, RCD };
enum class InitScheme { KHACHIYAN, KUMAR_YILDIRIM };
enum class StepType { ADD, INCREASE, DECREASE, DROP };

inline std::string_view to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::FWK: return "fwk";
    case Algorithm::WA: return "wa";
    case Algorithm::CD_CONST: return "cd";
    case Algorithm::CD_DIMINISH: return "cd-diminish";
    case Algorithm::CD_BACKTRACK: return "cd-backtrack";
    case Algorithm::RCD: return "rcd";
    }
    return "?";
}

inline std::string_view to_string(StepType t)
{
    switch (t) {
    case StepType::ADD: return "ADD";
    case StepType::INCREASE: return "INCREASE";
    case StepType::DECREASE: return "DECREASE";
    case StepType::DROP: return "DROP";
    }
    return "?";
}

namespace detail {
inline std::string normalize_name(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (c == '_')
            c = '-';
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}
} // namespace detail

/// Accepts the short names ("cd", "wa", "fwk", "cd-diminish", "cd-backtrack",
/// "rcd") and the enum spellings ("CD_CONST", "FW-K", ...), case-insensitively.
inline std::optional<Algorithm> parse_algorithm(std::string_view name)
{
    const std::string s = detail::normalize_name(name);
    if (s == "fwk" || s == "fw-k" || s == "khachiyan") return Algorithm::FWK;
    if (s == "wa" || s == "wolfe-atwood") return Algorithm::WA;
    if (s == "cd" || s == "cd-const" || s == "cd-constant") return Algorithm::CD_CONST;
    if (s == "cd-diminish" || s == "cd-diminishing") return Algorithm::CD_DIMINISH;
    if (s == "cd-backtrack" || s == "cd-backtracking") return Algorithm::CD_BACKTRACK;
    if (s == "rcd") return Algorithm::RCD;
    return std::nullopt;
}

inline std::optional<InitScheme> parse_init(std::string_view name)
{
    const std::string s = detail::normalize_name(name);
    if (s == "khachiyan" || s == "uniform") return InitScheme::KHACHIYAN;
    if (s == "kumar-yildirim" || s == "ky") return InitScheme::KUMAR_YILDIRIM;
    return std::nullopt;
}

struct SolverConfig {
    Algorithm algorithm = Algorithm::CD_CONST;
    double epsilon = 1e-7;
    Index max_iter = 100000;
    InitScheme init = InitScheme::KUMAR_YILDIRIM;
    std::uint64_t seed = 0;
    double backtrack_alpha = 0.5;
    double backtrack_beta = 0.5;
    /// 0 selects 50 * n.
    Index refactor_period = 0;
    bool record_trace = true;
#ifdef NDEBUG
    bool check_decrements = false;
#else
    bool check_decrements = true;
#endif

    void validate() const
    {
        if (!(epsilon > 0.0))
            throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
        if (max_iter < 1)
            throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
        if (!(backtrack_beta > 0.0 && backtrack_beta < 1.0))
            throw Error(ErrorCode::InvalidArgument, "backtrack_beta must lie in (0, 1)");
        if (!(backtrack_alpha >= 0.0 && backtrack_alpha < 1.0))
            throw Error(ErrorCode::InvalidArgument, "backtrack_alpha must lie in [0, 1)");
        if (refactor_period < 0)
            throw Error(ErrorCode::InvalidArgument, "refactor_period must be nonnegative");
    }
};

/// One row of the convergence trace. Gradient quantities and h describe the
/// iterate that selected the step; theta is the applied move (additive for the
/// coordinate-descent family, convex-combination weight for FW-K and WA).
struct IterationRecord {
    Index iter = 0;
    StepType step_type = StepType::ADD;
    Index axis = 0;
    double kappa_max = 0.0;
    double kappa_min_support = 0.0;
    double eps_k = 0.0;
    double h_value = 0.0;
    double theta = 0.0;
};

struct SolveReport {
    bool converged = false;
    Index iterations = 0;
    /// The stopping quantity: eps_plus for FW-K, max(eps_plus, eps_minus) otherwise.
    double final_eps = 0.0;
    double final_eps_plus = 0.0;
    double final_eps_minus = 0.0;
    double final_h = 0.0;
    std::vector<IterationRecord> trace;
    double wall_time = 0.0;
    DualWeights u_final;
    Index refactorizations = 0;
};

// ---------------------------------------------------------------------------
// Initialization

inline DualWeights init_khachiyan(Index m)
{
    if (m < 1)
        throw Error(ErrorCode::InvalidArgument, "need at least one point");
    return DualWeights(Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

/// Picks n linearly independent columns: each pick maximises |d^T x_i| for a
/// seeded random direction d drawn orthogonal to the points picked so far.
/// The picked columns get weight 1/n each.
inline DualWeights init_kumar_yildirim(const PointSet& X, std::uint64_t seed)
{
    const Index n = X.dim();
    const Index m = X.count();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double scale = X.points().colwise().norm().maxCoeff();
    if (!(scale > 0.0))
        throw Error(ErrorCode::NotFullRank, "all points are zero");

    Matrix basis(n, 0);
    std::vector<Index> chosen;
    for (Index pick = 0; pick < n; ++pick) {
        bool found = false;
        for (Index attempt = 0; attempt < n && !found; ++attempt) {
            Vector d(n);
            for (Index k = 0; k < n; ++k)
                d[k] = normal(rng);
            if (basis.cols() > 0) {
                d -= basis * (basis.transpose() * d);
                d -= basis * (basis.transpose() * d);
            }
            const double dn = d.norm();
            if (dn < 1e-10)
                continue;
            d /= dn;

            const Vector proj = X.points().transpose() * d;
            Index j = 0;
            const double best = proj.cwiseAbs().maxCoeff(&j);
            if (!(best > 1e-10 * scale))
                continue;

            Vector q = X.point(j);
            if (basis.cols() > 0) {
                q -= basis * (basis.transpose() * q);
                q -= basis * (basis.transpose() * q);
            }
            basis.conservativeResize(n, basis.cols() + 1);
            basis.col(basis.cols() - 1) = q / q.norm();
            chosen.push_back(j);
            found = true;
        }
        if (!found)
            throw Error(ErrorCode::NotFullRank, "found only " + std::to_string(chosen.size()) +
                                                    " independent directions in R^" +
                                                    std::to_string(n));
    }

    Vector u = Vector::Zero(m);
    for (Index j : chosen)
        u[j] = 1.0 / static_cast<double>(n);
    return DualWeights(std::move(u));
}

// ---------------------------------------------------------------------------
// Axis selection

struct AxisChoice {
    Index j_plus = 0;
    Index j_minus = 0;
    double eps_plus = 0.0;
    double eps_minus = 0.0;

    /// Gauss-Southwell: the plus axis wins ties.
    bool plus_branch() const noexcept { return eps_plus >= eps_minus; }
    double eps() const noexcept { return std::max(eps_plus, eps_minus); }
};

/// j_plus maximises kappa over all points, j_minus minimises it over the
/// support. Since grad h = n - kappa, comparing eps_plus with eps_minus picks
/// the admissible axis of largest |grad h|. Lowest index wins ties.
inline AxisChoice select_axis_gauss_southwell(const Vector& kappa, const Vector& u, Index n)
{
    const double nd = static_cast<double>(n);
    AxisChoice c;
    double kmax = -std::numeric_limits<double>::infinity();
    double kmin = std::numeric_limits<double>::infinity();
    bool have_support = false;
    for (Index i = 0; i < kappa.size(); ++i) {
        if (kappa[i] > kmax) {
            kmax = kappa[i];
            c.j_plus = i;
        }
        if (u[i] > 0.0 && kappa[i] < kmin) {
            kmin = kappa[i];
            c.j_minus = i;
            have_support = true;
        }
    }
    if (!have_support)
        throw Error(ErrorCode::InvalidArgument, "weights have empty support");
    c.eps_plus = kmax / nd - 1.0;
    c.eps_minus = 1.0 - kmin / nd;
    return c;
}

inline AxisChoice select_axis_gauss_southwell(const Vector& kappa, const DualWeights& u, Index n)
{
    return select_axis_gauss_southwell(kappa, u.values(), n);
}

// ---------------------------------------------------------------------------
// Steps

enum class MoveKind {
    /// u_j <- u_j + theta
    Additive,
    /// u <- (1 - theta) u + theta e_j
    Convex,
};

struct StepPlan {
    Index axis = 0;
    StepType type = StepType::ADD;
    MoveKind kind = MoveKind::Additive;
    double theta = 0.0;
};

/// Applies a step to a weight vector. DROP steps leave an exact zero.
inline Vector apply_step(Vector u, const StepPlan& s)
{
    if (s.kind == MoveKind::Additive) {
        u[s.axis] += s.theta;
    } else {
        const double uj = u[s.axis];
        u *= (1.0 - s.theta);
        u[s.axis] = (1.0 - s.theta) * uj + s.theta;
    }
    if (s.type == StepType::DROP || u[s.axis] < 0.0)
        u[s.axis] = 0.0;
    return u;
}

inline StepType increase_type(const Vector& u, Index j)
{
    return u[j] > 0.0 ? StepType::INCREASE : StepType::ADD;
}

/// Khachiyan step toward e_j: lambda = (kappa_j - n) / (n (kappa_j - 1)),
/// which puts x_j on the boundary of the next ellipsoid.
inline StepPlan fwk_step(const Vector& u, const Vector& kappa, Index j, Index n)
{
    const double nd = static_cast<double>(n);
    const double kj = kappa[j];
    if (!(kj > 1.0))
        throw Error(ErrorCode::InvalidArgument, "FW-K step needs kappa_j > 1");
    return {j, increase_type(u, j), MoveKind::Convex, (kj - nd) / (nd * (kj - 1.0))};
}

/// Wolfe-Atwood: a Khachiyan step on j_plus, or an away step on j_minus whose
/// length is capped so that u_{j_minus} reaches exactly zero.
inline StepPlan wa_step(const Vector& u, const Vector& kappa, const AxisChoice& c, Index n)
{
    if (c.plus_branch())
        return fwk_step(u, kappa, c.j_plus, n);

    const double nd = static_cast<double>(n);
    const Index j = c.j_minus;
    const double kj = kappa[j];
    const double uj = u[j];
    const double cap = uj / (1.0 - uj);
    // Along the away direction g is monotone when kappa_j <= 1, so the cap is optimal.
    const double exact = kj > 1.0 ? (nd - kj) / (nd * (kj - 1.0)) : std::numeric_limits<double>::infinity();
    if (uj >= 1.0 || exact >= cap)
        return {j, StepType::DROP, MoveKind::Convex, -cap};
    return {j, StepType::DECREASE, MoveKind::Convex, -exact};
}

/// Constant-stepsize coordinate step on axis j of the D1 objective:
/// L_j = kappa_j^2 when kappa_j >= n, L_j = n kappa_j otherwise, followed by
/// projection onto u >= 0.
inline StepPlan cd_axis_step(const Vector& u, const Vector& kappa, Index j, Index n)
{
    const double nd = static_cast<double>(n);
    const double kj = kappa[j];
    if (kj >= nd)
        return {j, increase_type(u, j), MoveKind::Additive, (kj - nd) / (kj * kj)};
    const double theta = (kj - nd) / (nd * kj);
    if (u[j] + theta >= 0.0)
        return {j, StepType::DECREASE, MoveKind::Additive, theta};
    return {j, StepType::DROP, MoveKind::Additive, -u[j]};
}

inline StepPlan cd_step(const Vector& u, const Vector& kappa, const AxisChoice& c, Index n)
{
    return cd_axis_step(u, kappa, c.plus_branch() ? c.j_plus : c.j_minus, n);
}

/// Diminishing stepsize 2 / (k + 2), clipped at zero on the minus branch.
inline StepPlan cd_diminishing_step(const Vector& u, Index k, const AxisChoice& c)
{
    const double step = 2.0 / (static_cast<double>(k) + 2.0);
    if (c.plus_branch())
        return {c.j_plus, increase_type(u, c.j_plus), MoveKind::Additive, step};
    const double uj = u[c.j_minus];
    if (uj <= step)
        return {c.j_minus, StepType::DROP, MoveKind::Additive, -uj};
    return {c.j_minus, StepType::DECREASE, MoveKind::Additive, -step};
}

/// Armijo backtracking from lambda_0 = min(1, lambda_max).
///
/// `delta_h(lambda)` returns h(u + lambda d e_j) - h(u) and `slope` is
/// |grad h_j|. Accepts the first lambda_0 beta^t with
/// delta_h(lambda) <= -alpha * lambda * slope.
template <class Evaluator>
double backtracking_stepsize(Evaluator&& delta_h, double slope, double lambda_max, double alpha,
                             double beta)
{
    if (!(slope > 0.0))
        return 0.0;
    double lambda = std::min(1.0, lambda_max);
    while (lambda >= 1e-16) {
        const double dh = delta_h(lambda);
        if (std::isfinite(dh) && dh <= -alpha * lambda * slope)
            return lambda;
        lambda *= beta;
    }
    throw Error(ErrorCode::LineSearchStalled, "step length underflowed below 1e-16");
}

/// Gauss-Southwell axis with a backtracking step length.
inline StepPlan cd_backtracking_step(const Vector& u, const Vector& kappa, const AxisChoice& c,
                                     Index n, double alpha, double beta)
{
    const double nd = static_cast<double>(n);
    if (c.plus_branch()) {
        const Index j = c.j_plus;
        const double kj = kappa[j];
        auto dh = [&](double lam) { return nd * lam - std::log1p(lam * kj); };
        const double lam = backtracking_stepsize(dh, kj - nd, std::numeric_limits<double>::infinity(),
                                                 alpha, beta);
        return {j, increase_type(u, j), MoveKind::Additive, lam};
    }
    const Index j = c.j_minus;
    const double kj = kappa[j];
    const double uj = u[j];
    auto dh = [&](double lam) {
        const double arg = 1.0 - lam * kj;
        return arg > 0.0 ? -nd * lam - std::log(arg) : std::numeric_limits<double>::infinity();
    };
    const double lam = backtracking_stepsize(dh, nd - kj, uj, alpha, beta);
    if (lam >= uj)
        return {j, StepType::DROP, MoveKind::Additive, -uj};
    return {j, StepType::DECREASE, MoveKind::Additive, -lam};
}

/// Samples j with probability |grad_j| / sum_i |grad_i|.
template <class Rng>
Index rcd_pick(const Vector& grad, Rng& rng)
{
    const Vector weights = grad.cwiseAbs();
    if (!(weights.sum() > 0.0))
        throw Error(ErrorCode::Converged, "gradient vanishes");
    std::discrete_distribution<Index> dist(weights.data(), weights.data() + weights.size());
    return dist(rng);
}

// ---------------------------------------------------------------------------
// Driver

namespace detail {

/// Iterate state shared by all algorithms: weights, factor of X U X^T and the
/// gradient vector kappa, kept consistent by rank-one updates.
class IterateState {
public:
    IterateState(const PointSet& X, DualWeights u0, FactorOptions opts)
        : X_(X), u_(u0.values()), opts_(opts)
    {
        refactor();
        refactorizations_ = 0;
    }

    const Vector& u() const noexcept { return u_; }
    const Vector& kappa() const noexcept { return kappa_; }
    const FactorState& factor() const noexcept { return factor_; }
    Index refactorizations() const noexcept { return refactorizations_; }

    double h() const
    {
        return -logdet(factor_) + static_cast<double>(X_.dim()) * (sum_u_ - 1.0);
    }

    void refactor()
    {
        factor_ = factor_from_weights(X_, DualWeights(u_), opts_);
        kappa_ = gradient_refresh(factor_, X_);
        sum_u_ = u_.sum();
        ++refactorizations_;
    }

    void apply(const StepPlan& s)
    {
        if (s.theta == 0.0)
            return;
        const Index j = s.axis;
        const Vector w = cross_products(factor_, X_, j);
        const double kj = w[j];
        const double rank_theta = s.kind == MoveKind::Additive ? s.theta : s.theta / (1.0 - s.theta);

        u_ = apply_step(std::move(u_), s);
        sum_u_ = s.kind == MoveKind::Additive ? sum_u_ + s.theta
                                              : (1.0 - s.theta) * sum_u_ + s.theta;

        try {
            factor_.rank_one_update(X_.point(j), rank_theta);
            gradient_rank_one_inplace(kappa_, w, rank_theta, kj, opts_.pd_tolerance);
            if (s.kind == MoveKind::Convex) {
                factor_.scale(1.0 - s.theta);
                kappa_ /= (1.0 - s.theta);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DowndateBreaksPD && e.code() != ErrorCode::SingularUpdate)
                throw;
            refactor();
            return;
        }
        if (factor_.needs_refactor())
            refactor();
    }

private:
    const PointSet& X_;
    Vector u_;
    FactorOptions opts_;
    FactorState factor_;
    Vector kappa_;
    double sum_u_ = 0.0;
    Index refactorizations_ = 0;
};

inline double min_support_kappa(const Vector& kappa, const Vector& u)
{
    double kmin = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < u.size(); ++i)
        if (u[i] > 0.0)
            kmin = std::min(kmin, kappa[i]);
    return kmin;
}

inline void check_decrement(const StepPlan& s, double kappa_j, double n, double dh, Index iter)
{
    double bound = 0.0;
    switch (s.type) {
    case StepType::ADD:
    case StepType::INCREASE: bound = decrement_bound_plus(n, kappa_j); break;
    case StepType::DECREASE: bound = decrement_bound_minus(n, kappa_j); break;
    case StepType::DROP: bound = 0.0; break;
    }
    if (dh < bound - 1e-10)
        throw Error(ErrorCode::DecrementBoundViolated,
                    "iteration " + std::to_string(iter) + ": decrement " + std::to_string(dh) +
                        " below bound " + std::to_string(bound));
}

} // namespace detail

/// Runs the configured algorithm on a centrally symmetric instance (lift
/// non-symmetric sets first). The returned weights are not normalised.
inline SolveReport solve(const PointSet& X, const SolverConfig& config)
{
    config.validate();
    if (!X.symmetric())
        throw Error(ErrorCode::InvalidArgument, "solve expects a symmetric (lifted) point set");

    const auto t0 = std::chrono::steady_clock::now();
    const Index n = X.dim();
    const double nd = static_cast<double>(n);

    DualWeights u0 = config.init == InitScheme::KHACHIYAN ? init_khachiyan(X.count())
                                                          : init_kumar_yildirim(X, config.seed);
    detail::IterateState st(X, std::move(u0), FactorOptions{1e-12, config.refactor_period});

    std::mt19937_64 rng(config.seed);
    const bool decrement_check = config.check_decrements && (config.algorithm == Algorithm::CD_CONST ||
                                                    config.algorithm == Algorithm::RCD);

    SolveReport report;
    double h = st.h();
    Index k = 0;
    for (;; ++k) {
        const AxisChoice c = select_axis_gauss_southwell(st.kappa(), st.u(), n);
        const double stop_eps = config.algorithm == Algorithm::FWK ? c.eps_plus : c.eps();
        report.final_eps = stop_eps;
        report.final_eps_plus = c.eps_plus;
        report.final_eps_minus = c.eps_minus;
        if (stop_eps <= config.epsilon) {
            report.converged = true;
            break;
        }
        if (k >= config.max_iter)
            break;

        StepPlan s;
        switch (config.algorithm) {
        case Algorithm::FWK: s = fwk_step(st.u(), st.kappa(), c.j_plus, n); break;
        case Algorithm::WA: s = wa_step(st.u(), st.kappa(), c, n); break;
        case Algorithm::CD_CONST: s = cd_step(st.u(), st.kappa(), c, n); break;
        case Algorithm::CD_DIMINISH: s = cd_diminishing_step(st.u(), k, c); break;
        case Algorithm::CD_BACKTRACK:
            s = cd_backtracking_step(st.u(), st.kappa(), c, n, config.backtrack_alpha,
                                     config.backtrack_beta);
            break;
        case Algorithm::RCD: {
            const Vector grad = (nd - st.kappa().array()).matrix();
            s = cd_axis_step(st.u(), st.kappa(), rcd_pick(grad, rng), n);
            break;
        }
        }

        const double kappa_j = st.kappa()[s.axis];
        if (config.record_trace) {
            report.trace.push_back({k, s.type, s.axis, st.kappa()[c.j_plus],
                                    st.kappa()[c.j_minus], c.eps(), h, s.theta});
        }

        st.apply(s);
        const double h_next = st.h();
        if (decrement_check)
            detail::check_decrement(s, kappa_j, nd, h - h_next, k);
        h = h_next;
    }

    report.iterations = k;
    report.final_h = h;
    report.u_final = DualWeights(st.u());
    report.refactorizations = st.refactorizations();
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// Trace CSV: iter,step_type,axis,kappa_max,kappa_min_support,eps,h,theta
inline void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace)
{
    os << "iter,step_type,axis,kappa_max,kappa_min_support,eps,h,theta\n";
    os << std::setprecision(17);
    for (const auto& r : trace)
        os << r.iter << ',' << to_string(r.step_type) << ',' << r.axis << ',' << r.kappa_max << ','
           << r.kappa_min_support << ',' << r.eps_k << ',' << r.h_value << ',' << r.theta << '\n';
}

} // namespace mvee

#endif // MVEE_SOLVERS_HPP
