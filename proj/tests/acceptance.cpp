// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails. Criterion 12 runs only with --stress.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mvee/harness.hpp"
#include "mvee/mvee.hpp"

using namespace mvee;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

double max_abs(const Matrix& a)
{
    return a.cwiseAbs().maxCoeff();
}

constexpr Algorithm kAll[] = {Algorithm::FWK,         Algorithm::WA,           Algorithm::CD_CONST,
                              Algorithm::CD_DIMINISH, Algorithm::CD_BACKTRACK, Algorithm::RCD};

SolverConfig config(Algorithm a, std::uint64_t seed)
{
    SolverConfig c;
    c.algorithm = a;
    c.seed = seed;
    c.record_trace = false;
    c.check_decrements = false;
    return c;
}

// ---------------------------------------------------------------------------

Outcome analytic_fixtures()
{
    const auto t0 = Clock::now();
    Matrix sq(2, 4);
    sq << 1, -1, 1, -1,
          1, 1, -1, -1;
    Matrix seg(1, 2);
    seg << 0, 1;

    double worst_sq = 0.0, worst_seg = 0.0;
    std::string bad;
    for (Algorithm a : kAll) {
        const auto r = enclose(PointSet(sq, false), config(a, 1));
        const auto& E = r.ellipsoid;
        const double err = std::max({E.center.norm(), max_abs(E.shape - Matrix::Identity(2, 2)),
                                     rel(E.level, 2.0), rel(volume(E), 2.0 * std::numbers::pi)});
        worst_sq = std::max(worst_sq, err);
        if (!(err <= 1e-6))
            bad += " square:" + std::string(to_string(a));

        const auto q = enclose(PointSet(seg, false), config(a, 1));
        const double e2 = std::max(std::abs(q.ellipsoid.center[0] - 0.5) / 0.5,
                                   rel(q.ellipsoid.shape(0, 0), 4.0));
        worst_seg = std::max(worst_seg, e2);
        if (!(e2 <= 1e-6))
            bad += " interval:" + std::string(to_string(a));
    }
    const double t = seconds_since(t0);
    const bool pass = bad.empty() && t < 1.0;
    return {pass, "worst square err " + fmt(worst_sq) + ", worst interval err " + fmt(worst_seg) +
                      ", " + fmt(t) + " s" + (bad.empty() ? "" : ", failing:" + bad)};
}

Outcome cross_solver_uniqueness()
{
    const auto t0 = Clock::now();
    double worst_obj = 0.0, worst_shape = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const PointSet X = gen_sample(10, 500, seed);
        const PointSet Y = lift(X);
        std::vector<double> g;
        std::vector<Matrix> H;
        for (Algorithm a : {Algorithm::CD_CONST, Algorithm::WA, Algorithm::FWK}) {
            SolverConfig c = config(a, seed);
            if (a == Algorithm::FWK)
                c.init = InitScheme::KHACHIYAN;
            const auto r = solve(Y, c);
            const DualWeights u = r.u_final.normalized();
            g.push_back(-logdet(factor_from_weights(Y, u)));
            H.push_back(recover_ellipsoid(u, X).shape);
        }
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = i + 1; j < g.size(); ++j) {
                worst_obj = std::max(worst_obj, rel(g[i], g[j]));
                worst_shape = std::max(worst_shape, max_abs(H[i] - H[j]));
            }
    }
    const double t = seconds_since(t0);
    return {worst_obj <= 1e-6 && worst_shape <= 1e-4 && t < 30.0,
            "worst pairwise objective rel diff " + fmt(worst_obj) + ", worst shape max-norm diff " +
                fmt(worst_shape) + ", " + fmt(t) + " s"};
}

Outcome regime_iterations(const Regime& regime, double cd_cap, double wa_cap, double budget)
{
    const auto t0 = Clock::now();
    Index cd_max = 0, wa_max = 0, cd_over = 0, wa_over = 0;
    double cd_sum = 0.0, wa_sum = 0.0;
    bool all_converged = true;
    for (Index rep = 0; rep < regime.repetitions; ++rep) {
        const std::uint64_t seed = 1 + static_cast<std::uint64_t>(rep);
        const PointSet Y = lift(gen_sample(regime.n, regime.m, seed));
        const auto cd = solve(Y, config(Algorithm::CD_CONST, seed));
        const auto wa = solve(Y, config(Algorithm::WA, seed));
        all_converged = all_converged && cd.converged && wa.converged;
        cd_max = std::max(cd_max, cd.iterations);
        wa_max = std::max(wa_max, wa.iterations);
        cd_over += cd.iterations > cd_cap ? 1 : 0;
        wa_over += wa.iterations > wa_cap ? 1 : 0;
        cd_sum += static_cast<double>(cd.iterations);
        wa_sum += static_cast<double>(wa.iterations);
    }
    const double t = seconds_since(t0);
    const double reps = static_cast<double>(regime.repetitions);
    const bool pass = all_converged && cd_over == 0 && wa_over == 0 && t < budget;
    return {pass, "CD max " + std::to_string(cd_max) + " (cap " + fmt(cd_cap) + ", mean " +
                      fmt(cd_sum / reps) + ", " + std::to_string(cd_over) + " over), WA max " +
                      std::to_string(wa_max) + " (cap " + fmt(wa_cap) + ", mean " + fmt(wa_sum / reps) +
                      ", " + std::to_string(wa_over) + " over), " + fmt(t) + " s"};
}

Outcome decrement_bound_suite()
{
    Index steps = 0, violations = 0;
    double worst = 0.0;
    auto check_run = [&](const PointSet& Y, std::uint64_t seed) {
        SolverConfig c = config(Algorithm::CD_CONST, seed);
        c.record_trace = true;
        const auto r = solve(Y, c);
        const double n = static_cast<double>(Y.dim());
        for (std::size_t k = 0; k < r.trace.size(); ++k) {
            const auto& rec = r.trace[k];
            const double next = k + 1 < r.trace.size() ? r.trace[k + 1].h_value : r.final_h;
            const double dh = rec.h_value - next;
            double bound = 0.0;
            switch (rec.step_type) {
            case StepType::ADD:
            case StepType::INCREASE: bound = decrement_bound_plus(n, rec.kappa_max); break;
            case StepType::DECREASE: bound = decrement_bound_minus(n, rec.kappa_min_support); break;
            case StepType::DROP: bound = 0.0; break;
            }
            worst = std::max(worst, bound - dh);
            if (dh < bound - 1e-10)
                ++violations;
            ++steps;
        }
    };
    for (const Regime& regime : {small_regime(), moderate_regime()})
        for (Index rep = 0; rep < regime.repetitions; ++rep) {
            const std::uint64_t seed = 1 + static_cast<std::uint64_t>(rep);
            check_run(lift(gen_sample(regime.n, regime.m, seed)), seed);
        }
    return {steps >= 10000 && violations == 0,
            std::to_string(steps) + " CD steps, " + std::to_string(violations) +
                " violations, max (bound - decrement) " + fmt(worst)};
}

Outcome slack_grid_suite()
{
    const auto t0 = Clock::now();
    double worst = 0.0;
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (double n : {1.0, 2.0, 3.0}) {
        for (int i = 0; i < 1000; ++i) {
            // g1 on kappa in [n, 50n], g2 on (0, n].
            worst = std::min(worst, slack_plus(n, n * (1.0 + 49.0 * i / 999.0)));
            worst = std::min(worst, slack_minus(n, n * (i + 1) / 1000.0));
            // g3 over kappa in (0, n) and t in (0, (n - kappa)/(n kappa)).
            const double kappa = n * (i + 0.5) / 1000.0;
            const double frac = std::fmod((i + 1) * golden, 1.0);
            const double t = frac * (n - kappa) / (n * kappa);
            worst = std::min(worst, slack_drop(n, kappa, t));
        }
    }
    const double secs = seconds_since(t0);
    return {worst >= -1e-12 && secs < 1.0, "min value " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome delta_curves()
{
    const auto t0 = Clock::now();
    bool plus_mono = true, minus_mono = true;
    double lim_err = 0.0, minus_at_03 = 1e300;
    for (double n : {1.0, 2.0, 3.0}) {
        double prev = delta_plus(n, n);
        for (int i = 1; i <= 2000; ++i) {
            const double v = delta_plus(n, n * std::pow(10.0, 6.0 * i / 2000.0));
            plus_mono = plus_mono && v > prev;
            prev = v;
        }
        lim_err = std::max(lim_err, std::abs(delta_plus(n, 1e6 * n) - std::log(2.0)));
        prev = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 2000; ++i) {
            const double v = delta_minus(n, n * i / 2000.0);
            minus_mono = minus_mono && v < prev;
            prev = v;
        }
        minus_at_03 = std::min(minus_at_03, delta_minus(n, 0.3 * n));
    }
    const double secs = seconds_since(t0);
    const bool pass = plus_mono && minus_mono && lim_err < 1e-4 && minus_at_03 > std::log(2.0) && secs < 1.0;
    return {pass, std::string("plus increasing ") + (plus_mono ? "yes" : "no") + ", minus decreasing " +
                      (minus_mono ? "yes" : "no") + ", |plus(1e6 n) - ln 2| " + fmt(lim_err) +
                      ", min minus(0.3n) " + fmt(minus_at_03)};
}

Outcome linalg_oracles()
{
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    auto gaussian = [&](Index r, Index c) {
        Matrix A(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i)
                A(i, j) = normal(rng);
        return A;
    };
    auto mixed = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 1 + static_cast<Index>(unit(rng) * 8.0);
        const Index m = std::min<Index>(40, n + 1 + static_cast<Index>(unit(rng) * 40.0));
        const Matrix X = gaussian(n, m);
        Vector u(m);
        for (Index i = 0; i < m; ++i)
            u[i] = 0.05 + unit(rng);
        const PointSet P(X, true);
        auto F = factor_from_weights(P, DualWeights(u));
        Matrix M = X * u.asDiagonal() * X.transpose();

        worst = std::max(worst, max_abs(F.dense() - M) / std::max(1.0, max_abs(M)));
        worst = std::max(worst, mixed(logdet(F), std::log(M.determinant())));
        const Matrix Minv = M.inverse();
        for (Index i = 0; i < m; ++i)
            worst = std::max(worst, mixed(quad_form(F, P.point(i)), X.col(i).dot(Minv * X.col(i))));

        Vector kappa = gradient_refresh(F, P);
        for (int step = 0; step < 20; ++step) {
            const Index j = static_cast<Index>(unit(rng) * static_cast<double>(m));
            const double theta = unit(rng) < 0.5 ? unit(rng) : -0.9 * unit(rng) * u[j];
            const Vector w = cross_products(F, P, j);
            gradient_rank_one_inplace(kappa, w, theta, w[j]);
            F.rank_one_update(P.point(j), theta);
            u[j] += theta;
            M += theta * X.col(j) * X.col(j).transpose();
        }
        const Matrix Minv2 = M.inverse();
        worst = std::max(worst, max_abs(F.dense() - M) / std::max(1.0, max_abs(M)));
        worst = std::max(worst, mixed(logdet(F), std::log(M.determinant())));
        for (Index i = 0; i < m; ++i)
            worst = std::max(worst, mixed(kappa[i], X.col(i).dot(Minv2 * X.col(i))));
    }

    // Drift over a long run of solver-style updates with periodic refactorization.
    const PointSet Y = lift(gen_sample(8, 400, 3));
    detail::IterateState st(Y, init_kumar_yildirim(Y, 3), FactorOptions{});
    const Index n = Y.dim();
    for (Index k = 0; k < 1000; ++k) {
        const AxisChoice c = select_axis_gauss_southwell(st.kappa(), st.u(), n);
        st.apply(cd_step(st.u(), st.kappa(), c, n));
    }
    const Vector fresh = gradient_refresh(factor_from_weights(Y, DualWeights(st.u())), Y);
    const double drift = (st.kappa() - fresh).cwiseAbs().maxCoeff();

    return {worst <= 1e-10 && drift < 1e-8 && st.refactorizations() > 0,
            "worst oracle err " + fmt(worst) + ", kappa drift after 1000 updates " + fmt(drift) + " (" +
                std::to_string(st.refactorizations()) + " refactorizations)"};
}

Outcome rcd_inferiority()
{
    double rcd_min = 1e300, cd_max = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const PointSet Y = lift(gen_sample(10, 500, seed));
        SolverConfig rc = config(Algorithm::RCD, seed);
        rc.max_iter = 10000;
        rcd_min = std::min(rcd_min, solve(Y, rc).final_eps);
        SolverConfig cd = config(Algorithm::CD_CONST, seed);
        cd.max_iter = 1380;
        cd_max = std::max(cd_max, solve(Y, cd).final_eps);
    }
    return {rcd_min > 1e-3 && cd_max <= 1e-7,
            "min RCD eps after 1e4 iterations " + fmt(rcd_min) + ", max CD eps after 1380 iterations " +
                fmt(cd_max)};
}

Outcome diminishing_degradation()
{
    std::string detail;
    bool found = false;
    Index best_cd = std::numeric_limits<Index>::max();
    for (std::uint64_t seed = 1; seed <= 10 && !found; ++seed) {
        const PointSet Y = lift(gen_sample(10, 500, seed));
        SolverConfig cd = config(Algorithm::CD_CONST, seed);
        cd.epsilon = 1e-4;
        const auto rc = solve(Y, cd);
        best_cd = std::min(best_cd, rc.iterations);
        if (!rc.converged || rc.iterations >= 200)
            continue;
        SolverConfig dm = config(Algorithm::CD_DIMINISH, seed);
        dm.epsilon = 1e-4;
        dm.max_iter = 100000;
        const auto rd = solve(Y, dm);
        if (!rd.converged) {
            found = true;
            detail = "seed " + std::to_string(seed) + ": CD " + std::to_string(rc.iterations) +
                     " iterations, diminishing eps " + fmt(rd.final_eps) + " after 1e5";
        }
    }
    if (!found)
        detail = "no small instance (seeds 1-10) where CD reaches 1e-4 in < 200 iterations; fewest was " +
                 std::to_string(best_cd);
    return {found, detail};
}

Outcome scaling_sanity()
{
    const auto t0 = Clock::now();
    const Index n = 20;
    std::vector<double> ms{1000, 4000, 16000}, per_iter;
    bool ok = true;
    for (double m : ms) {
        const PointSet Y = lift(gen_sample(n, static_cast<Index>(m), 5));
        auto timed = [&](Index iters) {
            SolverConfig c = config(Algorithm::CD_CONST, 5);
            c.epsilon = 1e-15;
            c.max_iter = iters;
            double best = 1e300;
            for (int rep = 0; rep < 3; ++rep) {
                const auto r = solve(Y, c);
                ok = ok && !r.converged;
                best = std::min(best, r.wall_time);
            }
            return best;
        };
        per_iter.push_back((timed(1200) - timed(200)) / 1000.0);
    }
    // Least-squares slope of log(time per iteration) against log(m).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const double x = std::log(ms[i]), y = std::log(per_iter[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double k = static_cast<double>(ms.size());
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double t = seconds_since(t0);
    return {ok && slope < 1.5 && t < 120.0,
            "exponent " + fmt(slope) + " (per-iteration " + fmt(per_iter[0] * 1e6) + " / " +
                fmt(per_iter[1] * 1e6) + " / " + fmt(per_iter[2] * 1e6) + " us), " + fmt(t) + " s"};
}

Outcome stress_mode()
{
    const PointSet Y = lift(gen_sample(100, 30000, 1));
    std::string detail;
    bool pass = true;
    for (Algorithm a : {Algorithm::CD_CONST, Algorithm::WA}) {
        SolverConfig c = config(a, 1);
        c.max_iter = 10000;
        const auto r = solve(Y, c);
        pass = pass && r.converged;
        detail += std::string(to_string(a)) + ": " + std::to_string(r.iterations) + " iterations, eps " +
                  fmt(r.final_eps) + ", " + fmt(r.wall_time) + " s; ";
    }
    return {pass, detail};
}

} // namespace

int main(int argc, char** argv)
{
    bool stress = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--stress")
            stress = true;

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "analytic fixtures", analytic_fixtures},
        {2, "cross-solver uniqueness", cross_solver_uniqueness},
        {3, "small regime iterations", [] { return regime_iterations(small_regime(), 1380, 1254, 30.0); }},
        {4, "moderate regime iterations", [] { return regime_iterations(moderate_regime(), 2929, 2686, 180.0); }},
        {5, "per-step decrement bounds", decrement_bound_suite},
        {6, "decrement slack grids", slack_grid_suite},
        {7, "decrement curve shape", delta_curves},
        {8, "linear-algebra oracles", linalg_oracles},
        {9, "randomized coordinate descent stalls", rcd_inferiority},
        {10, "diminishing stepsize degradation", diminishing_degradation},
        {11, "per-iteration scaling", scaling_sanity},
        {12, "stress regime", stress_mode},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (c.id == 12 && !stress) {
            std::printf("SKIP %2d %s: opt-in, run with --stress\n", c.id, c.name);
            continue;
        }
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
