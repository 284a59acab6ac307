#ifndef MVEE_HARNESS_HPP
#define MVEE_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mvee/decrement.hpp"
#include "mvee/errors.hpp"
#include "mvee/point_set.hpp"
#include "mvee/problem.hpp"
#include "mvee/solvers.hpp"

namespace mvee {

// ---------------------------------------------------------------------------
// Instance generation

struct GeneratedSample {
    PointSet points;
    /// Points before the linear map and shift, one per column.
    Matrix cloud;
    Matrix map;
    Vector shift;
    double condition = 1.0;
};

/// Volumetric point cloud pushed through an ill-conditioned affine map.
///
/// Each raw point is a standard Gaussian vector scaled by U^{1/n}, U ~ U(0,1),
/// so the cloud fills a region instead of concentrating near a sphere. The map
/// is Q1 diag(s) Q2^T with random orthogonal Q1, Q2, s_1 = 1, s_n = cond and
/// cond log-uniform on [1, 100]; the shift is uniform on [-5, 5]^n.
inline GeneratedSample gen_sample_detailed(Index n, Index m, std::uint64_t seed)
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "dimension must be at least 1");
    if (m < n + 1)
        throw Error(ErrorCode::TooFewPoints, "need m >= n + 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    GeneratedSample s;
    s.cloud.resize(n, m);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Index j = 0; j < m; ++j) {
        for (Index k = 0; k < n; ++k)
            s.cloud(k, j) = normal(rng);
        s.cloud.col(j) *= std::pow(unit(rng), inv_n);
    }

    auto random_orthogonal = [&] {
        Matrix G(n, n);
        for (Index c = 0; c < n; ++c)
            for (Index r = 0; r < n; ++r)
                G(r, c) = normal(rng);
        Eigen::HouseholderQR<Matrix> qr(G);
        return Matrix(qr.householderQ());
    };
    const Matrix Q1 = random_orthogonal();
    const Matrix Q2 = random_orthogonal();

    const double log_cond = unit(rng) * std::log(100.0);
    s.condition = std::exp(log_cond);
    Vector sigma(n);
    for (Index k = 0; k < n; ++k)
        sigma[k] = std::exp(unit(rng) * log_cond);
    sigma[0] = 1.0;
    if (n > 1)
        sigma[n - 1] = s.condition;

    s.map = Q1 * sigma.asDiagonal() * Q2.transpose();
    s.shift.resize(n);
    for (Index k = 0; k < n; ++k)
        s.shift[k] = 10.0 * unit(rng) - 5.0;

    Matrix P = s.map * s.cloud;
    P.colwise() += s.shift;
    s.points = PointSet(std::move(P), false);
    return s;
}

inline PointSet gen_sample(Index n, Index m, std::uint64_t seed)
{
    return gen_sample_detailed(n, m, seed).points;
}

// ---------------------------------------------------------------------------
// Benchmark plans

struct Regime {
    std::string label;
    Index n = 0;
    Index m = 0;
    Index repetitions = 1;
};

struct BenchmarkPlan {
    std::vector<Regime> regimes;
    std::vector<SolverConfig> algorithms;
    std::uint64_t seed = 1;
    std::string output_dir;
    bool write_traces = true;

    void validate() const
    {
        if (regimes.empty())
            throw Error(ErrorCode::InvalidArgument, "plan has no regimes");
        if (algorithms.empty())
            throw Error(ErrorCode::InvalidArgument, "plan has no algorithms");
        for (const auto& r : regimes) {
            if (r.repetitions < 1)
                throw Error(ErrorCode::InvalidArgument, "regime '" + r.label + "' needs repetitions >= 1");
            if (r.n < 1 || r.m < r.n + 1)
                throw Error(ErrorCode::InvalidArgument, "regime '" + r.label + "' needs m >= n + 1");
        }
        for (const auto& a : algorithms)
            a.validate();
    }
};

inline Regime small_regime() { return {"small", 10, 500, 10}; }
inline Regime moderate_regime() { return {"moderate", 30, 1800, 10}; }
inline Regime large_regime() { return {"large", 100, 30000, 10}; }
inline Regime huge_regime() { return {"huge", 500, 500000, 10}; }

/// Small and moderate regimes, CD and WA, ten repetitions each.
inline BenchmarkPlan default_plan()
{
    BenchmarkPlan plan;
    plan.regimes = {small_regime(), moderate_regime()};
    SolverConfig cd;
    cd.algorithm = Algorithm::CD_CONST;
    cd.record_trace = false;
    SolverConfig wa = cd;
    wa.algorithm = Algorithm::WA;
    plan.algorithms = {cd, wa};
    return plan;
}

/// Parses the plan text format:
///
///     # comment
///     seed = 1
///     epsilon = 1e-7
///     max_iter = 100000
///     init = kumar-yildirim
///     traces = true
///     algorithms = cd, wa
///     regime small 10 500 10
///
/// Scalar keys apply to every algorithm listed in the same file.
inline BenchmarkPlan parse_plan(std::istream& in)
{
    BenchmarkPlan plan;
    SolverConfig base;
    base.record_trace = false;
    std::vector<Algorithm> algorithms;
    std::string line;
    std::size_t lineno = 0;

    auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::ParseError, "plan line " + std::to_string(lineno) + ": " + msg);
    };
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    auto to_number = [&](const std::string& v) {
        std::size_t pos = 0;
        double d = 0.0;
        try {
            d = std::stod(v, &pos);
        } catch (const std::exception&) {
            fail("not a number: '" + v + "'");
        }
        if (pos != v.size())
            fail("not a number: '" + v + "'");
        return d;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;

        if (line.rfind("regime", 0) == 0 && line.find('=') == std::string::npos) {
            std::istringstream ss(line.substr(6));
            Regime r;
            double n = 0, m = 0, reps = 0;
            std::string extra;
            if (!(ss >> r.label >> n >> m >> reps) || (ss >> extra))
                fail("expected 'regime <label> <n> <m> <repetitions>'");
            r.n = static_cast<Index>(n);
            r.m = static_cast<Index>(m);
            r.repetitions = static_cast<Index>(reps);
            if (r.n < 1 || r.m < r.n + 1 || r.repetitions < 1)
                fail("regime needs n >= 1, m >= n + 1, repetitions >= 1");
            plan.regimes.push_back(r);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("expected 'key = value' or 'regime ...'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "seed") {
            plan.seed = static_cast<std::uint64_t>(to_number(value));
        } else if (key == "epsilon") {
            base.epsilon = to_number(value);
        } else if (key == "max_iter") {
            base.max_iter = static_cast<Index>(to_number(value));
        } else if (key == "refactor_period") {
            base.refactor_period = static_cast<Index>(to_number(value));
        } else if (key == "backtrack_alpha") {
            base.backtrack_alpha = to_number(value);
        } else if (key == "backtrack_beta") {
            base.backtrack_beta = to_number(value);
        } else if (key == "init") {
            const auto init = parse_init(value);
            if (!init)
                fail("unknown init scheme '" + value + "'");
            base.init = *init;
        } else if (key == "traces") {
            if (value != "true" && value != "false")
                fail("traces must be true or false");
            plan.write_traces = value == "true";
        } else if (key == "algorithms" || key == "algorithm") {
            std::istringstream ss(value);
            std::string name;
            while (std::getline(ss, name, ',')) {
                name = trim(name);
                const auto a = parse_algorithm(name);
                if (!a)
                    fail("unknown algorithm '" + name + "'");
                algorithms.push_back(*a);
            }
        } else {
            fail("unknown key '" + key + "'");
        }
    }

    for (Algorithm a : algorithms) {
        SolverConfig c = base;
        c.algorithm = a;
        plan.algorithms.push_back(c);
    }
    try {
        plan.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid plan: ") + e.what());
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Running

struct BenchmarkRow {
    std::string regime;
    Index n = 0;
    Index m = 0;
    Algorithm algorithm = Algorithm::CD_CONST;
    Index rep = 0;
    Index iterations = 0;
    double wall_time = 0.0;
    double final_eps = std::numeric_limits<double>::quiet_NaN();
    double final_h = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    bool failed = false;
    std::string error;
};

/// Runs every (regime, repetition, algorithm) triple. Repetition r of a regime
/// uses seed + r for both the instance and the solver, so all algorithms see
/// the same points and the same initial weights. Rows come back ordered by
/// (regime, repetition, algorithm) regardless of `parallelism`.
inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkPlan& plan, unsigned parallelism = 1)
{
    plan.validate();
    struct Task {
        std::size_t regime;
        Index rep;
    };
    std::vector<Task> tasks;
    for (std::size_t r = 0; r < plan.regimes.size(); ++r)
        for (Index rep = 0; rep < plan.regimes[r].repetitions; ++rep)
            tasks.push_back({r, rep});

    const std::size_t per_task = plan.algorithms.size();
    std::vector<BenchmarkRow> rows(tasks.size() * per_task);
    const bool traces = plan.write_traces && !plan.output_dir.empty();
    if (!plan.output_dir.empty())
        std::filesystem::create_directories(plan.output_dir);

    auto run_task = [&](std::size_t t) {
        const Regime& regime = plan.regimes[tasks[t].regime];
        const Index rep = tasks[t].rep;
        const std::uint64_t seed = plan.seed + static_cast<std::uint64_t>(rep);
        std::optional<PointSet> lifted;
        std::string setup_error;
        try {
            lifted = lift(gen_sample(regime.n, regime.m, seed));
        } catch (const std::exception& e) {
            setup_error = e.what();
        }
        for (std::size_t a = 0; a < per_task; ++a) {
            BenchmarkRow& row = rows[t * per_task + a];
            row.regime = regime.label;
            row.n = regime.n;
            row.m = regime.m;
            row.algorithm = plan.algorithms[a].algorithm;
            row.rep = rep;
            if (!lifted) {
                row.failed = true;
                row.error = setup_error;
                continue;
            }
            SolverConfig cfg = plan.algorithms[a];
            cfg.seed = seed;
            cfg.record_trace = cfg.record_trace || traces;
            try {
                const SolveReport rep_out = solve(*lifted, cfg);
                row.iterations = rep_out.iterations;
                row.wall_time = rep_out.wall_time;
                row.final_eps = rep_out.final_eps;
                row.final_h = rep_out.final_h;
                row.converged = rep_out.converged;
                if (traces) {
                    const auto path = std::filesystem::path(plan.output_dir) /
                                      (regime.label + "_" + std::string(to_string(cfg.algorithm)) +
                                       "_" + std::to_string(rep) + ".csv");
                    std::ofstream os(path);
                    write_trace_csv(os, rep_out.trace);
                }
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(tasks.size())));
    if (workers == 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t)
            run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < tasks.size(); t = next++)
                    run_task(t);
            });
        for (auto& th : pool)
            th.join();
    }
    return rows;
}

struct MeanRow {
    std::string regime;
    Index n = 0;
    Index m = 0;
    Algorithm algorithm = Algorithm::CD_CONST;
    Index runs = 0;
    Index failed = 0;
    Index converged = 0;
    double mean_iterations = 0.0;
    double mean_seconds = 0.0;
    double mean_final_eps = 0.0;
};

/// Arithmetic means per (regime, algorithm) over rows that did not fail,
/// accumulated in row order.
inline std::vector<MeanRow> aggregate_means(const std::vector<BenchmarkRow>& rows)
{
    std::vector<MeanRow> out;
    std::map<std::pair<std::string, Algorithm>, std::size_t> slot;
    for (const auto& r : rows) {
        auto [it, inserted] = slot.try_emplace({r.regime, r.algorithm}, out.size());
        if (inserted)
            out.push_back({r.regime, r.n, r.m, r.algorithm});
        MeanRow& mr = out[it->second];
        if (r.failed) {
            ++mr.failed;
            continue;
        }
        ++mr.runs;
        mr.converged += r.converged ? 1 : 0;
        mr.mean_iterations += static_cast<double>(r.iterations);
        mr.mean_seconds += r.wall_time;
        mr.mean_final_eps += r.final_eps;
    }
    for (auto& mr : out) {
        if (mr.runs > 0) {
            const double k = static_cast<double>(mr.runs);
            mr.mean_iterations /= k;
            mr.mean_seconds /= k;
            mr.mean_final_eps /= k;
        }
    }
    return out;
}

/// regime,n,m,algorithm,rep,iterations,seconds,final_eps,converged
inline void write_rows_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows)
{
    os << "regime,n,m,algorithm,rep,iterations,seconds,final_eps,converged\n";
    os << std::setprecision(10);
    for (const auto& r : rows)
        os << r.regime << ',' << r.n << ',' << r.m << ',' << to_string(r.algorithm) << ',' << r.rep
           << ',' << r.iterations << ',' << r.wall_time << ',' << r.final_eps << ','
           << (r.converged ? 1 : 0) << '\n';
}

inline void write_means_csv(std::ostream& os, const std::vector<MeanRow>& means)
{
    os << "regime,n,m,algorithm,runs,failed,converged,mean_iterations,mean_seconds,mean_final_eps\n";
    os << std::setprecision(10);
    for (const auto& r : means)
        os << r.regime << ',' << r.n << ',' << r.m << ',' << to_string(r.algorithm) << ',' << r.runs
           << ',' << r.failed << ',' << r.converged << ',' << r.mean_iterations << ','
           << r.mean_seconds << ',' << r.mean_final_eps << '\n';
}

/// Writes `benchmark.csv` and `benchmark_means.csv` into `dir`.
inline void write_benchmark_tables(const std::string& dir, const std::vector<BenchmarkRow>& rows)
{
    std::filesystem::create_directories(dir);
    std::ofstream table(std::filesystem::path(dir) / "benchmark.csv");
    write_rows_csv(table, rows);
    std::ofstream means(std::filesystem::path(dir) / "benchmark_means.csv");
    write_means_csv(means, aggregate_means(rows));
    if (!table || !means)
        throw Error(ErrorCode::IoError, "failed writing benchmark tables to '" + dir + "'");
}

// ---------------------------------------------------------------------------
// Decrement curves

/// CSV `n,curve,kappa,delta`: delta_plus on [n, 20n] and delta_minus on
/// (0.01n, n], 500 samples per curve and per n.
inline void emit_decrement_curves(const std::vector<double>& n_values, std::ostream& os)
{
    if (n_values.empty())
        throw Error(ErrorCode::InvalidArgument, "need at least one value of n");
    constexpr int samples = 500;
    os << "n,curve,kappa,delta\n" << std::setprecision(17);
    for (double n : n_values) {
        if (!(n > 0.0))
            throw Error(ErrorCode::InvalidArgument, "n must be positive");
        for (int i = 0; i < samples; ++i) {
            const double kappa = n + (19.0 * n) * i / (samples - 1);
            os << n << ",plus," << kappa << ',' << delta_plus(n, kappa) << '\n';
        }
        for (int i = 1; i <= samples; ++i) {
            const double kappa = 0.01 * n + (0.99 * n) * i / samples;
            os << n << ",minus," << kappa << ',' << delta_minus(n, kappa) << '\n';
        }
    }
}

inline void emit_decrement_curves(const std::vector<double>& n_values, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    emit_decrement_curves(n_values, os);
}

} // namespace mvee

#endif // MVEE_HARNESS_HPP
