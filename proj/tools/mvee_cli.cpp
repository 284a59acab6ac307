#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mvee/harness.hpp"
#include "mvee/io.hpp"
#include "mvee/mvee.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

struct SolveArgs {
    std::string input;
    std::string algorithm = "cd";
    double epsilon = 1e-7;
    long long max_iter = 100000;
    std::uint64_t seed = 0;
    bool symmetric = false;
    std::string init = "kumar-yildirim";
    std::string trace_out;
    std::string json_out;
};

struct GenArgs {
    long long n = 0;
    long long m = 0;
    std::uint64_t seed = 0;
    std::string output;
};

struct BenchArgs {
    std::string plan;
    std::string output_dir = "bench_out";
    unsigned parallelism = 1;
    bool include_huge = false;
};

struct CurvesArgs {
    std::vector<double> n_values{1.0, 2.0, 3.0};
    std::string output;
};

int fail(const std::string& msg)
{
    std::cerr << "error: " << msg << '\n';
    return kExitInput;
}

int run_solve(const SolveArgs& a)
{
    mvee::SolverConfig cfg;
    const auto alg = mvee::parse_algorithm(a.algorithm);
    if (!alg)
        return fail("unknown algorithm '" + a.algorithm + "'");
    const auto init = mvee::parse_init(a.init);
    if (!init)
        return fail("unknown init scheme '" + a.init + "'");
    cfg.algorithm = *alg;
    cfg.init = *init;
    cfg.epsilon = a.epsilon;
    cfg.max_iter = static_cast<mvee::Index>(a.max_iter);
    cfg.seed = a.seed;
    cfg.record_trace = !a.trace_out.empty();
    cfg.check_decrements = false;

    mvee::EnclosingResult result;
    try {
        cfg.validate();
        const mvee::PointSet X = mvee::read_points(a.input, a.symmetric);
        result = mvee::enclose(X, cfg);
    } catch (const std::exception& e) {
        return fail(e.what());
    }

    if (!a.trace_out.empty()) {
        std::ofstream os(a.trace_out);
        if (!os)
            return fail("cannot write '" + a.trace_out + "'");
        mvee::write_trace_csv(os, result.report.trace);
    }

    nlohmann::json j = mvee::ellipsoid_to_json(result.ellipsoid);
    j["converged"] = result.report.converged;
    j["iterations"] = result.report.iterations;
    j["eps"] = result.report.final_eps;
    j["algorithm"] = std::string(mvee::to_string(cfg.algorithm));
    const std::string text = j.dump(2) + "\n";
    if (a.json_out.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(a.json_out);
        if (!(os << text))
            return fail("cannot write '" + a.json_out + "'");
    }
    return result.report.converged ? kExitOk : kExitNotConverged;
}

int run_gen(const GenArgs& a)
{
    if (a.n < 1 || a.m <= a.n)
        return fail("gen needs n >= 1 and m > n");
    try {
        const mvee::PointSet X = mvee::gen_sample(a.n, a.m, a.seed);
        if (a.output.empty()) {
            mvee::write_points(std::cout, X);
        } else {
            std::ofstream os(a.output);
            if (!os)
                return fail("cannot write '" + a.output + "'");
            mvee::write_points(os, X);
        }
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return kExitOk;
}

int run_bench(const BenchArgs& a)
{
    mvee::BenchmarkPlan plan;
    try {
        if (a.plan.empty()) {
            plan = mvee::default_plan();
        } else {
            std::ifstream in(a.plan);
            if (!in)
                return fail("cannot open '" + a.plan + "'");
            plan = mvee::parse_plan(in);
        }
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    if (a.include_huge)
        plan.regimes.push_back(mvee::huge_regime());
    plan.output_dir = a.output_dir;

    std::vector<mvee::BenchmarkRow> rows;
    try {
        rows = mvee::run_benchmark(plan, a.parallelism);
        mvee::write_benchmark_tables(a.output_dir, rows);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (r.failed) {
            ++failed;
            std::cerr << "warning: " << r.regime << " rep " << r.rep << ' '
                      << mvee::to_string(r.algorithm) << ": " << r.error << '\n';
        }
    }
    std::cout << rows.size() << " rows written to " << a.output_dir << " (" << failed << " failed)\n";
    return kExitOk;
}

int run_curves(const CurvesArgs& a)
{
    try {
        if (a.output.empty())
            mvee::emit_decrement_curves(a.n_values, std::cout);
        else
            mvee::emit_decrement_curves(a.n_values, a.output);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Minimum-volume enclosing ellipsoids by coordinate descent and Frank-Wolfe methods"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Compute the enclosing ellipsoid of a point file");
    auto* in_pos = solve->add_option("points", solve_args.input, "Point file, one point per row");
    auto* in_flag = solve->add_option("--input,-i", solve_args.input, "Point file, one point per row");
    in_pos->excludes(in_flag);
    solve->add_option("--algorithm,-a", solve_args.algorithm,
                      "fwk, wa, cd, cd-diminish, cd-backtrack or rcd")
        ->capture_default_str();
    solve->add_option("--epsilon,-e", solve_args.epsilon, "Stopping tolerance")->capture_default_str();
    solve->add_option("--max-iter,--max_iter", solve_args.max_iter, "Iteration cap")->capture_default_str();
    solve->add_option("--seed", solve_args.seed, "Seed for initialization and RCD sampling");
    solve->add_flag("--symmetric", solve_args.symmetric, "Rows x imply -x as well; no lifting");
    solve->add_option("--init", solve_args.init, "kumar-yildirim or khachiyan")->capture_default_str();
    solve->add_option("--trace-out,--trace_out", solve_args.trace_out, "Per-iteration trace CSV");
    solve->add_option("--json-out,--json_out", solve_args.json_out, "Write JSON here instead of stdout");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a random test instance");
    gen->add_option("--n,-n", gen_args.n, "Dimension")->required();
    gen->add_option("--m,-m", gen_args.m, "Number of points")->required();
    gen->add_option("--seed", gen_args.seed, "Generator seed");
    gen->add_option("--output,-o", gen_args.output, "Output file (stdout if omitted)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Run a benchmark plan");
    bench->add_option("--plan,-p", bench_args.plan, "Plan file (built-in small + moderate plan if omitted)");
    bench->add_option("--output-dir,--output_dir,-o", bench_args.output_dir, "Directory for tables and traces")
        ->capture_default_str();
    bench->add_option("--parallelism,-j", bench_args.parallelism, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench->add_flag("--include-huge,--include_huge", bench_args.include_huge,
                    "Append the n=500, m=500000 regime");

    CurvesArgs curves_args;
    auto* curves = app.add_subcommand("curves", "Emit decrement curves for plotting");
    curves->add_option("--n,-n", curves_args.n_values, "Values of n")->capture_default_str();
    curves->add_option("--output,-o", curves_args.output, "Output CSV (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (*solve) {
        if (solve_args.input.empty())
            return fail("solve needs an input file");
        return run_solve(solve_args);
    }
    if (*gen)
        return run_gen(gen_args);
    if (*bench)
        return run_bench(bench_args);
    return run_curves(curves_args);
}
