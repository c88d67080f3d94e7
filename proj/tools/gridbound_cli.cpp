// gridbound: certified interval bounds for security-constrained DC-OPF
// market clearing.
//
// Exit codes:
//   0  success
//   1  unreadable input, schema or validation failure
//   2  islanding contingency present and --skip-islanding not given
//   3  certified infeasibility (upper bound < 0); the report is still emitted
//   4  verification found bound violations

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gridbound/gridbound.hpp"

namespace {

constexpr int kExitInputError = 1;
constexpr int kExitIslanding = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitViolations = 4;

struct CommonFlags {
    unsigned threads = 0;  // 0 = auto
    bool skip_islanding = false;
    bool strict_cascade = false;
    std::string output;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--threads", f.threads, "Worker threads for precompute (0 = auto)");
    cmd->add_flag("--skip-islanding", f.skip_islanding,
                  "Drop islanding contingencies with a warning instead of failing");
    cmd->add_flag("--strict-cascade", f.strict_cascade,
                  "Propagate curve intervals through the ReLU cascade node by node");
    cmd->add_option("--output", f.output, "Write the result to this file instead of stdout");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gridbound::Error("cannot read case file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const CommonFlags& f, const std::string& text) {
    if (f.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(f.output, std::ios::binary);
    if (!out) throw gridbound::Error("cannot write output file: " + f.output);
    out << text;
}

std::string fmt_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

gridbound::GridCase load_case(const std::string& path) {
    std::vector<std::string> warnings;
    gridbound::GridCase c = gridbound::parse_case(read_file(path), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return c;
}

struct Pipeline {
    gridbound::NetworkMatrices nm;
    gridbound::ContingencyOperators ops;
    gridbound::CompiledCurves curves;
    gridbound::ScDcopfGraph graph;
    std::vector<int> skipped_islanding;
};

Pipeline build_pipeline(const gridbound::GridCase& c, const CommonFlags& f) {
    Pipeline p;
    p.nm = gridbound::build_ptdf(c, f.threads);
    if (!c.contingencies.empty()) {
        p.ops = gridbound::precompute(p.nm, c, f.threads,
                                      f.skip_islanding ? &p.skipped_islanding : nullptr);
        for (int id : p.skipped_islanding)
            std::cerr << "warning: skipping islanding contingency on line " << id << "\n";
    }
    p.curves = gridbound::compile_all(c);
    p.graph = gridbound::build_graph(c, p.nm, p.ops, p.curves, f.strict_cascade);
    return p;
}

int run_bound(const std::string& path, const CommonFlags& f) {
    gridbound::GridCase c = load_case(path);
    Pipeline p = build_pipeline(c, f);
    gridbound::BoundReport r =
        gridbound::compute_bounds(p.graph, gridbound::device_box(c), f.threads);
    r.case_id = path;
    nlohmann::ordered_json j = r.to_json();
    if (f.skip_islanding) j["skipped_islanding"] = p.skipped_islanding;
    emit(f, j.dump(2) + "\n");
    return r.infeasible_certificate ? kExitInfeasible : 0;
}

int auto_resolution(int dims) {
    // keeps the tensor grid near 1e5 points
    int res = static_cast<int>(std::floor(std::pow(1e5, 1.0 / std::max(dims, 1))));
    return std::clamp(res, 2, 1001);
}

int run_verify(const std::string& path, const CommonFlags& f, int samples, std::uint64_t seed,
               int grid, bool corrupt) {
    gridbound::GridCase c = load_case(path);
    Pipeline p = build_pipeline(c, f);
    gridbound::BoundReport r =
        gridbound::compute_bounds(p.graph, gridbound::device_box(c), f.threads);

    double checked_upper = r.objective_upper;
    if (corrupt) checked_upper -= 1.0;  // harness self-test: must be caught
    const int violations = gridbound::count_bound_violations(c, samples, seed, r.objective_lower,
                                                             checked_upper);

    nlohmann::ordered_json j{{"case", path},
                             {"samples", samples},
                             {"seed", seed},
                             {"corrupted_upper", corrupt},
                             {"violations", violations},
                             {"lower", r.objective_lower},
                             {"upper", r.objective_upper}};
    const int dims = c.n_gens() + c.n_demands();
    if (dims <= 6) {
        const int res = grid > 0 ? grid : auto_resolution(dims);
        const auto gs = gridbound::grid_search_max(c, res);
        j["oracle_max"] = gs.value;
        j["oracle_grid_resolution"] = res;
        if (gs.value > 0.0)
            j["gap_vs_oracle"] = gridbound::gap(r, gs.value);
        else
            j["gap_vs_oracle"] = nullptr;  // undefined; raw bounds above
    }
    if (f.skip_islanding) j["skipped_islanding"] = p.skipped_islanding;
    emit(f, j.dump(2) + "\n");
    return violations > 0 ? kExitViolations : 0;
}

int run_ptdf(const std::string& path, const CommonFlags& f) {
    gridbound::GridCase c = load_case(path);
    gridbound::NetworkMatrices nm = gridbound::build_ptdf(c, f.threads);
    std::ostringstream csv;
    for (Eigen::Index l = 0; l < nm.Phi.rows(); ++l) {
        for (Eigen::Index b = 0; b < nm.Phi.cols(); ++b) {
            if (b) csv << ',';
            csv << fmt_double(nm.Phi(l, b));
        }
        csv << '\n';
    }
    emit(f, csv.str());
    return 0;
}

int run_gen(int buses, double density, std::uint64_t seed, const CommonFlags& f) {
    emit(f, gridbound::serialize(gridbound::random_case(buses, density, seed)));
    return 0;
}

int run_bench(int buses, double density, int ctg, int repeat, std::uint64_t seed,
              const CommonFlags& f) {
    gridbound::GridCase c = gridbound::random_case(buses, density, seed);
    if (ctg >= 0) {
        if (ctg > static_cast<int>(c.contingencies.size()))
            std::cerr << "warning: only " << c.contingencies.size()
                      << " non-islanding contingencies available, capping --ctg\n";
        c.contingencies.resize(std::min<std::size_t>(ctg, c.contingencies.size()));
    }

    const auto t0 = std::chrono::steady_clock::now();
    CommonFlags bf = f;
    bf.skip_islanding = false;  // generated contingencies never island
    Pipeline p = build_pipeline(c, bf);
    const double setup_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const gridbound::IntervalVec box = gridbound::device_box(c);
    gridbound::BoundReport last = gridbound::compute_bounds(p.graph, box, f.threads);  // warmup
    std::vector<double> samples_s;
    for (int k = 0; k < repeat; ++k) {
        const auto s0 = std::chrono::steady_clock::now();
        last = gridbound::compute_bounds(p.graph, box, f.threads);
        samples_s.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count());
    }
    const double mean =
        std::accumulate(samples_s.begin(), samples_s.end(), 0.0) / samples_s.size();
    nlohmann::ordered_json j{
        {"buses", buses},
        {"lines", c.n_lines()},
        {"contingencies", c.contingencies.size()},
        {"repeat", repeat},
        {"seed", seed},
        {"threads", gridbound::resolve_threads(f.threads)},
        {"setup_s", setup_s},
        {"bound_s",
         {{"min", *std::min_element(samples_s.begin(), samples_s.end())},
          {"mean", mean},
          {"max", *std::max_element(samples_s.begin(), samples_s.end())}}},
        {"samples_s", samples_s},
        {"lower", last.objective_lower},
        {"upper", last.objective_upper}};
    emit(f, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified interval bounds for security-constrained DC-OPF market clearing"};
    app.require_subcommand(1);

    CommonFlags fb, fv, fp, fg, fn;
    std::string bound_path, verify_path, ptdf_path;
    int samples = 10000, grid = 0;
    std::uint64_t verify_seed = 0, gen_seed = 0, bench_seed = 0;
    bool corrupt = false;
    int gen_buses = 0, bench_buses = 0, bench_ctg = -1, bench_repeat = 5;
    double gen_density = 1.5, bench_density = 1.5;

    auto* bound = app.add_subcommand("bound", "Compute certified objective bounds for a case");
    bound->add_option("case", bound_path, "Case file (JSON)")->required();
    add_common(bound, fb);

    auto* verify = app.add_subcommand(
        "verify", "Sample-test the certified bounds against the independent oracle");
    verify->add_option("case", verify_path, "Case file (JSON)")->required();
    verify->add_option("--samples", samples, "Number of uniform samples")
        ->check(CLI::Range(1, 100000000));
    verify->add_option("--seed", verify_seed, "Sampler seed");
    verify->add_option("--grid", grid, "Oracle grid resolution per dimension (0 = auto)");
    verify->add_flag("--self-test-corrupt", corrupt,
                     "Check against (upper - 1) to prove the harness detects bad bounds");
    add_common(verify, fv);

    auto* ptdf = app.add_subcommand("ptdf", "Dump the full zero-padded PTDF as CSV");
    ptdf->add_option("case", ptdf_path, "Case file (JSON)")->required();
    add_common(ptdf, fp);

    auto* gen = app.add_subcommand("gen", "Generate a random connected case");
    gen->add_option("--buses", gen_buses, "Number of buses")->required()->check(CLI::Range(2, 100000));
    gen->add_option("--density", gen_density, "Lines per (buses - 1)");
    gen->add_option("--seed", gen_seed, "Generator seed");
    add_common(gen, fg);

    auto* bench = app.add_subcommand("bench", "Time bound computations on a synthetic case");
    bench->add_option("--buses", bench_buses, "Number of buses")
        ->required()
        ->check(CLI::Range(2, 100000));
    bench->add_option("--ctg", bench_ctg, "Contingency count (default: all non-islanding lines)");
    bench->add_option("--repeat", bench_repeat, "Timed repetitions")->check(CLI::Range(1, 10000));
    bench->add_option("--density", bench_density, "Lines per (buses - 1)");
    bench->add_option("--seed", bench_seed, "Generator seed");
    add_common(bench, fn);

    CLI11_PARSE(app, argc, argv);

    try {
        if (bound->parsed()) return run_bound(bound_path, fb);
        if (verify->parsed())
            return run_verify(verify_path, fv, samples, verify_seed, grid, corrupt);
        if (ptdf->parsed()) return run_ptdf(ptdf_path, fp);
        if (gen->parsed()) return run_gen(gen_buses, gen_density, gen_seed, fg);
        if (bench->parsed())
            return run_bench(bench_buses, bench_density, bench_ctg, bench_repeat, bench_seed, fn);
    } catch (const gridbound::IslandingError& e) {
        std::cerr << "error: " << e.what() << " (use --skip-islanding to drop it)\n";
        return kExitIslanding;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return 0;
}
