#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pqpcp/pqpcp.hpp"

namespace pqpcp::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Raised for bad flags, missing files and malformed inputs.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverFlags {
    std::optional<double> p, q, lambda1, lambda2, mu1, mu2, eps0, eps_decay, tol;
    std::optional<int> max_iters, warm_start_iters;
    std::string config_path;
    std::uint64_t seed = 0;

    void attach(CLI::App& app) {
        app.add_option("--p", p, "Schatten-p exponent in (0, 1]");
        app.add_option("--q", q, "l_q exponent in (0, 1]");
        app.add_option("--lambda1", lambda1, "low-rank penalty weight");
        app.add_option("--lambda2", lambda2, "sparse penalty weight (default lambda1/sqrt(max(m,n)))");
        app.add_option("--mu1", mu1, "proximal weight of the L step (> 1)");
        app.add_option("--mu2", mu2, "proximal weight of the S step (> 1/2)");
        app.add_option("--eps0", eps0, "initial smoothing epsilon");
        app.add_option("--eps-decay", eps_decay, "epsilon divisor applied after each iteration (> 1)");
        app.add_option("--tol", tol, "relative step tolerance");
        app.add_option("--max-iters", max_iters, "iteration cap of the reweighted loop");
        app.add_option("--warm-start-iters", warm_start_iters, "convex warm-start iterations (0 disables)");
        app.add_option("--seed", seed, "random seed");
        app.add_option("--config", config_path, "flat 'key = number' config file");
    }

    SolverConfig resolve() const {
        SolverConfig cfg;
        if (!config_path.empty()) {
            if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
            cfg = load_config(config_path, cfg);
        }
        if (p) cfg.p = *p;
        if (q) cfg.q = *q;
        if (lambda1) cfg.lambda1 = *lambda1;
        if (lambda2) cfg.lambda2 = *lambda2;
        if (mu1) cfg.mu1 = *mu1;
        if (mu2) cfg.mu2 = *mu2;
        if (eps0) cfg.epsilon0 = *eps0;
        if (eps_decay) cfg.epsilon_decay = *eps_decay;
        if (tol) cfg.rel_tol = *tol;
        if (max_iters) cfg.max_iters = *max_iters;
        if (warm_start_iters) cfg.warm_start_iters = *warm_start_iters;
        if (cfg.epsilon_floor > cfg.epsilon0) cfg.epsilon_floor = cfg.epsilon0;
        try {
            cfg.validate();
        } catch (const InvariantError& e) {
            throw UsageError(std::string("invalid solver configuration: ") + e.what());
        }
        return cfg;
    }
};

void require_input(const std::string& path, const char* flag) {
    if (!fs::is_regular_file(path)) throw UsageError(std::string(flag) + ": input file not found: " + path);
}

void require_output(const std::string& path, const char* flag) {
    if (path.empty()) return;
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent))
        throw UsageError(std::string(flag) + ": output directory does not exist: " + parent.string());
}

/// Writes through a sibling temporary file and renames it into place.
void write_atomic(const fs::path& path, const std::function<void(const fs::path&)>& writer) {
    // Keep the extension so format dispatch on the temporary path still works.
    fs::path tmp = path;
    tmp.replace_filename(path.stem().string() + ".tmp" + path.extension().string());
    try {
        writer(tmp);
        fs::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    write_atomic(path, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot write " + path.string());
        out << text;
        if (!out) throw UsageError("write failed for " + path.string());
    });
}

ordered_json record_json(const IterationRecord& r) {
    return ordered_json{{"iter", r.iter},
                        {"epsilon", r.epsilon},
                        {"start_objective", r.start_objective},
                        {"relaxed_objective", r.relaxed_objective},
                        {"l_subobjective", r.l_subobjective},
                        {"s_subobjective", r.s_subobjective},
                        {"rank_estimate", r.rank_estimate},
                        {"sparsity_count", r.sparsity_count},
                        {"step_delta", r.step_delta}};
}

void append_trace(std::string& text, const SolverResult& result, std::optional<std::size_t> channel) {
    for (const auto& rec : result.trace) {
        ordered_json line = record_json(rec);
        if (channel) line["channel"] = *channel;
        text += line.dump();
        text += '\n';
    }
}

ordered_json result_summary(const SolverResult& result) {
    return ordered_json{{"iters_used", result.iters_used},
                        {"warm_start_iters", result.warm_start_iters},
                        {"converged", result.converged},
                        {"rank", numerical_rank(result.l_star)},
                        {"sparsity_count", sparsity_count(result.s_star)}};
}

// "fraction,sigma[,seed=N]"
NoiseSpec parse_corrupt_spec(const std::string& text, std::uint64_t default_seed) {
    NoiseSpec spec;
    spec.seed = default_seed;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
    if (parts.size() < 2 || parts.size() > 3)
        throw UsageError("--corrupt expects 'fraction,sigma[,seed=N]', got '" + text + "'");
    try {
        std::size_t used = 0;
        spec.pixel_fraction = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("fraction");
        spec.sigma = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("sigma");
        if (parts.size() == 3) {
            if (parts[2].rfind("seed=", 0) != 0) throw std::invalid_argument("seed");
            const std::string digits = parts[2].substr(5);
            spec.seed = std::stoull(digits, &used);
            if (used != digits.size()) throw std::invalid_argument("seed");
        }
    } catch (const std::logic_error&) {
        throw UsageError("--corrupt: malformed value '" + text + "'");
    }
    try {
        spec.validate();
    } catch (const InvariantError& e) {
        throw UsageError(std::string("--corrupt: ") + e.what());
    }
    return spec;
}

unsigned thread_budget(std::optional<unsigned> requested) {
    unsigned threads = requested.value_or(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("PQPCP_THREADS")) {
        try {
            const unsigned long cap = std::stoul(env);
            if (cap >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
        } catch (const std::logic_error&) {
            throw UsageError(std::string("PQPCP_THREADS is not a positive integer: ") + env);
        }
    }
    return std::max(1u, threads);
}

struct DecomposeArgs {
    std::string in, out_l, out_s, trace;
};

int run_decompose(const DecomposeArgs& args, const SolverFlags& flags, std::ostream& out) {
    require_input(args.in, "--in");
    require_output(args.out_l, "--out-l");
    require_output(args.out_s, "--out-s");
    require_output(args.trace, "--trace");
    const SolverConfig cfg = flags.resolve();
    DenseMatrix x = [&]() {
        try {
            return load_matrix(args.in);
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        }
    }();

    const SolverResult result = solve(x, cfg);
    write_atomic(args.out_l, [&](const fs::path& tmp) { save_matrix(tmp, result.l_star); });
    write_atomic(args.out_s, [&](const fs::path& tmp) { save_matrix(tmp, result.s_star); });
    if (!args.trace.empty()) {
        std::string text;
        append_trace(text, result, std::nullopt);
        write_text_atomic(args.trace, text);
    }
    out << result_summary(result).dump() << '\n';
    return kOk;
}

struct DenoiseArgs {
    std::string in, out, out_corrupted, reference, report, trace, corrupt;
    bool pre_corrupted = false;
};

int run_denoise(const DenoiseArgs& args, const SolverFlags& flags, std::ostream& out) {
    require_input(args.in, "--in");
    if (!args.reference.empty()) require_input(args.reference, "--reference");
    require_output(args.out, "--out");
    require_output(args.out_corrupted, "--out-corrupted");
    require_output(args.report, "--report");
    require_output(args.trace, "--trace");
    if (args.pre_corrupted && !args.corrupt.empty())
        throw UsageError("--corrupt and --pre-corrupted are mutually exclusive");
    const SolverConfig cfg = flags.resolve();
    std::optional<NoiseSpec> noise;
    if (!args.corrupt.empty()) noise = parse_corrupt_spec(args.corrupt, flags.seed);

    auto load = [](const std::string& path) {
        try {
            return load_image(path);
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        }
    };
    const ImagePlane input = load(args.in);
    std::optional<ImagePlane> clean;
    if (noise) clean = input;
    else if (!args.reference.empty()) clean = load(args.reference);
    if (clean && !clean->same_layout(input)) throw UsageError("--reference does not match the input image layout");
    const ImagePlane noisy = noise ? corrupt(input, *noise) : input;

    const DenoiseResult result = denoise(noisy, cfg);

    write_atomic(args.out, [&](const fs::path& tmp) { save_image(tmp, result.recovered); });
    if (!args.out_corrupted.empty())
        write_atomic(args.out_corrupted, [&](const fs::path& tmp) { save_image(tmp, noisy); });
    if (!args.trace.empty()) {
        std::string text;
        for (std::size_t c = 0; c < result.channel_results.size(); ++c)
            append_trace(text, result.channel_results[c], c);
        write_text_atomic(args.trace, text);
    }

    ordered_json report;
    report["width"] = input.width();
    report["height"] = input.height();
    report["channels"] = input.channel_count();
    if (noise) {
        report["corruption"] = {{"pixel_fraction", noise->pixel_fraction}, {"sigma", noise->sigma}, {"seed", noise->seed}};
    }
    if (clean) {
        // PSNR of identical images is +infinity, which JSON encodes as null.
        report["psnr_corrupted"] = psnr(*clean, noisy);
        report["psnr_recovered"] = psnr(*clean, result.recovered);
        report["rse_corrupted"] = image_rse(*clean, noisy);
        report["rse"] = image_rse(*clean, result.recovered);
    }
    ordered_json channels = ordered_json::array();
    for (const auto& r : result.channel_results) channels.push_back(result_summary(r));
    report["solver"] = channels;
    const std::string text = report.dump(2) + "\n";
    if (!args.report.empty()) write_text_atomic(args.report, text);
    out << text;
    return kOk;
}

struct BenchArgs {
    std::string axis, out;
    std::vector<double> values;
    std::size_t n = 200, r = 10;
    double rho = 0.2, sigma = 0.01, sparse_low = -5.0, sparse_high = 5.0;
    int trials = 10;
    std::optional<unsigned> threads;
    bool no_timing = false;
};

int run_bench(const BenchArgs& args, const SolverFlags& flags, std::ostream& out) {
    require_output(args.out, "--out");
    const SolverConfig cfg = flags.resolve();
    SweepAxis axis{};
    try {
        axis = parse_sweep_axis(args.axis);
    } catch (const InvariantError& e) {
        throw UsageError(std::string("--axis: ") + e.what());
    }
    SyntheticSpec base;
    base.n = args.n;
    base.r = args.r;
    base.rho_s = args.rho;
    base.noise_sigma = args.sigma;
    base.sparse_low = args.sparse_low;
    base.sparse_high = args.sparse_high;
    base.seed = flags.seed;

    std::vector<SweepRow> rows;
    try {
        rows = run_sweep(axis, args.values, base, cfg, args.trials, thread_budget(args.threads));
    } catch (const InvariantError& e) {
        throw UsageError(e.what());
    }
    std::ostringstream csv;
    write_sweep_csv(csv, rows, !args.no_timing);
    write_text_atomic(args.out, csv.str());

    bool any_failed = false;
    for (const auto& row : rows) {
        for (const auto& t : row.trials) {
            if (t.ok) continue;
            any_failed = true;
            out << "trial failed (axis value " << row.axis_value << ", seed " << t.seed << "): " << t.error << '\n';
        }
    }
    out << "wrote " << rows.size() << " rows to " << args.out << '\n';
    return any_failed ? kNumericFailure : kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low-rank plus sparse decomposition with Schatten-p / l_q penalties"};
    app.name("pqpcp");
    app.require_subcommand(1);

    SolverFlags decompose_flags, denoise_flags, bench_flags;

    DecomposeArgs dargs;
    CLI::App* decompose = app.add_subcommand("decompose", "split a matrix file into low-rank and sparse parts");
    decompose->add_option("--in", dargs.in, "input matrix (.csv or .bin)")->required();
    decompose->add_option("--out-l", dargs.out_l, "output low-rank matrix")->required();
    decompose->add_option("--out-s", dargs.out_s, "output sparse matrix")->required();
    decompose->add_option("--trace", dargs.trace, "per-iteration JSON lines");
    decompose_flags.attach(*decompose);

    DenoiseArgs nargs;
    CLI::App* denoise_cmd = app.add_subcommand("denoise", "denoise a PGM/PPM image channel by channel");
    denoise_cmd->add_option("--in", nargs.in, "input image (P5 or P6)")->required();
    denoise_cmd->add_option("--out", nargs.out, "recovered image")->required();
    denoise_cmd->add_option("--corrupt", nargs.corrupt, "inject noise first: fraction,sigma[,seed=N]");
    denoise_cmd->add_flag("--pre-corrupted", nargs.pre_corrupted, "input is already noisy");
    denoise_cmd->add_option("--reference", nargs.reference, "clean image for metrics with --pre-corrupted");
    denoise_cmd->add_option("--out-corrupted", nargs.out_corrupted, "write the corrupted image");
    denoise_cmd->add_option("--report", nargs.report, "JSON report path");
    denoise_cmd->add_option("--trace", nargs.trace, "per-iteration JSON lines");
    denoise_flags.attach(*denoise_cmd);

    BenchArgs bargs;
    CLI::App* bench = app.add_subcommand("bench", "synthetic recovery sweep");
    bench->add_option("--axis", bargs.axis, "rank | size | noise | pq")->required();
    bench->add_option("--values", bargs.values, "comma-separated axis values")->required()->delimiter(',');
    bench->add_option("--n", bargs.n, "matrix side")->capture_default_str();
    bench->add_option("--r", bargs.r, "ground-truth rank")->capture_default_str();
    bench->add_option("--rho", bargs.rho, "sparse fraction")->capture_default_str();
    bench->add_option("--sigma", bargs.sigma, "noise standard deviation")->capture_default_str();
    bench->add_option("--sparse-low", bargs.sparse_low, "lower bound of sparse values")->capture_default_str();
    bench->add_option("--sparse-high", bargs.sparse_high, "upper bound of sparse values")->capture_default_str();
    bench->add_option("--trials", bargs.trials, "trials per axis value")->capture_default_str();
    bench->add_option("--threads", bargs.threads, "worker threads (capped by PQPCP_THREADS)");
    bench->add_flag("--no-timing", bargs.no_timing, "write 0 in wall_ms_mean for reproducible output");
    bench->add_option("-o,--out", bargs.out, "output CSV")->required();
    bench_flags.attach(*bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*decompose) return run_decompose(dargs, decompose_flags, out);
        if (*denoise_cmd) return run_denoise(nargs, denoise_flags, out);
        return run_bench(bargs, bench_flags, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
}

} // namespace pqpcp::cli
