#include "pqpcp/synth.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "pqpcp/error.hpp"

namespace pqpcp {

void SyntheticSpec::validate() const {
    if (n == 0) throw InvariantError("n must be positive");
    if (r == 0 || r > n) throw InvariantError("rank r must lie in [1, n]");
    if (!(rho_s > 0.0 && rho_s < 1.0)) throw InvariantError("rho_s must lie in (0, 1)");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw InvariantError("noise sigma must be nonnegative");
    if (!(sparse_low < sparse_high)) throw InvariantError("sparse interval must satisfy low < high");
}

SyntheticProblem generate(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n;
    std::mt19937_64 engine(spec.seed);
    const DenseMatrix u = randn_matrix(n, spec.r, engine);
    const DenseMatrix v = randn_matrix(n, spec.r, engine);
    DenseMatrix l = matmul(u, v.transpose());

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> value(spec.sparse_low, spec.sparse_high);
    std::vector<double> s(n * n, 0.0);
    for (double& entry : s) {
        if (unit(engine) < spec.rho_s) {
            do {
                entry = value(engine);
            } while (entry == 0.0);
        }
    }
    std::vector<double> xi(n * n, 0.0);
    if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> normal(0.0, spec.noise_sigma);
        for (double& e : xi) e = normal(engine);
    }
    DenseMatrix s_true(n, n, std::move(s));
    DenseMatrix noise(n, n, std::move(xi));
    DenseMatrix x = l + s_true + noise;
    return SyntheticProblem{std::move(x), std::move(l), std::move(s_true), std::move(noise), spec};
}

RecoveryMetrics evaluate(const DenseMatrix& l_star, const DenseMatrix& s_star, const SyntheticProblem& truth) {
    if (!l_star.same_shape(truth.l_true) || !s_star.same_shape(truth.s_true))
        throw DimensionError("recovered matrices do not match the ground-truth shape");
    RecoveryMetrics m;
    const double nl = frob_norm(truth.l_true);
    const double ns = frob_norm(truth.s_true);
    const double dl = frob_distance(l_star, truth.l_true);
    const double ds = frob_distance(s_star, truth.s_true);
    m.rse_l_absolute = !(nl > 0.0);
    m.rse_s_absolute = !(ns > 0.0);
    m.rse_l = m.rse_l_absolute ? dl : dl / nl;
    m.rse_s = m.rse_s_absolute ? ds : ds / ns;
    m.rank_recovered = numerical_rank(l_star);
    m.sparsity_count = sparsity_count(s_star);

    const auto rec = s_star.data();
    const auto ref = truth.s_true.data();
    std::size_t agree = 0;
    for (std::size_t i = 0; i < rec.size(); ++i)
        agree += (std::abs(rec[i]) > kSparsityTolerance) == (std::abs(ref[i]) > kSparsityTolerance);
    m.support_accuracy = static_cast<double>(agree) / static_cast<double>(rec.size());
    return m;
}

RecoveryMetrics evaluate(const SolverResult& result, const SyntheticProblem& truth) {
    return evaluate(result.l_star, result.s_star, truth);
}

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "rank") return SweepAxis::rank;
    if (name == "size") return SweepAxis::size;
    if (name == "noise") return SweepAxis::noise;
    if (name == "pq") return SweepAxis::pq;
    throw ParseError("unknown sweep axis '" + std::string(name) + "' (expected rank, size, noise or pq)");
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::rank: return "rank";
    case SweepAxis::size: return "size";
    case SweepAxis::noise: return "noise";
    case SweepAxis::pq: return "pq";
    }
    return "unknown";
}

namespace {

template <class Field>
double mean_of(const std::vector<TrialOutcome>& trials, Field field) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& t : trials) {
        if (!t.ok) continue;
        total += field(t);
        ++count;
    }
    return count ? total / static_cast<double>(count) : std::nan("");
}

template <class Field>
double std_of(const std::vector<TrialOutcome>& trials, Field field) {
    const double mean = mean_of(trials, field);
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& t : trials) {
        if (!t.ok) continue;
        const double d = field(t) - mean;
        total += d * d;
        ++count;
    }
    // Population standard deviation over the successful trials.
    return count ? std::sqrt(total / static_cast<double>(count)) : std::nan("");
}

std::size_t to_size(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v)) throw InvariantError(std::string(what) + " values must be positive integers");
    return static_cast<std::size_t>(v);
}

struct TrialJob {
    SyntheticSpec spec;
    SolverConfig cfg;
};

TrialJob make_job(SweepAxis axis, double value, const SyntheticSpec& base, const SolverConfig& cfg, int trial) {
    TrialJob job{base, cfg};
    job.spec.seed = base.seed + static_cast<std::uint64_t>(trial);
    switch (axis) {
    case SweepAxis::rank: job.spec.r = to_size(value, "rank"); break;
    case SweepAxis::size: job.spec.n = to_size(value, "size"); break;
    case SweepAxis::noise: job.spec.noise_sigma = value; break;
    case SweepAxis::pq: job.cfg.p = value; job.cfg.q = value; break;
    }
    return job;
}

TrialOutcome run_trial(const TrialJob& job) {
    TrialOutcome out;
    out.seed = job.spec.seed;
    try {
        const SyntheticProblem problem = generate(job.spec);
        const auto start = std::chrono::steady_clock::now();
        const SolverResult result = solve(problem.x_observed, job.cfg);
        out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.metrics = evaluate(result, problem);
        out.iters_used = result.iters_used;
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

} // namespace

std::size_t SweepRow::successful() const {
    std::size_t k = 0;
    for (const auto& t : trials) k += t.ok;
    return k;
}

double SweepRow::rse_l_mean() const { return mean_of(trials, [](const TrialOutcome& t) { return t.metrics.rse_l; }); }
double SweepRow::rse_l_std() const { return std_of(trials, [](const TrialOutcome& t) { return t.metrics.rse_l; }); }
double SweepRow::rse_s_mean() const { return mean_of(trials, [](const TrialOutcome& t) { return t.metrics.rse_s; }); }
double SweepRow::rse_s_std() const { return std_of(trials, [](const TrialOutcome& t) { return t.metrics.rse_s; }); }
double SweepRow::rank_mean() const {
    return mean_of(trials, [](const TrialOutcome& t) { return static_cast<double>(t.metrics.rank_recovered); });
}
double SweepRow::sparsity_mean() const {
    return mean_of(trials, [](const TrialOutcome& t) { return static_cast<double>(t.metrics.sparsity_count); });
}
double SweepRow::support_acc_mean() const {
    return mean_of(trials, [](const TrialOutcome& t) { return t.metrics.support_accuracy; });
}
double SweepRow::wall_ms_mean() const { return mean_of(trials, [](const TrialOutcome& t) { return t.wall_ms; }); }

std::vector<SweepRow> run_sweep(SweepAxis axis, std::span<const double> values, const SyntheticSpec& base,
                                const SolverConfig& cfg, int trials, unsigned threads) {
    if (values.empty()) throw InvariantError("sweep needs at least one axis value");
    if (trials < 1) throw InvariantError("sweep needs at least one trial");
    cfg.validate();

    std::vector<TrialJob> jobs;
    for (double v : values)
        for (int t = 0; t < trials; ++t) jobs.push_back(make_job(axis, v, base, cfg, t));
    // Reject bad axis values before any solving starts.
    for (const auto& job : jobs) {
        job.spec.validate();
        job.cfg.validate();
    }

    std::vector<TrialOutcome> outcomes(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < jobs.size(); i = next++) outcomes[i] = run_trial(jobs[i]);
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    }

    std::vector<SweepRow> rows;
    const auto per = static_cast<std::size_t>(trials);
    for (std::size_t k = 0; k < values.size(); ++k) {
        SweepRow row;
        row.axis_value = values[k];
        row.trials.assign(outcomes.begin() + static_cast<std::ptrdiff_t>(k * per),
                          outcomes.begin() + static_cast<std::ptrdiff_t>((k + 1) * per));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, bool include_timing) {
    out << "axis_value,trial_count,rse_l_mean,rse_l_std,rse_s_mean,rse_s_std,rank_mean,sparsity_mean,"
           "support_acc_mean,wall_ms_mean\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (const auto& row : rows) {
        num(row.axis_value);
        out << ',' << row.successful() << ',';
        num(row.rse_l_mean());
        out << ',';
        num(row.rse_l_std());
        out << ',';
        num(row.rse_s_mean());
        out << ',';
        num(row.rse_s_std());
        out << ',';
        num(row.rank_mean());
        out << ',';
        num(row.sparsity_mean());
        out << ',';
        num(row.support_acc_mean());
        out << ',';
        num(include_timing ? row.wall_ms_mean() : 0.0);
        out << '\n';
    }
}

} // namespace pqpcp
