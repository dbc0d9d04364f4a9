#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pqpcp/matrix.hpp"
#include "pqpcp/solver.hpp"

namespace pqpcp {

/// Square synthetic instance X = U V^T + S + noise.
struct SyntheticSpec {
    std::size_t n = 200;
    std::size_t r = 10;
    double rho_s = 0.2;        ///< probability that an entry of S is nonzero
    double noise_sigma = 0.01;
    double sparse_low = -5.0;  ///< nonzero sparse values are uniform on [low, high)
    double sparse_high = 5.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticProblem {
    DenseMatrix x_observed;
    DenseMatrix l_true;
    DenseMatrix s_true;
    DenseMatrix noise;
    SyntheticSpec spec;
};

SyntheticProblem generate(const SyntheticSpec& spec);

struct RecoveryMetrics {
    double rse_l = 0.0;
    double rse_s = 0.0;
    std::size_t rank_recovered = 0;
    std::size_t sparsity_count = 0;
    double support_accuracy = 0.0;
    /// Set when the true part has zero norm; the matching rse is then an absolute error.
    bool rse_l_absolute = false;
    bool rse_s_absolute = false;
};

RecoveryMetrics evaluate(const DenseMatrix& l_star, const DenseMatrix& s_star, const SyntheticProblem& truth);
RecoveryMetrics evaluate(const SolverResult& result, const SyntheticProblem& truth);

enum class SweepAxis { rank, size, noise, pq };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct TrialOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    RecoveryMetrics metrics;
    double wall_ms = 0.0;
    int iters_used = 0;
    std::string error;
};

struct SweepRow {
    double axis_value = 0.0;
    std::vector<TrialOutcome> trials; ///< in seed order, failed trials included

    std::size_t successful() const;
    double rse_l_mean() const;
    double rse_l_std() const;
    double rse_s_mean() const;
    double rse_s_std() const;
    double rank_mean() const;
    double sparsity_mean() const;
    double support_acc_mean() const;
    double wall_ms_mean() const;
};

/// Trial t of every axis value uses seed base.seed + t, so rows are seed-matched.
/// Work is spread over `threads` workers; the result does not depend on it.
std::vector<SweepRow> run_sweep(SweepAxis axis, std::span<const double> values, const SyntheticSpec& base,
                                const SolverConfig& cfg, int trials, unsigned threads = 1);

/// Header: axis_value,trial_count,rse_l_mean,rse_l_std,rse_s_mean,rse_s_std,rank_mean,
/// sparsity_mean,support_acc_mean,wall_ms_mean. With include_timing = false the
/// wall-clock column is written as 0 so repeated runs are byte-identical.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, bool include_timing = true);

} // namespace pqpcp
