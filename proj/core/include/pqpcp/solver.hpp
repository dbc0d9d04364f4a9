#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pqpcp/matrix.hpp"
#include "pqpcp/prox.hpp"

namespace pqpcp {

/// Model and algorithm parameters for the Schatten-p / l_q decomposition.
///
/// The solver minimizes
///   lambda1 * sum_i (sigma_i(L) + eps)^p + lambda2 * sum_ij (|S_ij| + eps)^q + 1/2 ||L + S - X||_F^2
/// with eps annealed as eps <- max(eps / epsilon_decay, epsilon_floor) after every iteration.
struct SolverConfig {
    double p = 0.5; ///< Schatten exponent, (0, 1]
    double q = 0.5; ///< l_q exponent, (0, 1]
    double lambda1 = 1.0;
    /// Unset means lambda1 / sqrt(max(m, n)) for the problem being solved.
    std::optional<double> lambda2;
    double mu1 = 2.1; ///< proximal weight of the L step, > 1
    double mu2 = 2.1; ///< proximal weight of the S step, > 1/2
    double epsilon0 = 1e-3;
    double epsilon_decay = 1.1;
    double epsilon_floor = 1e-12;
    int max_iters = 500;
    double rel_tol = 1e-6;
    /// Convex (p = q = 1) accelerated iterations run from (X, 0) before reweighting;
    /// 0 starts the reweighted loop directly at L = X, S = 0.
    int warm_start_iters = 300;
    double warm_start_tol = 1e-4;

    /// Throws InvariantError naming the first out-of-range field.
    void validate() const;
    double resolved_lambda2(std::size_t rows, std::size_t cols) const;
};

/// Parses `key = number` lines ('#' starts a comment) on top of `base`.
/// Keys are the SolverConfig field names; unknown keys are a ParseError.
SolverConfig parse_config(std::istream& in, SolverConfig base = {});
SolverConfig load_config(const std::filesystem::path& path, SolverConfig base = {});

struct IterationRecord {
    int iter = 0;
    double epsilon = 0.0;          ///< smoothing in force for this iteration's weights
    double start_objective = 0.0;  ///< relaxed objective at (L^k, S^k), same epsilon
    double relaxed_objective = 0.0; ///< relaxed objective at (L^{k+1}, S^{k+1}), same epsilon
    double l_subobjective = 0.0;   ///< f(L^{k+1}; S^k)
    double s_subobjective = 0.0;   ///< g(S^{k+1}; L^k)
    std::size_t rank_estimate = 0;
    std::size_t sparsity_count = 0;
    double step_delta = 0.0;       ///< ||L^{k+1} - L^k||_F + ||S^{k+1} - S^k||_F
};

struct SolverResult {
    DenseMatrix l_star;
    DenseMatrix s_star;
    std::vector<IterationRecord> trace;
    bool converged = false;
    int iters_used = 0;
    int warm_start_iters = 0;
};

/// Entries with |s| above this count as nonzero in sparsity counts.
inline constexpr double kSparsityTolerance = 1e-8;

std::size_t sparsity_count(const DenseMatrix& s);

double relaxed_objective(const DenseMatrix& l, const DenseMatrix& s, const DenseMatrix& x,
                         const SolverConfig& cfg, double epsilon);

/// w_i = p / (sigma_i + eps)^(1 - p); exactly 1 when p = 1.
WeightVector weights_from_singular_values(std::span<const double> sigma, double p, double epsilon);
WeightVector compute_weights_L(const DenseMatrix& l, double p, double epsilon);
/// M_ij = q / (|S_ij| + eps)^(1 - q); exactly 1 when q = 1.
WeightMatrix compute_weights_S(const DenseMatrix& s, double q, double epsilon);

/// Weighted SVT of the gradient step L - (L + S - X) / mu1 with threshold lambda1 / mu1.
DenseMatrix update_L(const DenseMatrix& l, const DenseMatrix& s, const DenseMatrix& x,
                     const WeightVector& w, const SolverConfig& cfg);
/// Weighted shrinkage of S - (L + S - X) / mu2 with threshold lambda2 / mu2.
DenseMatrix update_S(const DenseMatrix& l, const DenseMatrix& s, const DenseMatrix& x,
                     const WeightMatrix& m, const SolverConfig& cfg);

/// Linearized-plus-proximal model of the L subproblem around (L^k, S^k), evaluated at `candidate`.
/// Equals the L-subproblem objective at candidate = L^k; update_L minimizes it.
double l_surrogate(const DenseMatrix& candidate, const DenseMatrix& l, const DenseMatrix& s,
                   const DenseMatrix& x, const WeightVector& w, const SolverConfig& cfg,
                   double epsilon);
/// Same for the S subproblem; update_S minimizes it.
double s_surrogate(const DenseMatrix& candidate, const DenseMatrix& l, const DenseMatrix& s,
                   const DenseMatrix& x, const WeightMatrix& m, const SolverConfig& cfg,
                   double epsilon);

/// Convex accelerated proximal gradient on the p = q = 1 model, starting from (X, 0).
struct WarmStart {
    DenseMatrix l;
    DenseMatrix s;
    int iters = 0;
};
WarmStart convex_warm_start(const DenseMatrix& x, const SolverConfig& cfg);

/// Stateful iteration of the reweighted algorithm; `solve` drives it to convergence.
class PiraSolver {
public:
    PiraSolver(DenseMatrix x, SolverConfig cfg);
    PiraSolver(DenseMatrix x, SolverConfig cfg, DenseMatrix l0, DenseMatrix s0);

    /// One full iteration: L step, S step (both from (L^k, S^k)), then eps and weights.
    IterationRecord step();

    const DenseMatrix& observed() const { return x_; }
    const DenseMatrix& low_rank() const { return l_; }
    const DenseMatrix& sparse() const { return s_; }
    const WeightVector& weights_l() const { return w_; }
    const WeightMatrix& weights_s() const { return m_; }
    double epsilon() const { return eps_; }
    int iteration() const { return iter_; }
    const SolverConfig& config() const { return cfg_; }

private:
    void refresh_weights();

    DenseMatrix x_;
    SolverConfig cfg_;
    double lambda2_;
    DenseMatrix l_;
    DenseMatrix s_;
    std::vector<double> sigma_l_;
    WeightVector w_;
    WeightMatrix m_;
    double eps_;
    int iter_ = 0;
};

SolverResult solve(const DenseMatrix& x, const SolverConfig& cfg);

} // namespace pqpcp
