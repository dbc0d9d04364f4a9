#include "pqpcp/solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>

#include "pqpcp/error.hpp"

namespace pqpcp {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw InvariantError(message);
}

void check_shapes(const DenseMatrix& l, const DenseMatrix& s, const DenseMatrix& x) {
    if (!l.same_shape(x) || !s.same_shape(x)) throw DimensionError("L, S and X must have the same shape");
}

double schatten_penalty(std::span<const double> sigma, double p, double eps) {
    double total = 0.0;
    for (double v : sigma) total += std::pow(v + eps, p);
    return total;
}

double lq_penalty(const RowMajorMatrix& s, double q, double eps) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) total += std::pow(std::abs(s.data()[i]) + eps, q);
    return total;
}

double weighted_l1(const RowMajorMatrix& s, const RowMajorMatrix& w) {
    return (s.cwiseAbs().array() * w.array()).sum();
}

RowMajorMatrix soft_threshold(const RowMajorMatrix& y, const RowMajorMatrix& weights, double lambda) {
    RowMajorMatrix out(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        out.data()[i] = shrink_scalar(y.data()[i], lambda * weights.data()[i]);
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

void SolverConfig::validate() const {
    require(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
    require(q > 0.0 && q <= 1.0, "q must lie in (0, 1]");
    require(lambda1 > 0.0 && std::isfinite(lambda1), "lambda1 must be positive");
    require(!lambda2 || (*lambda2 > 0.0 && std::isfinite(*lambda2)), "lambda2 must be positive");
    require(mu1 > 1.0 && std::isfinite(mu1), "mu1 must exceed 1");
    require(mu2 > 0.5 && std::isfinite(mu2), "mu2 must exceed 1/2");
    require(epsilon0 > 0.0 && std::isfinite(epsilon0), "epsilon0 must be positive");
    require(epsilon_decay > 1.0 && std::isfinite(epsilon_decay), "epsilon_decay must exceed 1");
    require(epsilon_floor >= 0.0 && epsilon_floor <= epsilon0, "epsilon_floor must lie in [0, epsilon0]");
    require(max_iters >= 1, "max_iters must be positive");
    require(rel_tol > 0.0, "rel_tol must be positive");
    require(warm_start_iters >= 0, "warm_start_iters must be nonnegative");
    require(warm_start_tol > 0.0, "warm_start_tol must be positive");
}

double SolverConfig::resolved_lambda2(std::size_t rows, std::size_t cols) const {
    if (lambda2) return *lambda2;
    return lambda1 / std::sqrt(static_cast<double>(std::max(rows, cols)));
}

SolverConfig parse_config(std::istream& in, SolverConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = number'");
        const std::string key(trim(view.substr(0, eq)));
        const std::string_view text = trim(view.substr(eq + 1));
        double value = 0.0;
        const char* first = text.data();
        if (!text.empty() && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
        if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
            throw ParseError("config line " + std::to_string(line_no) + ": '" + std::string(text) +
                             "' is not a number");
        auto as_int = [&]() {
            if (value != std::floor(value) || std::abs(value) > 1e9)
                throw ParseError("config line " + std::to_string(line_no) + ": " + key + " must be an integer");
            return static_cast<int>(value);
        };
        if (key == "p") base.p = value;
        else if (key == "q") base.q = value;
        else if (key == "lambda1") base.lambda1 = value;
        else if (key == "lambda2") base.lambda2 = value;
        else if (key == "mu1") base.mu1 = value;
        else if (key == "mu2") base.mu2 = value;
        else if (key == "epsilon0") base.epsilon0 = value;
        else if (key == "epsilon_decay") base.epsilon_decay = value;
        else if (key == "epsilon_floor") base.epsilon_floor = value;
        else if (key == "max_iters") base.max_iters = as_int();
        else if (key == "rel_tol") base.rel_tol = value;
        else if (key == "warm_start_iters") base.warm_start_iters = as_int();
        else if (key == "warm_start_tol") base.warm_start_tol = value;
        else throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return base;
}

SolverConfig load_config(const std::filesystem::path& path, SolverConfig base) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string());
    try {
        return parse_config(in, std::move(base));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::size_t sparsity_count(const DenseMatrix& s) {
    return static_cast<std::size_t>(
        std::count_if(s.data().begin(), s.data().end(), [](double v) { return std::abs(v) > kSparsityTolerance; }));
}

double relaxed_objective(const DenseMatrix& l, const DenseMatrix& s, const DenseMatrix& x,
                         const SolverConfig& cfg, double epsilon) {
    check_shapes(l, s, x);
    const auto sigma = singular_values(l);
    const double fit = (l.eigen() + s.eigen() - x.eigen()).squaredNorm();
    return cfg.lambda1 * schatten_penalty(sigma, cfg.p, epsilon) +
           cfg.resolved_lambda2(x.rows(), x.cols()) * lq_penalty(s.eigen(), cfg.q, epsilon) + 0.5 * fit;
}

WeightVector weights_from_singular_values(std::span<const double> sigma, double p, double epsilon) {
    std::vector<double> w(sigma.size(), 1.0);
    if (p == 1.0) return WeightVector(std::move(w));
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double base = sigma[i] + epsilon;
        if (!(base > 0.0))
            throw InvariantError("zero singular value with epsilon = 0 makes the weight infinite");
        w[i] = p / std::pow(base, 1.0 - p);
    }
    return WeightVector(std::move(w));
}

WeightVector compute_weights_L(const DenseMatrix& l, double p, double epsilon) {
    return weights_from_singular_values(singular_values(l), p, epsilon);
}

WeightMatrix compute_weights_S(const DenseMatrix& s, double q, double epsilon) {
    if (q == 1.0) return WeightMatrix::uniform(s.rows(), s.cols(), 1.0);
    RowMajorMatrix m(static_cast<Eigen::Index>(s.rows()), static_cast<Eigen::Index>(s.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double base = std::abs(s.eigen().data()[i]) + epsilon;
        if (!(base > 0.0)) throw InvariantError("zero sparse entry with epsilon = 0 makes the weight infinite");
        m.data()[i] = q / std::pow(base, 1.0 - q);
    }
    return WeightMatrix(DenseMatrix(std::move(m)));
}

DenseMatrix update_L(const DenseMatrix& l, const DenseMatrix& s, const DenseMatrix& x,
                     const WeightVector& w, const SolverConfig& cfg) {
    cfg.validate();
    check_shapes(l, s, x);
    const RowMajorMatrix point = l.eigen() - (l.eigen() + s.eigen() - x.eigen()) / cfg.mu1;
    return prox_weighted_svt(DenseMatrix(point), w, cfg.lambda1 / cfg.mu1);
}

DenseMatrix update_S(const DenseMatrix& l, const DenseMatrix& s, const DenseMatrix& x,
                     const WeightMatrix& m, const SolverConfig& cfg) {
    cfg.validate();
    check_shapes(l, s, x);
    const RowMajorMatrix point = s.eigen() - (l.eigen() + s.eigen() - x.eigen()) / cfg.mu2;
    return prox_weighted_shrink(DenseMatrix(point), m, cfg.resolved_lambda2(x.rows(), x.cols()) / cfg.mu2);
}

double l_surrogate(const DenseMatrix& candidate, const DenseMatrix& l, const DenseMatrix& s,
                   const DenseMatrix& x, const WeightVector& w, const SolverConfig& cfg,
                   double epsilon) {
    check_shapes(l, s, x);
    if (!candidate.same_shape(x)) throw DimensionError("candidate shape mismatch");
    const auto sigma_k = singular_values(l);
    const auto sigma_c = singular_values(candidate);
    if (w.size() != sigma_k.size()) throw DimensionError("weight vector length mismatch");
    double penalty = 0.0;
    for (std::size_t i = 0; i < sigma_k.size(); ++i)
        penalty += std::pow(sigma_k[i] + epsilon, cfg.p) + w[i] * (sigma_c[i] - sigma_k[i]);
    const RowMajorMatrix residual = l.eigen() + s.eigen() - x.eigen();
    const RowMajorMatrix delta = candidate.eigen() - l.eigen();
    return cfg.lambda1 * penalty + 0.5 * residual.squaredNorm() + (residual.array() * delta.array()).sum() +
           0.5 * cfg.mu1 * delta.squaredNorm();
}

double s_surrogate(const DenseMatrix& candidate, const DenseMatrix& l, const DenseMatrix& s,
                   const DenseMatrix& x, const WeightMatrix& m, const SolverConfig& cfg,
                   double epsilon) {
    check_shapes(l, s, x);
    if (!candidate.same_shape(x) || !m.matrix().same_shape(x)) throw DimensionError("candidate shape mismatch");
    const RowMajorMatrix& sk = s.eigen();
    const RowMajorMatrix& wm = m.matrix().eigen();
    const double penalty = lq_penalty(sk, cfg.q, epsilon) + weighted_l1(candidate.eigen(), wm) - weighted_l1(sk, wm);
    const RowMajorMatrix residual = l.eigen() + sk - x.eigen();
    const RowMajorMatrix delta = candidate.eigen() - sk;
    return cfg.resolved_lambda2(x.rows(), x.cols()) * penalty + 0.5 * residual.squaredNorm() +
           (residual.array() * delta.array()).sum() + 0.5 * cfg.mu2 * delta.squaredNorm();
}

WarmStart convex_warm_start(const DenseMatrix& x, const SolverConfig& cfg) {
    cfg.validate();
    const double lambda2 = cfg.resolved_lambda2(x.rows(), x.cols());
    const double scale = std::max(1.0, frob_norm(x));
    const std::size_t s = std::min(x.rows(), x.cols());
    const WeightVector unit_w = WeightVector::uniform(s, 1.0);
    const RowMajorMatrix unit_m = RowMajorMatrix::Ones(x.eigen().rows(), x.eigen().cols());
    const RowMajorMatrix& xv = x.eigen();

    RowMajorMatrix l = xv, l_prev = xv;
    RowMajorMatrix sp = RowMajorMatrix::Zero(xv.rows(), xv.cols()), sp_prev = sp;
    double t = 1.0;
    int iters = 0;
    while (iters < cfg.warm_start_iters) {
        ++iters;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        const RowMajorMatrix yl = l + beta * (l - l_prev);
        const RowMajorMatrix ys = sp + beta * (sp - sp_prev);
        const RowMajorMatrix residual = yl + ys - xv;
        RowMajorMatrix l_next =
            weighted_svt(DenseMatrix(RowMajorMatrix(yl - residual / cfg.mu1)), unit_w, cfg.lambda1 / cfg.mu1).matrix.eigen();
        RowMajorMatrix s_next = soft_threshold(ys - residual / cfg.mu2, unit_m, lambda2 / cfg.mu2);
        const double delta = (l_next - l).norm() + (s_next - sp).norm();
        l_prev = std::move(l);
        sp_prev = std::move(sp);
        l = std::move(l_next);
        sp = std::move(s_next);
        t = t_next;
        if (delta / scale < cfg.warm_start_tol) break;
    }
    return WarmStart{DenseMatrix(std::move(l)), DenseMatrix(std::move(sp)), iters};
}

PiraSolver::PiraSolver(DenseMatrix x, SolverConfig cfg)
    : PiraSolver(x, cfg, x, DenseMatrix::zeros(x.rows(), x.cols())) {}

PiraSolver::PiraSolver(DenseMatrix x, SolverConfig cfg, DenseMatrix l0, DenseMatrix s0)
    : x_(std::move(x)),
      cfg_(std::move(cfg)),
      lambda2_(cfg_.resolved_lambda2(x_.rows(), x_.cols())),
      l_(std::move(l0)),
      s_(std::move(s0)),
      sigma_l_(singular_values(l_)),
      w_(WeightVector::uniform(sigma_l_.size(), 1.0)),
      m_(WeightMatrix::uniform(x_.rows(), x_.cols(), 1.0)),
      eps_(cfg_.epsilon0) {
    cfg_.validate();
    check_shapes(l_, s_, x_);
    refresh_weights();
}

void PiraSolver::refresh_weights() {
    w_ = weights_from_singular_values(sigma_l_, cfg_.p, eps_);
    m_ = compute_weights_S(s_, cfg_.q, eps_);
}

IterationRecord PiraSolver::step() {
    IterationRecord rec;
    rec.iter = iter_;
    rec.epsilon = eps_;
    try {
        const RowMajorMatrix& xv = x_.eigen();
        const RowMajorMatrix& lv = l_.eigen();
        const RowMajorMatrix& sv = s_.eigen();
        const RowMajorMatrix residual = lv + sv - xv;

        ThresholdedSvd next_l =
            weighted_svt(DenseMatrix(RowMajorMatrix(lv - residual / cfg_.mu1)), w_, cfg_.lambda1 / cfg_.mu1);
        DenseMatrix next_s(soft_threshold(sv - residual / cfg_.mu2, m_.matrix().eigen(), lambda2_ / cfg_.mu2));

        const RowMajorMatrix& nl = next_l.matrix.eigen();
        const RowMajorMatrix& ns = next_s.eigen();
        const double pen_l_old = cfg_.lambda1 * schatten_penalty(sigma_l_, cfg_.p, eps_);
        const double pen_l_new = cfg_.lambda1 * schatten_penalty(next_l.singular_values, cfg_.p, eps_);
        const double pen_s_old = lambda2_ * lq_penalty(sv, cfg_.q, eps_);
        const double pen_s_new = lambda2_ * lq_penalty(ns, cfg_.q, eps_);

        rec.start_objective = pen_l_old + pen_s_old + 0.5 * residual.squaredNorm();
        rec.relaxed_objective = pen_l_new + pen_s_new + 0.5 * (nl + ns - xv).squaredNorm();
        rec.l_subobjective = pen_l_new + 0.5 * (nl + sv - xv).squaredNorm();
        rec.s_subobjective = pen_s_new + 0.5 * (lv + ns - xv).squaredNorm();
        rec.rank_estimate = numerical_rank(next_l.singular_values);
        rec.sparsity_count = sparsity_count(next_s);
        rec.step_delta = (nl - lv).norm() + (ns - sv).norm();
        if (!std::isfinite(rec.relaxed_objective)) throw NumericError("relaxed objective is not finite");

        l_ = std::move(next_l.matrix);
        s_ = std::move(next_s);
        sigma_l_ = std::move(next_l.singular_values);
        eps_ = std::max(eps_ / cfg_.epsilon_decay, cfg_.epsilon_floor);
        refresh_weights();
    } catch (const NumericError& e) {
        throw NumericError("iteration " + std::to_string(iter_) + ": " + e.what());
    }
    ++iter_;
    return rec;
}

SolverResult solve(const DenseMatrix& x, const SolverConfig& cfg) {
    cfg.validate();
    int warm_iters = 0;
    auto make_solver = [&]() {
        if (cfg.warm_start_iters == 0) return PiraSolver(x, cfg);
        WarmStart warm = convex_warm_start(x, cfg);
        warm_iters = warm.iters;
        return PiraSolver(x, cfg, std::move(warm.l), std::move(warm.s));
    };
    PiraSolver solver = make_solver();

    const double scale = std::max(1.0, frob_norm(x));
    std::vector<IterationRecord> trace;
    trace.reserve(static_cast<std::size_t>(std::min(cfg.max_iters, 1000)));
    bool converged = false;
    while (solver.iteration() < cfg.max_iters) {
        trace.push_back(solver.step());
        if (trace.back().step_delta / scale < cfg.rel_tol) {
            converged = true;
            break;
        }
    }
    const int used = solver.iteration();
    return SolverResult{solver.low_rank(), solver.sparse(), std::move(trace), converged, used, warm_iters};
}

} // namespace pqpcp
