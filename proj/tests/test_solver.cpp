#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pqpcp/error.hpp"
#include "pqpcp/solver.hpp"
#include "pqpcp/synth.hpp"

using namespace pqpcp;

namespace {

SolverConfig convex_config() {
    SolverConfig cfg;
    cfg.p = 1.0;
    cfg.q = 1.0;
    return cfg;
}

DenseMatrix rank_one(std::size_t m, std::size_t n, double scale, std::uint64_t seed) {
    const auto u = randn_matrix(m, 1, seed);
    const auto v = randn_matrix(n, 1, seed + 1);
    const auto x = matmul(u, v.transpose());
    return (scale / frob_norm(x)) * x;
}

} // namespace

TEST_CASE("relaxed objective examples") {
    SolverConfig cfg;
    const auto z = DenseMatrix::zeros(2, 2);
    CHECK(relaxed_objective(z, z, z, cfg, 0.0) == 0.0);

    SolverConfig convex = convex_config();
    convex.lambda1 = 1.0;
    convex.lambda2 = 1.0;
    const auto l = DenseMatrix::from_rows({{2, 0}, {0, 0}});
    CHECK(relaxed_objective(l, z, l, convex, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("relaxed objective agrees with an independent evaluator") {
    SolverConfig cfg;
    cfg.lambda1 = 0.7;
    cfg.lambda2 = 0.2;
    for (int k = 0; k < 5; ++k) {
        const auto l = randn_matrix(10, 10, 10 + k);
        const auto s = randn_matrix(10, 10, 20 + k);
        const auto x = randn_matrix(10, 10, 30 + k);
        const double eps = k == 0 ? 0.0 : 1e-3;
        const double ours = relaxed_objective(l, s, x, cfg, eps);
        const double ref = oracle::relaxed_objective(l.eigen(), s.eigen(), x.eigen(), 0.5, 0.5, 0.7, 0.2, eps);
        CHECK(std::abs(ours - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
    }
    CHECK_THROWS_AS(relaxed_objective(DenseMatrix::zeros(2, 3), DenseMatrix::zeros(2, 2), DenseMatrix::zeros(2, 2),
                                      cfg, 0.0),
                    DimensionError);
}

TEST_CASE("low-rank weights") {
    const auto l = randn_matrix(6, 4, 3);
    const auto w1 = compute_weights_L(l, 1.0, 1e-3);
    for (double w : w1.values()) CHECK(w == 1.0);

    const std::vector<double> sigma{4.0, 1.0};
    const auto w = weights_from_singular_values(sigma, 0.5, 0.0);
    CHECK(w[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));

    const std::vector<double> with_zero{4.0, 1.0, 0.0};
    const auto wz = weights_from_singular_values(with_zero, 0.5, 1e-3);
    CHECK(wz[2] == doctest::Approx(15.811388300841896).epsilon(1e-12));
    CHECK_THROWS_AS(weights_from_singular_values(with_zero, 0.5, 0.0), InvariantError);
    CHECK_NOTHROW(weights_from_singular_values(with_zero, 1.0, 0.0));

    for (int k = 0; k < 10; ++k) {
        const auto wk = compute_weights_L(randn_matrix(8, 5, 60 + k), 0.3, 1e-4);
        CHECK(wk.size() == 5);
        CHECK(std::is_sorted(wk.values().begin(), wk.values().end()));
    }
}

TEST_CASE("sparse weights") {
    const auto s = DenseMatrix::from_rows({{3.0, 0.0}, {-1.0, 0.5}});
    const auto ones = compute_weights_S(s, 1.0, 1e-3);
    for (double v : ones.matrix().data()) CHECK(v == 1.0);
    const auto m = compute_weights_S(DenseMatrix(1, 1, {3.0}), 0.5, 0.0);
    CHECK(m.matrix()(0, 0) == doctest::Approx(0.28867513459481287).epsilon(1e-14));
    const auto mw = compute_weights_S(s, 0.5, 1e-3);
    // larger magnitude gives a smaller weight
    CHECK(mw.matrix()(0, 0) < mw.matrix()(0, 1));
    CHECK(mw.matrix()(0, 0) < mw.matrix()(1, 0));
    CHECK(mw.matrix()(1, 0) < mw.matrix()(1, 1));
    CHECK_THROWS_AS(compute_weights_S(s, 0.5, 0.0), InvariantError);
}

TEST_CASE("update_L") {
    SolverConfig cfg;
    const auto l = randn_matrix(6, 5, 1);
    const auto s = randn_matrix(6, 5, 2);
    const auto x = l + s;
    SUBCASE("zero residual and zero weights returns L") {
        const auto out = update_L(l, s, x, WeightVector::uniform(5, 0.0), cfg);
        CHECK(frob_distance(out, l) < 1e-12 * frob_norm(l));
    }
    SUBCASE("convex mode equals an unweighted SVT gradient step") {
        SolverConfig c = convex_config();
        c.lambda1 = 0.8;
        const auto xo = randn_matrix(6, 5, 9);
        const auto out = update_L(l, s, xo, WeightVector::uniform(5, 1.0), c);
        const oracle::Mat point = l.eigen() - (l.eigen() + s.eigen() - xo.eigen()) / c.mu1;
        CHECK((out.eigen() - oracle::Mat(oracle::svt(point, 0.8 / c.mu1))).norm() < 1e-10);
    }
    SUBCASE("linearized model decreases") {
        for (int k = 0; k < 8; ++k) {
            const auto lk = randn_matrix(7, 9, 100 + k);
            const auto sk = randn_matrix(7, 9, 200 + k);
            const auto xk = randn_matrix(7, 9, 300 + k);
            const double eps = 1e-2;
            const auto w = compute_weights_L(lk, 0.5, eps);
            const auto next = update_L(lk, sk, xk, w, cfg);
            CHECK(l_surrogate(next, lk, sk, xk, w, cfg, eps) <= l_surrogate(lk, lk, sk, xk, w, cfg, eps) + 1e-12);
        }
    }
    SUBCASE("shape errors") {
        CHECK_THROWS_AS(update_L(l, s, DenseMatrix::zeros(5, 6), WeightVector::uniform(5, 1.0), cfg), DimensionError);
        CHECK_THROWS_AS(update_L(l, s, x, WeightVector::uniform(6, 1.0), cfg), DimensionError);
    }
}

TEST_CASE("update_S") {
    SolverConfig cfg;
    const auto l = randn_matrix(5, 5, 41);
    const auto s = randn_matrix(5, 5, 42);
    SUBCASE("zero residual and zero weights returns S") {
        CHECK(update_S(l, s, l + s, WeightMatrix::uniform(5, 5, 0.0), cfg) == s);
    }
    SUBCASE("element-wise agreement with the scalar grid oracle") {
        for (int k = 0; k < 3; ++k) {
            const auto x = randn_matrix(5, 5, 50 + k);
            const auto sk = randn_matrix(5, 5, 60 + k);
            const auto m = compute_weights_S(sk, 0.5, 1e-2);
            const auto out = update_S(l, sk, x, m, cfg);
            const double tau = cfg.resolved_lambda2(5, 5) / cfg.mu2;
            const RowMajorMatrix point = sk.eigen() - (l.eigen() + sk.eigen() - x.eigen()) / cfg.mu2;
            for (Eigen::Index i = 0; i < 25; ++i) {
                const double y = point.data()[i];
                const auto [best, step] = oracle::scalar_grid_min(y, m.matrix().data()[static_cast<std::size_t>(i)], tau);
                CHECK(std::abs(out.data()[static_cast<std::size_t>(i)] - best) <= step);
            }
            CHECK(s_surrogate(out, l, sk, x, m, cfg, 1e-2) <= s_surrogate(sk, l, sk, x, m, cfg, 1e-2) + 1e-12);
        }
    }
    SUBCASE("q = 1 equals the classical soft-threshold step") {
        SolverConfig c = convex_config();
        c.lambda2 = 0.3;
        const auto x = randn_matrix(5, 5, 77);
        const auto out = update_S(l, s, x, WeightMatrix::uniform(5, 5, 1.0), c);
        const oracle::Mat point = s.eigen() - (l.eigen() + s.eigen() - x.eigen()) / c.mu2;
        CHECK((out.eigen() - oracle::Mat(oracle::soft(point, 0.3 / c.mu2))).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("solve recovers an exactly rank-one matrix") {
    for (auto [m, n] : {std::pair{30, 20}, std::pair{20, 30}}) {
        const auto x = rank_one(m, n, 100.0, 5);
        SolverConfig cfg;
        cfg.lambda2 = 100.0;
        const auto result = solve(x, cfg);
        CHECK(result.converged);
        CHECK(result.iters_used < 50);
        CHECK(frob_distance(result.l_star, x) / frob_norm(x) < 1e-3);
        CHECK(sparsity_count(result.s_star) == 0);
        CHECK(numerical_rank(result.l_star) == 1);
        CHECK(result.l_star.rows() == static_cast<std::size_t>(m));
        CHECK(result.s_star.cols() == static_cast<std::size_t>(n));
    }
}

TEST_CASE("zero input is a fixed point reached in one iteration") {
    for (int warm : {0, 300}) {
        SolverConfig cfg;
        cfg.warm_start_iters = warm;
        const auto z = DenseMatrix::zeros(8, 6);
        const auto result = solve(z, cfg);
        CHECK(result.iters_used == 1);
        CHECK(result.converged);
        CHECK(result.l_star == z);
        CHECK(result.s_star == z);
        CHECK(result.trace.size() == 1);
    }
}

TEST_CASE("solver iteration invariants on synthetic data") {
    SyntheticSpec spec;
    spec.n = 60;
    spec.r = 3;
    spec.seed = 4;
    const auto problem = generate(spec);
    SolverConfig cfg;
    PiraSolver solver(problem.x_observed, cfg, convex_warm_start(problem.x_observed, cfg).l,
                      convex_warm_start(problem.x_observed, cfg).s);
    const double xnorm = frob_norm(problem.x_observed);
    double max_l = 0.0;
    for (int k = 0; k < 60; ++k) {
        const DenseMatrix l = solver.low_rank();
        const DenseMatrix s = solver.sparse();
        const WeightVector w = solver.weights_l();
        const WeightMatrix m = solver.weights_s();
        const double eps = solver.epsilon();
        // weights produced during the run satisfy the ordering hypothesis
        CHECK(std::is_sorted(w.values().begin(), w.values().end()));

        const auto rec = solver.step();
        CHECK(rec.epsilon == eps);
        CHECK(rec.relaxed_objective <= rec.start_objective * (1 + 1e-8));
        CHECK(l_surrogate(solver.low_rank(), l, s, problem.x_observed, w, cfg, eps) <=
              l_surrogate(l, l, s, problem.x_observed, w, cfg, eps) * (1 + 1e-12));
        CHECK(s_surrogate(solver.sparse(), l, s, problem.x_observed, m, cfg, eps) <=
              s_surrogate(s, l, s, problem.x_observed, m, cfg, eps) * (1 + 1e-12));
        CHECK(rec.start_objective == doctest::Approx(relaxed_objective(l, s, problem.x_observed, cfg, eps)).epsilon(1e-10));
        max_l = std::max(max_l, frob_norm(solver.low_rank()));
    }
    CHECK(max_l <= 10.0 * xnorm);
}

TEST_CASE("one more iteration at convergence barely moves the iterates") {
    SyntheticSpec spec;
    spec.n = 50;
    spec.r = 2;
    spec.seed = 9;
    const auto problem = generate(spec);
    SolverConfig cfg;
    const auto result = solve(problem.x_observed, cfg);
    REQUIRE(result.converged);
    // Resume from the returned point with the epsilon that would be in force next.
    SolverConfig resume = cfg;
    resume.warm_start_iters = 0;
    resume.epsilon0 = std::max(cfg.epsilon0 / std::pow(cfg.epsilon_decay, result.iters_used), cfg.epsilon_floor);
    resume.epsilon_floor = std::min(resume.epsilon_floor, resume.epsilon0);
    PiraSolver extra(problem.x_observed, resume, result.l_star, result.s_star);
    const auto rec = extra.step();
    CHECK(rec.step_delta < 10 * cfg.rel_tol * frob_norm(problem.x_observed));
}

TEST_CASE("trace records are consistent") {
    SyntheticSpec spec;
    spec.n = 40;
    spec.r = 2;
    spec.seed = 2;
    const auto problem = generate(spec);
    const auto result = solve(problem.x_observed, SolverConfig{});
    REQUIRE(result.trace.size() == static_cast<std::size_t>(result.iters_used));
    for (std::size_t k = 0; k < result.trace.size(); ++k) {
        const auto& r = result.trace[k];
        CHECK(r.iter == static_cast<int>(k));
        CHECK(std::isfinite(r.relaxed_objective));
        CHECK(r.step_delta >= 0.0);
        if (k > 0) CHECK(r.epsilon < result.trace[k - 1].epsilon);
    }
    CHECK(result.trace.back().rank_estimate == numerical_rank(result.l_star));
    CHECK(result.trace.back().sparsity_count == sparsity_count(result.s_star));
    CHECK(result.warm_start_iters > 0);
}

TEST_CASE("degenerate mode iterates match the convex reference") {
    for (int inst = 0; inst < 3; ++inst) {
        const auto x = randn_matrix(12, 9, 700 + inst);
        SolverConfig cfg = convex_config();
        cfg.lambda1 = 0.9;
        cfg.lambda2 = 0.15;
        cfg.warm_start_iters = 0;
        PiraSolver solver(x, cfg);
        oracle::ConvexReference ref{x.eigen(), x.eigen(), oracle::Mat::Zero(12, 9), 0.9, 0.15, cfg.mu1, cfg.mu2};
        for (int k = 0; k < 30; ++k) {
            solver.step();
            ref.step();
            CHECK((solver.low_rank().eigen() - RowMajorMatrix(ref.l)).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((solver.sparse().eigen() - RowMajorMatrix(ref.s)).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("config validation") {
    auto bad = [](auto mutate) {
        SolverConfig cfg;
        mutate(cfg);
        return cfg;
    };
    CHECK_NOTHROW(SolverConfig{}.validate());
    CHECK_NOTHROW(convex_config().validate());
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.p = 0.0; }).validate(), InvariantError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.q = 1.2; }).validate(), InvariantError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.mu1 = 1.0; }).validate(), InvariantError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.mu2 = 0.5; }).validate(), InvariantError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.lambda1 = 0.0; }).validate(), InvariantError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.lambda2 = -1.0; }).validate(), InvariantError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.epsilon_decay = 1.0; }).validate(), InvariantError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.max_iters = 0; }).validate(), InvariantError);
    CHECK_THROWS_AS(solve(randn_matrix(3, 3, 1), bad([](SolverConfig& c) { c.p = 2.0; })), InvariantError);

    SolverConfig cfg;
    CHECK(cfg.resolved_lambda2(200, 100) == doctest::Approx(1.0 / std::sqrt(200.0)));
    cfg.lambda1 = 2.0;
    CHECK(cfg.resolved_lambda2(50, 200) == doctest::Approx(2.0 / std::sqrt(200.0)));
}

TEST_CASE("config file parsing") {
    std::istringstream in("# tuned\np = 0.7\n  lambda2=0.05  # inline\n\nmax_iters = 40\nepsilon_decay = 1.2\n");
    const auto cfg = parse_config(in);
    CHECK(cfg.p == 0.7);
    CHECK(cfg.q == 0.5);
    REQUIRE(cfg.lambda2.has_value());
    CHECK(*cfg.lambda2 == 0.05);
    CHECK(cfg.max_iters == 40);
    CHECK(cfg.epsilon_decay == 1.2);

    std::istringstream unknown("rho = 1\n");
    CHECK_THROWS_WITH_AS(parse_config(unknown), doctest::Contains("unknown key"), ParseError);
    std::istringstream not_number("p = half\n");
    CHECK_THROWS_AS(parse_config(not_number), ParseError);
    std::istringstream not_int("max_iters = 2.5\n");
    CHECK_THROWS_AS(parse_config(not_int), ParseError);
    std::istringstream no_eq("p 0.5\n");
    CHECK_THROWS_AS(parse_config(no_eq), ParseError);
}
