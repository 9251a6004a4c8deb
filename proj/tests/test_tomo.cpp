#include <stdexcept>
#include <cmath>
#include <numbers>

#include "codex/phantom.hpp"
#include "codex/rng.hpp"
#include "codex/tomo.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace codex;

namespace {

Array2D random_array(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
    CounterRng rng(seed);
    Array2D a(r, c);
    for (auto& v : a.flat()) v = scale * (rng.uniform() - 0.5);
    return a;
}

std::vector<double> even_angles(int count) {
    std::vector<double> a;
    for (int i = 0; i < count; ++i) a.push_back(std::numbers::pi * i / count);
    return a;
}

}  // namespace

TEST_SUITE("tomo") {

TEST_CASE("quadratic prior value and gradient against the dense form") {
    const int n = 6;
    const Array2D x = random_array(n, n, 1);
    PriorConfig prior;
    prior.beta = 0.7;
    const Eigen::MatrixXd Q = oracle::pair_laplacian(n);
    const Eigen::VectorXd xv = oracle::to_vec(x);
    CHECK(prior_value(x, prior) == doctest::Approx(0.5 * 0.7 * xv.dot(Q * xv)).epsilon(1e-12));
    const Eigen::VectorXd g = 0.7 * Q * xv;
    const Array2D gp = prior_gradient(x, prior);
    for (int j = 0; j < n * n; ++j) CHECK(gp[j] == doctest::Approx(g[j]).epsilon(1e-12));
}

TEST_CASE("q-GGMRF potential") {
    PriorConfig prior;
    prior.potential = Potential::qggmrf;
    prior.p_exp = 2.0;
    prior.q_exp = 1.2;
    prior.T = 0.5;
    CHECK(prior.rho(0.0) == 0.0);
    CHECK(prior.rho(0.3) == prior.rho(-0.3));
    const double d = 0.3, u = std::pow(d / 0.5, 0.8);
    CHECK(prior.rho(d) == doctest::Approx(d * d / 2.0 / (1.0 + u)));
    // surrogate coefficient equals rho'(d)/d
    for (double t : {0.05, 0.4, 2.0}) {
        const double h = 1e-6;
        const double drho = (prior.rho(t + h) - prior.rho(t - h)) / (2 * h);
        CHECK(prior.surrogate_coefficient(t) == doctest::Approx(drho / t).epsilon(1e-6));
    }
    // finite gradient check of the full prior
    const Array2D x = random_array(5, 5, 3);
    const Array2D g = prior_gradient(x, prior);
    for (int j = 0; j < 25; ++j) {
        Array2D xp = x, xm = x;
        xp[j] += 1e-6;
        xm[j] -= 1e-6;
        CHECK(g[j] == doctest::Approx((prior_value(xp, prior) - prior_value(xm, prior)) / 2e-6).epsilon(1e-5));
    }
    prior.q_exp = 2.5;
    CHECK_THROWS_AS(prior.validate(), std::invalid_argument);
}

TEST_CASE("partial tomographic solve converges to the dense normal equations") {
    const int n = 16;
    const Geometry g = Geometry::square(n, 1.0 / n);
    Projector A(g, even_angles(24));
    PhantomSpec spec;
    spec.n_side = n;
    const Array2D truth = make_phantom(spec);
    Array2D p_tilde = A.project(truth);
    const Array2D noise = random_array(p_tilde.rows(), p_tilde.cols(), 5, 0.02);
    for (std::size_t l = 0; l < p_tilde.size(); ++l) p_tilde[l] += noise[l];

    PriorConfig prior;
    prior.beta = 0.05;
    TomoConfig cfg;
    cfg.sigma = 0.5;
    const Eigen::MatrixXd M = oracle::dense_system_matrix(A);
    const Eigen::MatrixXd H = M.transpose() * M / (cfg.sigma * cfg.sigma) + prior.beta * oracle::pair_laplacian(n);
    const Eigen::VectorXd rhs = M.transpose() * oracle::to_vec(p_tilde) / (cfg.sigma * cfg.sigma);
    const Eigen::VectorXd x_star = H.ldlt().solve(rhs);

    for (TomoSolver solver : {TomoSolver::icd, TomoSolver::gradient}) {
        cfg.solver = solver;
        cfg.n_t = 400;
        const SolveResult r = tomo_partial(Array2D(n, n), p_tilde, cfg, prior, A);
        CHECK(r.monotone);
        const Eigen::VectorXd x = oracle::to_vec(r.x);
        CHECK((x - x_star).norm() <= 1e-4 * x_star.norm());
        // Ax carried through the error sinogram matches a fresh projection.
        const Array2D Ax = A.project(r.x);
        for (std::size_t l = 0; l < Ax.size(); ++l) CHECK(r.Ax[l] == doctest::Approx(Ax[l]).epsilon(1e-9).scale(1));
    }
}

TEST_CASE("weighted solve matches the dense weighted normal equations") {
    const int n = 12;
    const Geometry g = Geometry::square(n, 1.0 / n);
    Projector A(g, even_angles(15));
    const Array2D target = random_array(15, static_cast<std::size_t>(g.num_detector_pixels), 8);
    Array2D W = random_array(15, static_cast<std::size_t>(g.num_detector_pixels), 9);
    for (auto& v : W.flat()) v += 1.0;
    PriorConfig prior;
    prior.beta = 0.02;
    const SolveResult r = mbir_full(target, A, W, prior, 400);
    const Eigen::MatrixXd M = oracle::dense_system_matrix(A);
    const Eigen::VectorXd w = oracle::to_vec(W);
    const Eigen::MatrixXd H = M.transpose() * w.asDiagonal() * M + prior.beta * oracle::pair_laplacian(n);
    const Eigen::VectorXd x_star = H.ldlt().solve(M.transpose() * w.asDiagonal() * oracle::to_vec(target));
    CHECK((oracle::to_vec(r.x) - x_star).norm() <= 1e-4 * x_star.norm());
}

TEST_CASE("q-GGMRF sweeps decrease the cost monotonically") {
    const int n = 16;
    const Geometry g = Geometry::square(n, 1.0 / n);
    Projector A(g, even_angles(20));
    PhantomSpec spec;
    spec.n_side = n;
    spec.kind = PhantomKind::siemens_star;
    const Array2D p_tilde = A.project(make_phantom(spec));
    PriorConfig prior;
    prior.beta = 0.01;
    prior.potential = Potential::qggmrf;
    prior.T = 0.1;
    for (TomoSolver solver : {TomoSolver::icd, TomoSolver::gradient}) {
        TomoConfig cfg;
        cfg.solver = solver;
        cfg.n_t = 30;
        const SolveResult r = tomo_partial(Array2D(n, n), p_tilde, cfg, prior, A);
        CHECK(r.monotone);
        CHECK(r.costs.back() < 0.1 * r.costs.front());
        CHECK(r.costs.back() == doctest::Approx(tomo_cost(r.x, p_tilde, cfg.sigma, prior, A)).epsilon(1e-9));
    }
}

TEST_CASE("positivity clamps pixels at zero") {
    const int n = 16;
    const Geometry g = Geometry::square(n, 1.0 / n);
    Projector A(g, even_angles(20));
    const Array2D p_tilde = random_array(20, static_cast<std::size_t>(g.num_detector_pixels), 2);
    PriorConfig prior;
    prior.beta = 0.001;
    TomoConfig cfg;
    cfg.positivity = true;
    cfg.n_t = 5;
    const SolveResult r = tomo_partial(Array2D(n, n), p_tilde, cfg, prior, A);
    for (double v : r.x.flat()) CHECK(v >= 0.0);
    cfg.solver = TomoSolver::gradient;
    CHECK_THROWS_AS(tomo_partial(Array2D(n, n), p_tilde, cfg, prior, A), std::invalid_argument);
}

TEST_CASE("visiting order is seeded and reproducible") {
    const int n = 16;
    const Geometry g = Geometry::square(n, 1.0 / n);
    Projector A(g, even_angles(10));
    const Array2D p_tilde = random_array(10, static_cast<std::size_t>(g.num_detector_pixels), 4);
    PriorConfig prior;
    TomoConfig cfg;
    cfg.n_t = 2;
    const SolveResult a = tomo_partial(Array2D(n, n), p_tilde, cfg, prior, A);
    const SolveResult b = tomo_partial(Array2D(n, n), p_tilde, cfg, prior, A);
    CHECK(a.x == b.x);
    cfg.order_seed = 1;
    const SolveResult c = tomo_partial(Array2D(n, n), p_tilde, cfg, prior, A);
    CHECK_FALSE(a.x == c.x);
}

TEST_CASE("input validation") {
    const Geometry g = Geometry::square(16);
    Projector A(g, even_angles(4));
    PriorConfig prior;
    TomoConfig cfg;
    CHECK_THROWS_AS(tomo_partial(Array2D(15, 15), Array2D(4, static_cast<std::size_t>(g.num_detector_pixels)), cfg, prior, A),
                    std::invalid_argument);
    CHECK_THROWS_AS(tomo_partial(Array2D(16, 16), Array2D(5, 3), cfg, prior, A), std::invalid_argument);
    cfg.n_t = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(parse_tomo_solver("gradient") == TomoSolver::gradient);
    CHECK_THROWS_AS(parse_tomo_solver("sart"), std::invalid_argument);
    CHECK(parse_potential(to_string(Potential::qggmrf)) == Potential::qggmrf);
}

}
