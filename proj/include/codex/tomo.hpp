#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codex/array2d.hpp"
#include "codex/projector.hpp"

namespace codex {

enum class Potential { quadratic, qggmrf };

/// Pairwise Markov random field prior over the 8-connected neighborhood (weight 1 for
/// horizontal/vertical pairs, 1/sqrt(2) for diagonal pairs):
///   h(x) = beta * sum_{pairs jk} w_jk rho(x_j - x_k)
/// quadratic: rho(d) = d^2 / 2
/// qggmrf:    rho(d) = (|d|^p / p) / (1 + |d/T|^(p - q)),  1 <= q <= p <= 2
/// The q-GGMRF behaves like |d|^p near zero and like |d|^q for |d| >> T.
struct PriorConfig {
    double beta = 1.0;
    Potential potential = Potential::quadratic;
    double p_exp = 2.0;
    double q_exp = 1.2;
    double T = 1.0;

    void validate() const;
    double rho(double delta) const;
    /// rho'(d) / d, the curvature of the symmetric quadratic majorizer at d.
    double surrogate_coefficient(double delta) const;

    friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

Potential parse_potential(const std::string& name);
std::string to_string(Potential p);

double prior_value(const Array2D& x, const PriorConfig& prior);
/// Gradient of h(x).
Array2D prior_gradient(const Array2D& x, const PriorConfig& prior);

enum class TomoSolver { icd, gradient };
TomoSolver parse_tomo_solver(const std::string& name);
std::string to_string(TomoSolver s);

struct TomoConfig {
    int n_t = 5;
    double sigma = 1.0;
    TomoSolver solver = TomoSolver::icd;
    /// Clamp pixels at zero (icd only).
    bool positivity = false;
    /// Seeds the per-sweep pixel visiting order of icd.
    std::uint64_t order_seed = 0;

    void validate() const;

    friend bool operator==(const TomoConfig&, const TomoConfig&) = default;
};

/// Weighted least-squares data term 1/2 sum_l w_l (b_l - (A x)_l)^2. Either a per-bin
/// weight array or a single uniform weight.
struct DataTerm {
    const Projector& A;
    const Array2D& target;
    const Array2D* weights = nullptr;
    double uniform_weight = 1.0;
};

struct SolveResult {
    Array2D x;
    /// Projection of the final x, A x.
    Array2D Ax;
    /// Objective before the first sweep followed by the value after each sweep.
    std::vector<double> costs;
    bool monotone = true;
};

/// Runs `sweeps` iterations of the selected solver on data term + prior, starting from
/// x_init. Ax_init, when provided, must equal A * x_init and saves one projection.
SolveResult solve_regularized(const DataTerm& data, const PriorConfig& prior, const Array2D& x_init,
                              const Array2D* Ax_init, int sweeps, TomoSolver solver, bool positivity = false,
                              std::uint64_t order_seed = 0);

/// (1 / 2 sigma^2) ||p_tilde - A x||^2 + h(x)
double tomo_cost(const Array2D& x, const Array2D& p_tilde, double sigma, const PriorConfig& prior,
                 const Projector& A);

/// n_t sweeps of regularized reconstruction from micro-projections p_tilde.
SolveResult tomo_partial(const Array2D& x_init, const Array2D& p_tilde, const TomoConfig& config,
                         const PriorConfig& prior, const Projector& A, const Array2D* Ax_init = nullptr);

/// Conventional weighted MBIR: minimizes 1/2 ||y - A_view x||_D^2 + h(x) where every view is
/// assigned a single nominal angle (the projector's angles).
SolveResult mbir_full(const Array2D& y_views, const Projector& view_projector, const Array2D& D,
                      const PriorConfig& prior, int iterations, const Array2D* x_init = nullptr,
                      TomoSolver solver = TomoSolver::icd, bool positivity = false);

}  // namespace codex
