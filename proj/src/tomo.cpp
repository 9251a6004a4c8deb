#include "codex/tomo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "codex/rng.hpp"

namespace codex {

namespace {

struct Offset {
    int dr, dc;
    double w;
};

constexpr double kDiag = 0.70710678118654752440;

// Each unordered neighbor pair appears once when scanning these forward offsets.
constexpr std::array<Offset, 4> kForward{{{0, 1, 1.0}, {1, 0, 1.0}, {1, 1, kDiag}, {1, -1, kDiag}}};
constexpr std::array<Offset, 8> kAll{{{0, 1, 1.0},
                                      {1, 0, 1.0},
                                      {1, 1, kDiag},
                                      {1, -1, kDiag},
                                      {0, -1, 1.0},
                                      {-1, 0, 1.0},
                                      {-1, -1, kDiag},
                                      {-1, 1, kDiag}}};

}  // namespace

void PriorConfig::validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("prior: beta must be >= 0");
    if (potential == Potential::qggmrf) {
        if (!(1.0 <= q_exp && q_exp <= p_exp && p_exp <= 2.0))
            throw std::invalid_argument("prior: q-GGMRF needs 1 <= q <= p <= 2");
        if (!(T > 0.0)) throw std::invalid_argument("prior: q-GGMRF threshold T must be positive");
    }
}

double PriorConfig::rho(double delta) const {
    if (potential == Potential::quadratic) return 0.5 * delta * delta;
    const double a = std::abs(delta);
    if (a == 0.0) return 0.0;
    const double u = std::pow(a / T, p_exp - q_exp);
    return std::pow(a, p_exp) / p_exp / (1.0 + u);
}

double PriorConfig::surrogate_coefficient(double delta) const {
    if (potential == Potential::quadratic) return 1.0;
    const double a = std::max(std::abs(delta), 1e-6 * T);
    const double u = std::pow(a / T, p_exp - q_exp);
    return std::pow(a, p_exp - 2.0) * (p_exp + q_exp * u) / (p_exp * (1.0 + u) * (1.0 + u));
}

Potential parse_potential(const std::string& name) {
    if (name == "quadratic") return Potential::quadratic;
    if (name == "qggmrf") return Potential::qggmrf;
    throw std::invalid_argument("unknown prior potential: " + name);
}

std::string to_string(Potential p) { return p == Potential::quadratic ? "quadratic" : "qggmrf"; }

TomoSolver parse_tomo_solver(const std::string& name) {
    if (name == "icd") return TomoSolver::icd;
    if (name == "gradient") return TomoSolver::gradient;
    throw std::invalid_argument("unknown tomographic solver: " + name);
}

std::string to_string(TomoSolver s) { return s == TomoSolver::icd ? "icd" : "gradient"; }

void TomoConfig::validate() const {
    if (n_t < 1) throw std::invalid_argument("tomo: n_t must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("tomo: sigma must be positive and finite");
}

double prior_value(const Array2D& x, const PriorConfig& prior) {
    if (prior.beta == 0.0) return 0.0;
    const int nr = static_cast<int>(x.rows()), nc = static_cast<int>(x.cols());
    double h = 0.0;
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c)
            for (const auto& o : kForward) {
                const int r2 = r + o.dr, c2 = c + o.dc;
                if (r2 < 0 || r2 >= nr || c2 < 0 || c2 >= nc) continue;
                h += o.w * prior.rho(x(r, c) - x(r2, c2));
            }
    return prior.beta * h;
}

Array2D prior_gradient(const Array2D& x, const PriorConfig& prior) {
    const int nr = static_cast<int>(x.rows()), nc = static_cast<int>(x.cols());
    Array2D g(x.rows(), x.cols());
    if (prior.beta == 0.0) return g;
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c) {
            double acc = 0.0;
            for (const auto& o : kAll) {
                const int r2 = r + o.dr, c2 = c + o.dc;
                if (r2 < 0 || r2 >= nr || c2 < 0 || c2 >= nc) continue;
                const double d = x(r, c) - x(r2, c2);
                acc += o.w * prior.surrogate_coefficient(d) * d;
            }
            g(r, c) = prior.beta * acc;
        }
    return g;
}

namespace {

double data_cost(const DataTerm& data, const Array2D& error) {
    double s = 0.0;
    if (data.weights) {
        for (std::size_t e = 0; e < error.size(); ++e) s += (*data.weights)[e] * error[e] * error[e];
    } else {
        for (double v : error.flat()) s += v * v;
        s *= data.uniform_weight;
    }
    return 0.5 * s;
}

std::vector<int> visit_order(int count, std::uint64_t seed, std::uint64_t sweep) {
    std::vector<int> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(seed, 0x1cd, sweep);
    for (int i = count - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[i], order[j]);
    }
    return order;
}

template <bool Weighted>
void icd_sweep(const DataTerm& data, const PriorConfig& prior, Array2D& x, Array2D& error,
               const std::vector<int>& order, bool positivity) {
    const Projector& A = data.A;
    const int n = A.geometry().n_side;
    auto e = error.flat();
    for (int j : order) {
        const auto bins = A.column_bins(j);
        const auto vals = A.column_weights(j);
        double theta1 = 0.0, theta2 = 0.0;
        for (std::size_t k = 0; k < bins.size(); ++k) {
            const double a = vals[k];
            const double w = Weighted ? (*data.weights)[bins[k]] : 1.0;
            theta1 -= w * e[bins[k]] * a;
            theta2 += w * a * a;
        }
        if (!Weighted) {
            theta1 *= data.uniform_weight;
            theta2 *= data.uniform_weight;
        }
        const int r = j / n, c = j % n;
        const double xj = x[j];
        double num = theta1, den = theta2;
        if (prior.beta > 0.0) {
            for (const auto& o : kAll) {
                const int r2 = r + o.dr, c2 = c + o.dc;
                if (r2 < 0 || r2 >= n || c2 < 0 || c2 >= n) continue;
                const double d = xj - x(r2, c2);
                const double b = prior.beta * o.w * prior.surrogate_coefficient(d);
                num += b * d;
                den += b;
            }
        }
        if (!(den > 0.0)) continue;
        double delta = -num / den;
        if (positivity && xj + delta < 0.0) delta = -xj;
        if (delta == 0.0) continue;
        x[j] = xj + delta;
        for (std::size_t k = 0; k < bins.size(); ++k) e[bins[k]] -= delta * vals[k];
    }
}

// Preconditioned nonlinear conjugate gradient with an exact step on the quadratic
// majorizer of the prior; every step is a descent step of the true objective.
class GradientSolver {
public:
    GradientSolver(const DataTerm& data, const PriorConfig& prior) : data_(data), prior_(prior) {
        const Projector& A = data.A;
        const int N = A.geometry().num_pixels();
        col_curv_.assign(static_cast<std::size_t>(N), 0.0);
        for (int j = 0; j < N; ++j) {
            const auto bins = A.column_bins(j);
            const auto vals = A.column_weights(j);
            double s = 0.0;
            for (std::size_t k = 0; k < bins.size(); ++k) {
                const double w = data.weights ? (*data.weights)[bins[k]] : data.uniform_weight;
                s += w * vals[k] * vals[k];
            }
            col_curv_[j] = s;
        }
    }

    void step(Array2D& x, Array2D& error) {
        const Projector& A = data_.A;
        const int n = A.geometry().n_side;
        Array2D we = error;
        if (data_.weights)
            for (std::size_t e = 0; e < we.size(); ++e) we[e] *= (*data_.weights)[e];
        else
            for (auto& v : we.flat()) v *= data_.uniform_weight;
        Array2D g = A.backproject(we);
        for (auto& v : g.flat()) v = -v;

        // Prior gradient and majorizer curvature per pixel.
        Array2D prior_diag(x.rows(), x.cols());
        if (prior_.beta > 0.0) {
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    double acc = 0.0, diag = 0.0;
                    for (const auto& o : kAll) {
                        const int r2 = r + o.dr, c2 = c + o.dc;
                        if (r2 < 0 || r2 >= n || c2 < 0 || c2 >= n) continue;
                        const double d = x(r, c) - x(r2, c2);
                        const double b = prior_.beta * o.w * prior_.surrogate_coefficient(d);
                        acc += b * d;
                        diag += b;
                    }
                    g(r, c) += acc;
                    prior_diag(r, c) = diag;
                }
        }
        Array2D z(g.rows(), g.cols());
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double m = col_curv_[j] + prior_diag[j];
            z[j] = m > 0.0 ? g[j] / m : g[j];
        }
        double beta_cg = 0.0;
        if (!dir_.empty()) {
            double num = 0.0;
            for (std::size_t j = 0; j < z.size(); ++j) num += z[j] * (g[j] - g_prev_[j]);
            beta_cg = zg_prev_ > 0.0 ? std::max(0.0, num / zg_prev_) : 0.0;
        } else {
            dir_ = Array2D(g.rows(), g.cols());
        }
        for (std::size_t j = 0; j < z.size(); ++j) dir_[j] = -z[j] + beta_cg * dir_[j];
        double gd = dot(g.flat(), dir_.flat());
        if (!(gd < 0.0)) {
            for (std::size_t j = 0; j < z.size(); ++j) dir_[j] = -z[j];
            gd = dot(g.flat(), dir_.flat());
        }
        zg_prev_ = dot(z.flat(), g.flat());
        g_prev_ = std::move(g);
        if (!(gd < 0.0)) return;

        const Array2D Ad = A.project(dir_);
        double curv = 0.0;
        for (std::size_t l = 0; l < Ad.size(); ++l)
            curv += (data_.weights ? (*data_.weights)[l] : data_.uniform_weight) * Ad[l] * Ad[l];
        if (prior_.beta > 0.0) {
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    for (const auto& o : kForward) {
                        const int r2 = r + o.dr, c2 = c + o.dc;
                        if (r2 < 0 || r2 >= n || c2 < 0 || c2 >= n) continue;
                        const double dd = dir_(r, c) - dir_(r2, c2);
                        curv += prior_.beta * o.w * prior_.surrogate_coefficient(x(r, c) - x(r2, c2)) * dd * dd;
                    }
        }
        if (!(curv > 0.0)) return;
        const double alpha = -gd / curv;
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += alpha * dir_[j];
        for (std::size_t l = 0; l < error.size(); ++l) error[l] -= alpha * Ad[l];
    }

private:
    const DataTerm& data_;
    const PriorConfig& prior_;
    std::vector<double> col_curv_;
    Array2D dir_;
    Array2D g_prev_;
    double zg_prev_ = 0.0;
};

}  // namespace

SolveResult solve_regularized(const DataTerm& data, const PriorConfig& prior, const Array2D& x_init,
                              const Array2D* Ax_init, int sweeps, TomoSolver solver, bool positivity,
                              std::uint64_t order_seed) {
    prior.validate();
    const Projector& A = data.A;
    const auto n = static_cast<std::size_t>(A.geometry().n_side);
    if (x_init.rows() != n || x_init.cols() != n) throw std::invalid_argument("solver: x_init shape mismatch");
    if (data.target.rows() != static_cast<std::size_t>(A.num_angles()) ||
        data.target.cols() != static_cast<std::size_t>(A.geometry().num_detector_pixels))
        throw std::invalid_argument("solver: target sinogram shape does not match projector");
    if (data.weights && !data.weights->same_shape(data.target))
        throw std::invalid_argument("solver: weight shape does not match target");
    if (sweeps < 0) throw std::invalid_argument("solver: sweeps must be >= 0");
    if (positivity && solver != TomoSolver::icd)
        throw std::invalid_argument("solver: positivity is only supported by icd");

    SolveResult res;
    res.x = x_init;
    Array2D error = Ax_init ? *Ax_init : A.project(x_init);
    if (!error.same_shape(data.target)) throw std::invalid_argument("solver: Ax_init shape mismatch");
    for (std::size_t l = 0; l < error.size(); ++l) error[l] = data.target[l] - error[l];

    auto cost = [&] { return data_cost(data, error) + prior_value(res.x, prior); };
    res.costs.push_back(cost());

    GradientSolver* gs = nullptr;
    std::optional<GradientSolver> gradient_solver;
    if (solver == TomoSolver::gradient) gs = &gradient_solver.emplace(data, prior);

    for (int s = 0; s < sweeps; ++s) {
        if (solver == TomoSolver::icd) {
            const auto order = visit_order(A.geometry().num_pixels(), order_seed, static_cast<std::uint64_t>(s));
            if (data.weights)
                icd_sweep<true>(data, prior, res.x, error, order, positivity);
            else
                icd_sweep<false>(data, prior, res.x, error, order, positivity);
        } else {
            gs->step(res.x, error);
        }
        const double c = cost();
        const double prev = res.costs.back();
        if (c > prev + 1e-10 * std::max(1.0, std::abs(prev))) res.monotone = false;
        res.costs.push_back(c);
    }
    res.Ax = data.target;
    for (std::size_t l = 0; l < error.size(); ++l) res.Ax[l] -= error[l];
    return res;
}

double tomo_cost(const Array2D& x, const Array2D& p_tilde, double sigma, const PriorConfig& prior,
                 const Projector& A) {
    const Array2D Ax = A.project(x);
    if (!Ax.same_shape(p_tilde)) throw std::invalid_argument("tomo_cost: p_tilde shape mismatch");
    double s = 0.0;
    for (std::size_t l = 0; l < Ax.size(); ++l) {
        const double d = p_tilde[l] - Ax[l];
        s += d * d;
    }
    return 0.5 * s / (sigma * sigma) + prior_value(x, prior);
}

SolveResult tomo_partial(const Array2D& x_init, const Array2D& p_tilde, const TomoConfig& config,
                         const PriorConfig& prior, const Projector& A, const Array2D* Ax_init) {
    config.validate();
    DataTerm data{A, p_tilde, nullptr, 1.0 / (config.sigma * config.sigma)};
    return solve_regularized(data, prior, x_init, Ax_init, config.n_t, config.solver, config.positivity,
                             config.order_seed);
}

SolveResult mbir_full(const Array2D& y_views, const Projector& view_projector, const Array2D& D,
                      const PriorConfig& prior, int iterations, const Array2D* x_init, TomoSolver solver,
                      bool positivity) {
    if (iterations < 1) throw std::invalid_argument("mbir: iterations must be >= 1");
    const auto n = static_cast<std::size_t>(view_projector.geometry().n_side);
    const Array2D zero(n, n);
    DataTerm data{view_projector, y_views, &D, 1.0};
    return solve_regularized(data, prior, x_init ? *x_init : zero, nullptr, iterations, solver, positivity, 0);
}

}  // namespace codex
