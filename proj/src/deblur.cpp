#include "codex/deblur.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace codex {

void DeblurConfig::validate() const {
    if (n_p < 1) throw std::invalid_argument("deblur: n_p must be >= 1");
    if (!(eta0 > 0.0)) throw std::invalid_argument("deblur: eta0 must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("deblur: epsilon must be in (0, 1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("deblur: sigma must be positive");
    if (max_halvings < 1) throw std::invalid_argument("deblur: max_halvings must be >= 1");
}

DeblurObjective::DeblurObjective(const CodedSum& C, const Array2D& y, const Array2D& D, double sigma)
    : C_(C), y_(y), D_(D), inv_sigma2_(std::isinf(sigma) ? 0.0 : 1.0 / (sigma * sigma)) {
    if (!(sigma > 0.0)) throw std::invalid_argument("deblur: sigma must be positive");
    if (!y.same_shape(D)) throw std::invalid_argument("deblur: y and D shapes differ");
    if (y.rows() != static_cast<std::size_t>(C.plan().M_theta))
        throw std::invalid_argument("deblur: y must have M_theta rows");
}

Array2D DeblurObjective::transmission(const Array2D& p) const {
    if (p.rows() != static_cast<std::size_t>(C_.plan().N_theta) || p.cols() != y_.cols())
        throw std::invalid_argument("deblur: p must be N_theta x M_d");
    Array2D q(p.rows(), p.cols());
    for (std::size_t e = 0; e < p.size(); ++e) {
        double v = p[e];
        if (v > kExpClamp || v < -kExpClamp) {
            v = std::clamp(v, -kExpClamp, kExpClamp);
            ++clamp_events_;
        }
        q[e] = std::exp(-v);
    }
    return q;
}

Array2D DeblurObjective::residual(const Array2D& p) const {
    Array2D r = C_.apply(transmission(p));
    for (std::size_t e = 0; e < r.size(); ++e) r[e] = y_[e] + std::log(r[e]);
    return r;
}

double DeblurObjective::cost(const Array2D& p, const Array2D& p_tilde) const {
    if (!p.same_shape(p_tilde)) throw std::invalid_argument("deblur: p and p_tilde shapes differ");
    const Array2D r = residual(p);
    double data = 0.0;
    for (std::size_t e = 0; e < r.size(); ++e) data += D_[e] * r[e] * r[e];
    double prox = 0.0;
    if (inv_sigma2_ > 0.0)
        for (std::size_t e = 0; e < p.size(); ++e) {
            const double d = p[e] - p_tilde[e];
            prox += d * d;
        }
    return 0.5 * data + 0.5 * inv_sigma2_ * prox;
}

Array2D DeblurObjective::gradient(const Array2D& p, const Array2D& p_tilde) const {
    if (!p.same_shape(p_tilde)) throw std::invalid_argument("deblur: p and p_tilde shapes differ");
    const Array2D q = transmission(p);
    Array2D Cq = C_.apply(q);
    // v = diag(C q)^-1 D r
    for (std::size_t e = 0; e < Cq.size(); ++e) {
        const double r = y_[e] + std::log(Cq[e]);
        Cq[e] = D_[e] * r / Cq[e];
    }
    Array2D g = C_.apply_transpose(Cq);
    for (std::size_t e = 0; e < g.size(); ++e) g[e] = -q[e] * g[e] + inv_sigma2_ * (p[e] - p_tilde[e]);
    return g;
}

double deblur_cost(const Array2D& p, const Array2D& p_tilde, const Array2D& y, const Array2D& D, double sigma,
                   const SamplingPlan& plan, const ExposureCode& code) {
    CodedSum C(plan, code);
    return DeblurObjective(C, y, D, sigma).cost(p, p_tilde);
}

Array2D deblur_gradient(const Array2D& p, const Array2D& p_tilde, const Array2D& y, const Array2D& D,
                        double sigma, const SamplingPlan& plan, const ExposureCode& code) {
    CodedSum C(plan, code);
    return DeblurObjective(C, y, D, sigma).gradient(p, p_tilde);
}

DeblurResult deblur_partial(const Array2D& p_init, const Array2D& p_tilde, const DeblurObjective& objective,
                            const DeblurConfig& config) {
    config.validate();
    const std::size_t clamp_before = objective.clamp_events();
    DeblurResult res;
    res.p = p_init;
    double f = objective.cost(res.p, p_tilde);
    res.costs.push_back(f);

    Array2D trial(res.p.rows(), res.p.cols());
    for (int it = 0; it < config.n_p; ++it) {
        const Array2D g = objective.gradient(res.p, p_tilde);
        const double gg = dot(g.flat(), g.flat());
        double eta = config.eta0;
        bool accepted = false;
        for (int h = 0; h <= config.max_halvings; ++h) {
            for (std::size_t e = 0; e < trial.size(); ++e) trial[e] = res.p[e] - eta * g[e];
            const double f_trial = objective.cost(trial, p_tilde);
            if (f_trial <= f - eta * config.epsilon * gg) {
                std::swap(res.p, trial);
                f = f_trial;
                accepted = true;
                break;
            }
            eta *= 0.5;
            ++res.total_halvings;
        }
        if (!accepted) ++res.stalled_iterations;
        res.costs.push_back(f);
    }
    res.clamp_events = objective.clamp_events() - clamp_before;
    return res;
}

DeblurResult deblur_partial(const Array2D& p_init, const Array2D& p_tilde, const Array2D& y, const Array2D& D,
                            const DeblurConfig& config, const SamplingPlan& plan, const ExposureCode& code) {
    CodedSum C(plan, code);
    DeblurObjective objective(C, y, D, config.sigma);
    return deblur_partial(p_init, p_tilde, objective, config);
}

}  // namespace codex
