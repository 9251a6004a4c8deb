#include "codex/admm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "codex/errors.hpp"

namespace codex {

void CodexConfig::validate() const {
    if (outer_iterations < 1) throw std::invalid_argument("codex: outer_iterations must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("codex: sigma must be positive");
    if (init_iterations < 1) throw std::invalid_argument("codex: init_iterations must be >= 1");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("codex: tolerance must be >= 0");
    if (!(divergence_factor > 1.0)) throw std::invalid_argument("codex: divergence_factor must be > 1");
    deblur.validate();
    tomo.validate();
    prior.validate();
}

ResidualPoint residuals(const Array2D& p, const Array2D& Ax, const Array2D& Ax_prev) {
    ResidualPoint r;
    r.primal = rms_diff(Ax.flat(), p.flat());
    r.dual = rms_diff(Ax.flat(), Ax_prev.flat());
    return r;
}

CodexResult codex_reconstruct(const Array2D& y, const Array2D& D, const SamplingPlan& plan,
                              const ExposureCode& code, const Geometry& geometry, const CodexConfig& config,
                              const std::optional<AdmmInit>& init, const AdmmObserver& observer) {
    Projector A(geometry, plan.micro_angles_rad());
    return codex_reconstruct(y, D, plan, code, A, config, init, observer);
}

CodexResult codex_reconstruct(const Array2D& y, const Array2D& D, const SamplingPlan& plan,
                              const ExposureCode& code, const Projector& A, const CodexConfig& config,
                              const std::optional<AdmmInit>& init, const AdmmObserver& observer) {
    config.validate();
    if (A.num_angles() != plan.N_theta)
        throw std::invalid_argument("codex: projector must cover the plan's N_theta micro-angles");
    const auto md = static_cast<std::size_t>(A.geometry().num_detector_pixels);
    if (y.rows() != static_cast<std::size_t>(plan.M_theta) || y.cols() != md)
        throw std::invalid_argument("codex: y must be M_theta x M_d");
    if (!check_unique_angles(plan).unique)
        throw std::invalid_argument("codex: plan repeats a view angle; reduce M_theta to N_theta / gcd(K, N_theta)");

    DeblurConfig dcfg = config.deblur;
    dcfg.sigma = config.sigma;
    TomoConfig tcfg = config.tomo;
    tcfg.sigma = config.sigma;

    const CodedSum C(plan, code);
    const DeblurObjective objective(C, y, D, config.sigma);

    AdmmState s;
    s.sigma = config.sigma;
    if (init) {
        s.x = init->x;
        s.Ax = A.project(s.x);
        s.p = init->p;
        s.u = init->u;
        if (!s.p.same_shape(s.Ax) || !s.u.same_shape(s.Ax))
            throw std::invalid_argument("codex: initial p and u must be N_theta x M_d");
    } else {
        Projector view_projector(A.geometry(), plan.nominal_view_angles_rad());
        s.x = mbir_full(y, view_projector, D, config.prior, config.init_iterations).x;
        s.Ax = A.project(s.x);
        s.p = s.Ax;
        s.u = Array2D(s.Ax.rows(), s.Ax.cols());
    }

    CodexResult result;
    auto notify = [&](AdmmStage stage) {
        if (observer) observer(stage, s);
    };

    double first_primal = -1.0;
    const double primal_floor = 1e-6 * (norm2(s.Ax.flat()) / std::sqrt(static_cast<double>(s.Ax.size())) + 1e-12);
    Array2D p_tilde(s.p.rows(), s.p.cols());
    for (int t = 1; t <= config.outer_iterations; ++t) {
        s.iteration = t;
        for (std::size_t l = 0; l < p_tilde.size(); ++l) p_tilde[l] = s.Ax[l] - s.u[l];
        DeblurResult dr = deblur_partial(s.p, p_tilde, objective, dcfg);
        s.p = std::move(dr.p);
        result.stalled_deblur_iterations += dr.stalled_iterations;
        result.clamp_events += dr.clamp_events;
        notify(AdmmStage::deblur);

        for (std::size_t l = 0; l < p_tilde.size(); ++l) p_tilde[l] = s.p[l] + s.u[l];
        SolveResult tr = tomo_partial(s.x, p_tilde, tcfg, config.prior, A, &s.Ax);
        Array2D Ax_prev = std::move(s.Ax);
        s.x = std::move(tr.x);
        s.Ax = std::move(tr.Ax);
        notify(AdmmStage::tomo);

        for (std::size_t l = 0; l < s.u.size(); ++l) s.u[l] += s.p[l] - s.Ax[l];
        ResidualPoint rp = residuals(s.p, s.Ax, Ax_prev);
        rp.iteration = t;
        s.history.push_back(rp);
        notify(AdmmStage::dual);

        if (!std::isfinite(rp.primal) || !std::isfinite(rp.dual)) {
            std::ostringstream msg;
            msg << "codex: non-finite residual at iteration " << t;
            throw NumericalError(msg.str());
        }
        if (first_primal < 0.0) first_primal = std::max(rp.primal, primal_floor);
        if (rp.primal > config.divergence_factor * first_primal) {
            std::ostringstream msg;
            msg << "codex: primal residual diverged at iteration " << t << " (" << rp.primal << " > "
                << config.divergence_factor << " x " << first_primal << "); try a different sigma";
            throw NumericalError(msg.str());
        }
        if (config.tolerance > 0.0 && rp.primal < config.tolerance && rp.dual < config.tolerance) break;
    }

    result.x = s.x;
    result.history = s.history;
    result.iterations = s.iteration;
    result.state = std::move(s);
    return result;
}

}  // namespace codex
