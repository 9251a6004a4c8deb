#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "codex/acquisition.hpp"
#include "codex/array2d.hpp"
#include "codex/deblur.hpp"
#include "codex/projector.hpp"
#include "codex/sampling.hpp"
#include "codex/tomo.hpp"

namespace codex {

struct ResidualPoint {
    int iteration = 0;
    /// RMSE(A x_t, p_t)
    double primal = 0.0;
    /// RMSE(A x_t, A x_{t-1})
    double dual = 0.0;
};

/// Snapshot of the ADMM variables after a stage.
struct AdmmState {
    Array2D p;
    Array2D x;
    /// Scaled dual variable, same shape as p.
    Array2D u;
    Array2D Ax;
    double sigma = 1.0;
    int iteration = 0;
    std::vector<ResidualPoint> history;
};

enum class AdmmStage { deblur, tomo, dual };

struct CodexConfig {
    int outer_iterations = 100;
    double sigma = 1.0;
    DeblurConfig deblur;
    TomoConfig tomo;
    PriorConfig prior;
    /// Iterations of the nominal-angle MBIR pass that provides x_0.
    int init_iterations = 20;
    /// Stop early once both residuals fall below this value (0 disables).
    double tolerance = 0.0;
    /// Abort when the primal residual exceeds this multiple of its first value.
    double divergence_factor = 1e3;

    void validate() const;

    friend bool operator==(const CodexConfig&, const CodexConfig&) = default;
};

/// Optional explicit starting point; when absent x_0 comes from a short MBIR pass,
/// p_0 = A x_0 and u_0 = 0.
struct AdmmInit {
    Array2D x;
    Array2D p;
    Array2D u;
};

struct CodexResult {
    Array2D x;
    AdmmState state;
    std::vector<ResidualPoint> history;
    int iterations = 0;
    int stalled_deblur_iterations = 0;
    std::size_t clamp_events = 0;
};

using AdmmObserver = std::function<void(AdmmStage, const AdmmState&)>;

/// Residuals of a state: primal = RMSE(Ax, p), dual = RMSE(Ax, Ax_prev).
ResidualPoint residuals(const Array2D& p, const Array2D& Ax, const Array2D& Ax_prev);

/// Coded-exposure reconstruction. Each outer iteration runs
///   p <- F_d(Ax - u; p),  x <- F_t(p + u; x),  u <- u + p - Ax
/// with partial deblurring (Armijo gradient steps) and partial tomographic sweeps.
/// Throws NumericalError when the primal residual diverges.
CodexResult codex_reconstruct(const Array2D& y, const Array2D& D, const SamplingPlan& plan,
                              const ExposureCode& code, const Geometry& geometry, const CodexConfig& config,
                              const std::optional<AdmmInit>& init = std::nullopt,
                              const AdmmObserver& observer = {});

/// Same, reusing a prebuilt micro-angle projector.
CodexResult codex_reconstruct(const Array2D& y, const Array2D& D, const SamplingPlan& plan,
                              const ExposureCode& code, const Projector& micro_projector,
                              const CodexConfig& config, const std::optional<AdmmInit>& init = std::nullopt,
                              const AdmmObserver& observer = {});

}  // namespace codex
