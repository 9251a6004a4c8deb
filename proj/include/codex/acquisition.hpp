#pragma once

#include <cstdint>
#include <vector>

#include "codex/array2d.hpp"
#include "codex/projector.hpp"
#include "codex/sampling.hpp"

namespace codex {

/// Row-stochastic coded-sum operator C. Maps an N_theta x M_d micro-sinogram to an
/// M_theta x M_d view-sinogram; every detector column is processed independently.
class CodedSum {
public:
    CodedSum(const SamplingPlan& plan, const ExposureCode& code);

    const SamplingPlan& plan() const { return plan_; }
    const ExposureCode& code() const { return code_; }

    Array2D apply(const Array2D& micro) const;
    Array2D apply_transpose(const Array2D& views) const;

    /// (view, micro) index pairs of the open chops; each carries weight 1/cbar.
    struct Tap {
        int view;
        int micro;
    };
    const std::vector<Tap>& taps() const { return taps_; }
    double tap_weight() const { return 1.0 / code_.cbar; }

private:
    SamplingPlan plan_;
    ExposureCode code_;
    std::vector<Tap> taps_;
};

Array2D apply_C(const SamplingPlan& plan, const ExposureCode& code, const Array2D& micro);
Array2D apply_C_transpose(const SamplingPlan& plan, const ExposureCode& code, const Array2D& views);

/// Detected photon counts for M_theta views.
///
/// With an infinite lambda0 the counts are noiseless and stored per unit flux, so a blank
/// scan reads cbar instead of cbar * lambda0.
struct PhotonCounts {
    Array2D values;
    double lambda0 = 1.0;
    int cbar = 1;
    bool noisy = false;
};

/// lambda_bar = cbar * lambda0 * C exp(-A x); Poisson draws keyed by (seed, view, detector)
/// when lambda0 is finite.
PhotonCounts simulate_counts(const Array2D& image, const Projector& micro_projector,
                             const SamplingPlan& plan, const ExposureCode& code, double lambda0,
                             std::uint64_t seed);

/// Single Poisson draw from the stream keyed by (seed, view, detector).
double poisson_draw(double mean, std::uint64_t seed, std::uint64_t view, std::uint64_t detector);

struct Projections {
    Array2D y;
    /// 1 where the count was below the floor and clamped before the log.
    std::vector<std::uint8_t> clamp_mask;
    std::size_t clamped = 0;
};

/// y = -log(max(count, floor) / (cbar * lambda0)). Noiseless counts are never clamped.
/// Throws ConfigError for noisy counts without a finite positive lambda0.
Projections counts_to_projections(const PhotonCounts& counts, double count_floor = 1.0);

/// Diagonal of D = diag(w * exp(-y)).
struct WeightMatrix {
    Array2D weights;
    double w = 1.0;
};

WeightMatrix compute_weights(const Array2D& y, double w);
/// w = 1 / mean(exp(-y)), so the weights average to one.
double default_weight_scale(const Array2D& y);

/// Codes a dense N_theta-row projection set into M_theta views:
/// y_i = -log(sum_k c_k/cbar * exp(-dense[(iK+k) mod N_theta])).
Array2D bin_dense_projections(const Array2D& dense_y, const SamplingPlan& plan, const ExposureCode& code);

/// -log(C exp(-p)): the noiseless view projections implied by micro-projections p.
Array2D coded_log_projections(const Array2D& micro_p, const CodedSum& C);

}  // namespace codex
