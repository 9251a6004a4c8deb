#include "codex/acquisition.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "codex/errors.hpp"
#include "codex/rng.hpp"

namespace codex {

CodedSum::CodedSum(const SamplingPlan& plan, const ExposureCode& code) : plan_(plan), code_(code) {
    if (code_.length() != plan_.K)
        throw std::invalid_argument("code length " + std::to_string(code_.length()) +
                                    " does not match plan K = " + std::to_string(plan_.K));
    if (code_.cbar < 1) throw std::invalid_argument("code has no open chops");
    taps_.reserve(static_cast<std::size_t>(plan_.M_theta) * code_.cbar);
    for (int i = 0; i < plan_.M_theta; ++i)
        for (int k = 0; k < plan_.K; ++k)
            if (code_.bits[k]) taps_.push_back({i, micro_index(plan_, i, k)});
}

Array2D CodedSum::apply(const Array2D& micro) const {
    if (micro.rows() != static_cast<std::size_t>(plan_.N_theta))
        throw std::invalid_argument("apply_C: input must have N_theta rows");
    const std::size_t md = micro.cols();
    Array2D out(static_cast<std::size_t>(plan_.M_theta), md);
    const double wt = tap_weight();
    for (const auto& t : taps_) {
        auto dst = out.row(t.view);
        auto src = micro.row(t.micro);
        for (std::size_t d = 0; d < md; ++d) dst[d] += wt * src[d];
    }
    return out;
}

Array2D CodedSum::apply_transpose(const Array2D& views) const {
    if (views.rows() != static_cast<std::size_t>(plan_.M_theta))
        throw std::invalid_argument("apply_C_transpose: input must have M_theta rows");
    const std::size_t md = views.cols();
    Array2D out(static_cast<std::size_t>(plan_.N_theta), md);
    const double wt = tap_weight();
    for (const auto& t : taps_) {
        auto dst = out.row(t.micro);
        auto src = views.row(t.view);
        for (std::size_t d = 0; d < md; ++d) dst[d] += wt * src[d];
    }
    return out;
}

Array2D apply_C(const SamplingPlan& plan, const ExposureCode& code, const Array2D& micro) {
    return CodedSum(plan, code).apply(micro);
}

Array2D apply_C_transpose(const SamplingPlan& plan, const ExposureCode& code, const Array2D& views) {
    return CodedSum(plan, code).apply_transpose(views);
}

double poisson_draw(double mean, std::uint64_t seed, std::uint64_t view, std::uint64_t detector) {
    if (!(mean > 0.0)) return 0.0;
    CounterRng rng(seed, view, detector);
    std::poisson_distribution<long long> dist(mean);
    return static_cast<double>(dist(rng));
}

PhotonCounts simulate_counts(const Array2D& image, const Projector& micro_projector,
                             const SamplingPlan& plan, const ExposureCode& code, double lambda0,
                             std::uint64_t seed) {
    if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive (or infinite)");
    if (micro_projector.num_angles() != plan.N_theta)
        throw std::invalid_argument("simulate_counts: projector must cover the plan's N_theta micro-angles");
    CodedSum C(plan, code);
    Array2D transmission = micro_projector.project(image);
    for (auto& v : transmission.flat()) v = std::exp(-v);
    Array2D mean = C.apply(transmission);

    PhotonCounts counts;
    counts.cbar = code.cbar;
    counts.lambda0 = lambda0;
    const bool noiseless = std::isinf(lambda0);
    const double scale = code.cbar * (noiseless ? 1.0 : lambda0);
    for (auto& v : mean.flat()) v *= scale;
    if (noiseless) {
        counts.values = std::move(mean);
        counts.noisy = false;
        return counts;
    }
    counts.values = Array2D(mean.rows(), mean.cols());
    for (std::size_t i = 0; i < mean.rows(); ++i)
        for (std::size_t d = 0; d < mean.cols(); ++d) counts.values(i, d) = poisson_draw(mean(i, d), seed, i, d);
    counts.noisy = true;
    return counts;
}

Projections counts_to_projections(const PhotonCounts& counts, double count_floor) {
    const bool noiseless = !counts.noisy;
    if (!noiseless && !(std::isfinite(counts.lambda0) && counts.lambda0 > 0.0))
        throw ConfigError("noisy counts need a finite positive lambda0 for blank-scan normalization");
    if (noiseless && !(counts.lambda0 > 0.0)) throw ConfigError("lambda0 must be positive");
    if (counts.cbar < 1) throw ConfigError("counts carry an invalid code normalizer");

    const double blank = counts.cbar * (std::isinf(counts.lambda0) ? 1.0 : counts.lambda0);
    Projections out;
    out.y = Array2D(counts.values.rows(), counts.values.cols());
    out.clamp_mask.assign(counts.values.size(), 0);
    for (std::size_t e = 0; e < counts.values.size(); ++e) {
        double v = counts.values[e];
        if (v < 0.0) throw std::invalid_argument("photon counts must be nonnegative");
        if (noiseless) {
            if (v < std::numeric_limits<double>::min()) {
                v = std::numeric_limits<double>::min();
                out.clamp_mask[e] = 1;
                ++out.clamped;
            }
        } else if (v < count_floor) {
            v = count_floor;
            out.clamp_mask[e] = 1;
            ++out.clamped;
        }
        out.y[e] = -std::log(v / blank);
    }
    return out;
}

WeightMatrix compute_weights(const Array2D& y, double w) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("weight scale w must be positive");
    WeightMatrix D{Array2D(y.rows(), y.cols()), w};
    for (std::size_t e = 0; e < y.size(); ++e) {
        if (!std::isfinite(y[e])) throw std::invalid_argument("projections must be finite");
        D.weights[e] = w * std::exp(-y[e]);
    }
    return D;
}

double default_weight_scale(const Array2D& y) {
    if (y.empty()) throw std::invalid_argument("empty projection array");
    double s = 0.0;
    for (double v : y.flat()) s += std::exp(-v);
    return static_cast<double>(y.size()) / s;
}

Array2D coded_log_projections(const Array2D& micro_p, const CodedSum& C) {
    Array2D t = micro_p;
    for (auto& v : t.flat()) v = std::exp(-v);
    Array2D out = C.apply(t);
    for (auto& v : out.flat()) v = -std::log(v);
    return out;
}

Array2D bin_dense_projections(const Array2D& dense_y, const SamplingPlan& plan, const ExposureCode& code) {
    if (dense_y.rows() != static_cast<std::size_t>(plan.N_theta))
        throw std::invalid_argument("bin_dense_projections: dense data has " + std::to_string(dense_y.rows()) +
                                    " rows, plan needs N_theta = " + std::to_string(plan.N_theta));
    return coded_log_projections(dense_y, CodedSum(plan, code));
}

}  // namespace codex
