#include "codex/projector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace codex {

Geometry Geometry::square(int n_side, double pixel_pitch) {
    Geometry g;
    g.n_side = n_side;
    g.pixel_pitch = pixel_pitch;
    g.num_detector_pixels = static_cast<int>(std::ceil(std::sqrt(2.0) * n_side));
    g.detector_pitch = pixel_pitch;
    return g;
}

void Geometry::validate() const {
    if (n_side < 1) throw std::invalid_argument("geometry: n_side must be >= 1");
    if (num_detector_pixels < 1) throw std::invalid_argument("geometry: detector must have >= 1 pixel");
    if (!(pixel_pitch > 0.0) || !(detector_pitch > 0.0))
        throw std::invalid_argument("geometry: pitches must be positive");
    if (!std::isfinite(center_offset)) throw std::invalid_argument("geometry: center offset must be finite");
}

double trapezoid_cdf(double u, double w1, double w2) {
    if (w1 < w2) std::swap(w1, w2);
    const double h1 = 0.5 * (w1 + w2);
    if (u <= -h1) return 0.0;
    if (u >= h1) return 1.0;
    if (w2 < 1e-9 * w1) return (u + 0.5 * w1) / w1;
    const double h2 = 0.5 * (w1 - w2);
    if (u <= -h2) {
        double d = u + h1;
        return d * d / (2.0 * w1 * w2);
    }
    if (u <= h2) return w2 / (2.0 * w1) + (u + h2) / w1;
    double d = h1 - u;
    return 1.0 - d * d / (2.0 * w1 * w2);
}

Projector::Projector(const Geometry& geometry, std::vector<double> angles)
    : geometry_(geometry), angles_(std::move(angles)) {
    geometry_.validate();
    for (double a : angles_)
        if (!std::isfinite(a)) throw std::invalid_argument("projector: angles must be finite");

    const int n = geometry_.n_side;
    const int md = geometry_.num_detector_pixels;
    const double s = geometry_.pixel_pitch;
    const double dp = geometry_.detector_pitch;
    const double det_center = 0.5 * (md - 1);
    const double area_scale = s * s / dp;

    std::vector<double> cosv(angles_.size()), sinv(angles_.size());
    for (std::size_t a = 0; a < angles_.size(); ++a) {
        cosv[a] = std::cos(angles_[a]);
        sinv[a] = std::sin(angles_[a]);
    }

    col_start_.assign(static_cast<std::size_t>(n) * n + 1, 0);
    bins_.reserve(static_cast<std::size_t>(n) * n * angles_.size() * 3);
    values_.reserve(bins_.capacity());

    for (int r = 0; r < n; ++r) {
        const double cy = (0.5 * (n - 1) - r) * s;
        for (int c = 0; c < n; ++c) {
            const double cx = (c - 0.5 * (n - 1)) * s;
            for (std::size_t a = 0; a < angles_.size(); ++a) {
                const double w1 = s * std::abs(cosv[a]);
                const double w2 = s * std::abs(sinv[a]);
                const double half = 0.5 * (w1 + w2);
                const double t0 = cx * cosv[a] + cy * sinv[a];
                const double u_lo = (t0 - half - geometry_.center_offset) / dp + det_center;
                const double u_hi = (t0 + half - geometry_.center_offset) / dp + det_center;
                const int d_lo = std::max(0, static_cast<int>(std::floor(u_lo + 0.5)));
                const int d_hi = std::min(md - 1, static_cast<int>(std::floor(u_hi + 0.5)));
                for (int d = d_lo; d <= d_hi; ++d) {
                    const double t_lo = (d - 0.5 - det_center) * dp + geometry_.center_offset;
                    const double weight =
                        area_scale * (trapezoid_cdf(t_lo + dp - t0, w1, w2) - trapezoid_cdf(t_lo - t0, w1, w2));
                    if (weight <= 0.0) continue;
                    bins_.push_back(static_cast<std::uint32_t>(a * md + d));
                    values_.push_back(static_cast<float>(weight));
                }
            }
            col_start_[static_cast<std::size_t>(r) * n + c + 1] = bins_.size();
        }
    }
    bins_.shrink_to_fit();
    values_.shrink_to_fit();
}

std::span<const std::uint32_t> Projector::column_bins(int pixel) const {
    const auto b = col_start_[pixel];
    return {bins_.data() + b, col_start_[pixel + 1] - b};
}

std::span<const float> Projector::column_weights(int pixel) const {
    const auto b = col_start_[pixel];
    return {values_.data() + b, col_start_[pixel + 1] - b};
}

Array2D Projector::project(const Array2D& image) const {
    const int n = geometry_.n_side;
    if (image.rows() != static_cast<std::size_t>(n) || image.cols() != static_cast<std::size_t>(n))
        throw std::invalid_argument("project: image shape does not match geometry");
    Array2D out(angles_.size(), static_cast<std::size_t>(geometry_.num_detector_pixels));
    auto sino = out.flat();
    for (int j = 0; j < n * n; ++j) {
        const double xj = image[j];
        if (xj == 0.0) continue;
        for (std::size_t e = col_start_[j]; e < col_start_[j + 1]; ++e) sino[bins_[e]] += values_[e] * xj;
    }
    return out;
}

Array2D Projector::backproject(const Array2D& sinogram) const {
    if (sinogram.rows() != angles_.size() ||
        sinogram.cols() != static_cast<std::size_t>(geometry_.num_detector_pixels))
        throw std::invalid_argument("backproject: sinogram shape does not match projector");
    const int n = geometry_.n_side;
    Array2D out(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    auto s = sinogram.flat();
    for (int j = 0; j < n * n; ++j) {
        double acc = 0.0;
        for (std::size_t e = col_start_[j]; e < col_start_[j + 1]; ++e) acc += values_[e] * s[bins_[e]];
        out[j] = acc;
    }
    return out;
}

Sinogram project(const Array2D& image, const Geometry& geometry, const std::vector<double>& angles,
                 SinogramRole role) {
    Projector proj(geometry, angles);
    return Sinogram{proj.project(image), angles, role};
}

Array2D backproject(const Sinogram& sinogram, const Geometry& geometry) {
    Projector proj(geometry, sinogram.angles);
    return proj.backproject(sinogram.values);
}

}  // namespace codex
