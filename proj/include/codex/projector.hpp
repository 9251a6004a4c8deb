#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "codex/array2d.hpp"

namespace codex {

/// 2D parallel-beam geometry. The image is n_side x n_side square pixels centered on the
/// rotation axis; the detector is a line of num_detector_pixels bins centered on the axis
/// (shifted by center_offset, in length units).
struct Geometry {
    int n_side = 0;
    double pixel_pitch = 1.0;
    int num_detector_pixels = 0;
    double detector_pitch = 1.0;
    double center_offset = 0.0;

    /// Square image with a detector covering the image diagonal (ceil(sqrt(2) * n_side) bins).
    static Geometry square(int n_side, double pixel_pitch = 1.0);

    int num_pixels() const { return n_side * n_side; }
    /// Throws std::invalid_argument unless sizes >= 1 and pitches > 0.
    void validate() const;

    friend bool operator==(const Geometry&, const Geometry&) = default;
};

enum class SinogramRole { micro, view };

/// Angle-by-detector array (rows = angles).
struct Sinogram {
    Array2D values;
    std::vector<double> angles;
    SinogramRole role = SinogramRole::micro;
};

/// Forward projector A and its exact transpose for a fixed geometry and angle list.
///
/// Each square pixel projects onto the detector as a trapezoid (the convolution of two
/// boxes of widths pitch*|cos| and pitch*|sin|) whose area equals the pixel area. A
/// detector bin's weight is the trapezoid's integral over the bin divided by the bin
/// width, so projections are bin-averaged line integrals. The weights are stored once
/// per pixel (column-compressed); project scatters and backproject gathers through
/// the same entries, which makes the pair an exact adjoint.
class Projector {
public:
    Projector(const Geometry& geometry, std::vector<double> angles);

    const Geometry& geometry() const { return geometry_; }
    const std::vector<double>& angles() const { return angles_; }
    int num_angles() const { return static_cast<int>(angles_.size()); }
    int num_bins() const { return num_angles() * geometry_.num_detector_pixels; }
    std::size_t nonzeros() const { return values_.size(); }

    /// image: n_side x n_side -> sinogram: num_angles x num_detector_pixels.
    Array2D project(const Array2D& image) const;
    /// sinogram: num_angles x num_detector_pixels -> image: n_side x n_side.
    Array2D backproject(const Array2D& sinogram) const;

    /// Nonzero entries of column `pixel` (flat row-major pixel index). Bin index = angle*M_d + det.
    std::span<const std::uint32_t> column_bins(int pixel) const;
    std::span<const float> column_weights(int pixel) const;

private:
    Geometry geometry_;
    std::vector<double> angles_;
    std::vector<std::size_t> col_start_;
    std::vector<std::uint32_t> bins_;
    std::vector<float> values_;
};

/// One-shot forward projection.
Sinogram project(const Array2D& image, const Geometry& geometry, const std::vector<double>& angles,
                 SinogramRole role = SinogramRole::micro);
/// One-shot backprojection with the exact transpose of project().
Array2D backproject(const Sinogram& sinogram, const Geometry& geometry);

/// Integral of the unit-area trapezoid footprint from -inf to u, for box widths w1, w2.
double trapezoid_cdf(double u, double w1, double w2);

}  // namespace codex
