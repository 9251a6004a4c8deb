#pragma once

#include <string>
#include <vector>

#include "codex/array2d.hpp"
#include "codex/phantom.hpp"

namespace codex {

/// ||x - x0|| / ||x0||. Throws std::invalid_argument on shape mismatch or an all-zero x0.
double nrmse(const Array2D& x, const Array2D& x0);
/// Root-mean-square difference.
double rmse(const Array2D& x, const Array2D& x0);

enum class MtfDirection { tangential, radial };
std::string to_string(MtfDirection d);

struct MtfCurve {
    /// Cycles per pixel, 0 .. 0.5.
    std::vector<double> frequencies;
    /// Normalized so that magnitudes[0] == 1.
    std::vector<double> magnitudes;
    MtfDirection direction = MtfDirection::tangential;
    /// Radius (pixels) at which the curve was measured.
    double radius = 0.0;

    /// Linear interpolation; clamps outside the sampled range.
    double at(double frequency) const;
};

/// A line profile across a single edge. Coordinates are in pixels relative to the image
/// center with y pointing up. Samples run from -half_length to +half_length in steps of `step`.
struct EdgeProfile {
    double x0 = 0.0;
    double y0 = 0.0;
    /// Unit normal to the edge at (x0, y0).
    double nx = 1.0;
    double ny = 0.0;
    double half_length = 8.0;
    double step = 0.5;
    /// Sample along the circle about the image center through (x0, y0) instead of a straight
    /// line; the arc is tangent to the normal at the edge. Used for tangential profiles.
    bool follow_arc = false;
};

/// Edge spread function sampled with bilinear interpolation (zero outside the image).
std::vector<double> sample_profile(const Array2D& image, const EdgeProfile& profile);

/// ESF -> central-difference LSF -> Hamming window -> zero-padded FFT magnitude -> /DC.
/// Throws std::invalid_argument for fewer than 16 samples or a zero-contrast profile.
MtfCurve mtf_from_esf(const std::vector<double>& esf, double step, MtfDirection direction, double radius = 0.0);

MtfCurve mtf_from_edge(const Array2D& image, const EdgeProfile& profile, MtfDirection direction);

struct MtfReportConfig {
    /// Radii as fractions of the phantom radius.
    double near_frac = 0.25;
    double far_frac = 0.75;
    /// Upper bound on the sample spacing; shortened so every profile has at least 16 samples.
    double step = 0.25;
    /// Azimuths averaged for radial curves.
    int radial_azimuths = 16;
};

struct MtfReport {
    std::vector<MtfCurve> curves;

    /// Curve for a direction at the near (false) or far (true) radius.
    const MtfCurve& get(MtfDirection direction, bool far) const;
};

/// Siemens star phantoms yield tangential curves averaged over all spoke edges; concentric
/// circles yield radial curves averaged over azimuths, with the radii snapped to the nearest
/// ring edge. One curve per (direction, radius).
MtfReport mtf_report(const Array2D& reconstruction, const PhantomSpec& phantom, const MtfReportConfig& config = {});

}  // namespace codex
