#pragma once

#include <string>
#include <vector>

#include "codex/array2d.hpp"
#include "codex/projector.hpp"
#include "codex/sampling.hpp"

namespace codex {

struct DeblurLinearResult {
    Array2D p;
    /// ||y - C p|| over all detector pixels, before the first and after every CG iteration.
    std::vector<double> residual_norms;
};

/// Least-squares view interpolation: per detector pixel, CGLS on
///   min_p 1/2 ||y - C p||^2 + ridge/2 ||p||^2
/// starting from p = 0, so the ridge -> 0 limit is the minimum-norm solution.
DeblurLinearResult deblur_linear(const Array2D& y, const SamplingPlan& plan, const ExposureCode& code,
                                 int iterations = 200, double ridge = 1e-6);

enum class FbpFilter { ramp, hamming };
FbpFilter parse_fbp_filter(const std::string& name);
std::string to_string(FbpFilter f);

struct FbpConfig {
    FbpFilter filter = FbpFilter::ramp;
};

/// Filtered backprojection. Rows are filtered with the band-limited Ram-Lak kernel
/// (h[0] = 1/(4 tau^2), h[odd n] = -1/(n pi tau)^2, computed in the frequency domain with
/// zero padding), optionally apodized with a Hamming window, then backprojected with
/// linear interpolation and scaled by pi / num_angles. With this convention a sinogram of
/// line integrals reconstructs attenuation per unit length.
Array2D fbp(const Array2D& sinogram, const std::vector<double>& angles, const Geometry& geometry,
            const FbpConfig& config = {});

struct IfbpConfig {
    int cg_iterations = 200;
    double ridge = 1e-6;
    FbpConfig fbp;
};

/// deblur_linear followed by fbp at the plan's micro-angles.
Array2D ifbp(const Array2D& y, const SamplingPlan& plan, const ExposureCode& code, const Geometry& geometry,
             const IfbpConfig& config = {});

}  // namespace codex
