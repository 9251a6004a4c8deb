#pragma once

#include <vector>

#include "codex/acquisition.hpp"
#include "codex/array2d.hpp"

namespace codex {

struct DeblurConfig {
    int n_p = 5;
    double eta0 = 1.0;
    double epsilon = 1e-4;
    /// ADMM coupling; may be +infinity (no proximal term).
    double sigma = 1.0;
    int max_halvings = 30;

    void validate() const;

    friend bool operator==(const DeblurConfig&, const DeblurConfig&) = default;
};

/// Projection-domain deblurring objective
///   f_d(p) = 1/2 ||y + log(C exp(-p))||_D^2 + 1/(2 sigma^2) ||p - p_tilde||^2.
/// p is clamped to [-kExpClamp, kExpClamp] before exponentiation.
class DeblurObjective {
public:
    static constexpr double kExpClamp = 50.0;

    DeblurObjective(const CodedSum& C, const Array2D& y, const Array2D& D, double sigma);

    double cost(const Array2D& p, const Array2D& p_tilde) const;
    Array2D gradient(const Array2D& p, const Array2D& p_tilde) const;
    /// Measurement residual r = y + log(C exp(-p)).
    Array2D residual(const Array2D& p) const;

    const CodedSum& C() const { return C_; }
    double inv_sigma2() const { return inv_sigma2_; }
    /// Number of entries clamped during exponentiation so far.
    std::size_t clamp_events() const { return clamp_events_; }

private:
    Array2D transmission(const Array2D& p) const;

    const CodedSum& C_;
    const Array2D& y_;
    const Array2D& D_;
    double inv_sigma2_;
    mutable std::size_t clamp_events_ = 0;
};

double deblur_cost(const Array2D& p, const Array2D& p_tilde, const Array2D& y, const Array2D& D, double sigma,
                   const SamplingPlan& plan, const ExposureCode& code);
Array2D deblur_gradient(const Array2D& p, const Array2D& p_tilde, const Array2D& y, const Array2D& D,
                        double sigma, const SamplingPlan& plan, const ExposureCode& code);

struct DeblurResult {
    Array2D p;
    /// f_d before the first iteration followed by f_d after each of the n_p iterations.
    std::vector<double> costs;
    /// Number of iterations whose line search exhausted max_halvings (iterate left unchanged).
    int stalled_iterations = 0;
    int total_halvings = 0;
    std::size_t clamp_events = 0;

    bool stalled() const { return stalled_iterations > 0; }
};

/// n_p gradient steps with Armijo backtracking starting from p_init; one step size is shared
/// by all detector pixels.
DeblurResult deblur_partial(const Array2D& p_init, const Array2D& p_tilde, const DeblurObjective& objective,
                            const DeblurConfig& config);

DeblurResult deblur_partial(const Array2D& p_init, const Array2D& p_tilde, const Array2D& y, const Array2D& D,
                            const DeblurConfig& config, const SamplingPlan& plan, const ExposureCode& code);

}  // namespace codex
