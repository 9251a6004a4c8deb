#include "codex/baselines.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "codex/acquisition.hpp"

namespace codex {

namespace {

// Single-column view of the coded sum, for per-detector-pixel solves.
class ColumnCodedSum {
public:
    explicit ColumnCodedSum(const CodedSum& C) : C_(C) {}

    void apply(const std::vector<double>& micro, std::vector<double>& views) const {
        views.assign(static_cast<std::size_t>(C_.plan().M_theta), 0.0);
        const double w = C_.tap_weight();
        for (const auto& t : C_.taps()) views[t.view] += w * micro[t.micro];
    }
    void apply_transpose(const std::vector<double>& views, std::vector<double>& micro) const {
        micro.assign(static_cast<std::size_t>(C_.plan().N_theta), 0.0);
        const double w = C_.tap_weight();
        for (const auto& t : C_.taps()) micro[t.micro] += w * views[t.view];
    }

private:
    const CodedSum& C_;
};

double sumsq(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

DeblurLinearResult deblur_linear(const Array2D& y, const SamplingPlan& plan, const ExposureCode& code,
                                 int iterations, double ridge) {
    if (iterations < 0) throw std::invalid_argument("deblur_linear: iterations must be >= 0");
    if (!(ridge >= 0.0)) throw std::invalid_argument("deblur_linear: ridge must be >= 0");
    if (y.rows() != static_cast<std::size_t>(plan.M_theta))
        throw std::invalid_argument("deblur_linear: y must have M_theta rows");
    const CodedSum C(plan, code);
    const ColumnCodedSum Cc(C);
    const std::size_t md = y.cols();
    const auto N = static_cast<std::size_t>(plan.N_theta);
    const auto M = static_cast<std::size_t>(plan.M_theta);

    DeblurLinearResult res;
    res.p = Array2D(N, md);
    std::vector<double> col_res2(iterations + 1, 0.0);

    std::vector<double> yc(M), p(N), r(M), s(N), d(N), q(M);
    for (std::size_t c = 0; c < md; ++c) {
        for (std::size_t i = 0; i < M; ++i) yc[i] = y(i, c);
        std::fill(p.begin(), p.end(), 0.0);
        r = yc;
        Cc.apply_transpose(r, s);
        d = s;
        double gamma = sumsq(s);
        const double gamma0 = gamma;
        double rr = sumsq(r);
        col_res2[0] += rr;
        bool done = gamma0 == 0.0;
        for (int it = 1; it <= iterations; ++it) {
            if (!done) {
                Cc.apply(d, q);
                const double delta = sumsq(q) + ridge * sumsq(d);
                if (!(delta > 0.0)) {
                    done = true;
                } else {
                    const double alpha = gamma / delta;
                    for (std::size_t j = 0; j < N; ++j) p[j] += alpha * d[j];
                    for (std::size_t i = 0; i < M; ++i) r[i] -= alpha * q[i];
                    Cc.apply_transpose(r, s);
                    for (std::size_t j = 0; j < N; ++j) s[j] -= ridge * p[j];
                    const double gamma_new = sumsq(s);
                    const double beta = gamma_new / gamma;
                    gamma = gamma_new;
                    for (std::size_t j = 0; j < N; ++j) d[j] = s[j] + beta * d[j];
                    rr = sumsq(r);
                    if (gamma <= 1e-30 * gamma0) done = true;
                }
            }
            col_res2[it] += rr;
        }
        for (std::size_t j = 0; j < N; ++j) res.p(j, c) = p[j];
    }
    res.residual_norms.reserve(col_res2.size());
    for (double v : col_res2) res.residual_norms.push_back(std::sqrt(v));
    return res;
}

FbpFilter parse_fbp_filter(const std::string& name) {
    if (name == "ramp") return FbpFilter::ramp;
    if (name == "hamming") return FbpFilter::hamming;
    throw std::invalid_argument("unknown FBP filter: " + name);
}

std::string to_string(FbpFilter f) { return f == FbpFilter::ramp ? "ramp" : "hamming"; }

Array2D fbp(const Array2D& sinogram, const std::vector<double>& angles, const Geometry& geometry,
            const FbpConfig& config) {
    geometry.validate();
    const auto md = static_cast<std::size_t>(geometry.num_detector_pixels);
    if (sinogram.rows() != angles.size() || sinogram.cols() != md)
        throw std::invalid_argument("fbp: sinogram must be num_angles x M_d");
    if (angles.empty()) throw std::invalid_argument("fbp: no angles");
    const double tau = geometry.detector_pitch;
    const std::size_t L = next_pow2(2 * md);
    const std::size_t nfreq = L / 2 + 1;

    std::unique_ptr<double[], FftwFree> buf(static_cast<double*>(fftw_malloc(sizeof(double) * L)));
    std::unique_ptr<fftw_complex[], FftwFree> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nfreq)));
    FftwPlan fwd(fftw_plan_dft_r2c_1d(static_cast<int>(L), buf.get(), spec.get(), FFTW_ESTIMATE));
    FftwPlan inv(fftw_plan_dft_c2r_1d(static_cast<int>(L), spec.get(), buf.get(), FFTW_ESTIMATE));

    // Frequency response of the spatial Ram-Lak kernel, scaled by tau for the convolution sum.
    std::vector<double> H(nfreq);
    for (std::size_t i = 0; i < L; ++i) {
        const long n = i <= L / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(L);
        double h = 0.0;
        if (n == 0)
            h = 1.0 / (4.0 * tau * tau);
        else if (n % 2 != 0)
            h = -1.0 / (std::numbers::pi * std::numbers::pi * static_cast<double>(n) * n * tau * tau);
        buf[i] = h * tau;
    }
    fftw_execute(fwd.get());
    for (std::size_t k = 0; k < nfreq; ++k) {
        double v = spec[k][0];
        if (config.filter == FbpFilter::hamming)
            v *= 0.54 + 0.46 * std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(nfreq - 1));
        H[k] = v / static_cast<double>(L);
    }

    Array2D filtered(angles.size(), md);
    for (std::size_t a = 0; a < angles.size(); ++a) {
        std::fill(buf.get(), buf.get() + L, 0.0);
        for (std::size_t d = 0; d < md; ++d) buf[d] = sinogram(a, d);
        fftw_execute(fwd.get());
        for (std::size_t k = 0; k < nfreq; ++k) {
            spec[k][0] *= H[k];
            spec[k][1] *= H[k];
        }
        fftw_execute(inv.get());
        for (std::size_t d = 0; d < md; ++d) filtered(a, d) = buf[d];
    }

    const int n = geometry.n_side;
    const double s = geometry.pixel_pitch;
    const double det_center = 0.5 * (static_cast<double>(md) - 1.0);
    Array2D img(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (std::size_t a = 0; a < angles.size(); ++a) {
        const double ca = std::cos(angles[a]), sa = std::sin(angles[a]);
        const auto row = filtered.row(a);
        for (int r = 0; r < n; ++r) {
            const double cy = (0.5 * (n - 1) - r) * s;
            for (int c = 0; c < n; ++c) {
                const double cx = (c - 0.5 * (n - 1)) * s;
                const double u = (cx * ca + cy * sa - geometry.center_offset) / tau + det_center;
                const double fl = std::floor(u);
                const long i0 = static_cast<long>(fl);
                const double frac = u - fl;
                double v = 0.0;
                if (i0 >= 0 && i0 < static_cast<long>(md)) v += (1.0 - frac) * row[i0];
                if (i0 + 1 >= 0 && i0 + 1 < static_cast<long>(md)) v += frac * row[i0 + 1];
                img(r, c) += v;
            }
        }
    }
    const double scale = std::numbers::pi / static_cast<double>(angles.size());
    for (auto& v : img.flat()) v *= scale;
    return img;
}

Array2D ifbp(const Array2D& y, const SamplingPlan& plan, const ExposureCode& code, const Geometry& geometry,
             const IfbpConfig& config) {
    const DeblurLinearResult deblurred = deblur_linear(y, plan, code, config.cg_iterations, config.ridge);
    return fbp(deblurred.p, plan.micro_angles_rad(), geometry, config.fbp);
}

}  // namespace codex
