#include "codex/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace codex {

double nrmse(const Array2D& x, const Array2D& x0) {
    if (!x.same_shape(x0)) throw std::invalid_argument("nrmse: shape mismatch");
    const double ref = norm2(x0.flat());
    if (ref == 0.0) throw std::invalid_argument("nrmse: reference image is all zero");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - x0[i]) * (x[i] - x0[i]);
    return std::sqrt(s) / ref;
}

double rmse(const Array2D& x, const Array2D& x0) {
    if (!x.same_shape(x0)) throw std::invalid_argument("rmse: shape mismatch");
    return rms_diff(x.flat(), x0.flat());
}

std::string to_string(MtfDirection d) { return d == MtfDirection::tangential ? "tangential" : "radial"; }

double MtfCurve::at(double f) const {
    if (frequencies.empty()) throw std::logic_error("MtfCurve::at on an empty curve");
    if (f <= frequencies.front()) return magnitudes.front();
    if (f >= frequencies.back()) return magnitudes.back();
    const auto it = std::upper_bound(frequencies.begin(), frequencies.end(), f);
    const std::size_t i = static_cast<std::size_t>(it - frequencies.begin());
    const double t = (f - frequencies[i - 1]) / (frequencies[i] - frequencies[i - 1]);
    return (1.0 - t) * magnitudes[i - 1] + t * magnitudes[i];
}

namespace {

double bilinear(const Array2D& img, double x, double y) {
    const double half_c = 0.5 * (static_cast<double>(img.cols()) - 1.0);
    const double half_r = 0.5 * (static_cast<double>(img.rows()) - 1.0);
    const double c = x + half_c;
    const double r = half_r - y;
    const double c0 = std::floor(c), r0 = std::floor(r);
    const double fc = c - c0, fr = r - r0;
    auto px = [&](double rr, double cc) {
        if (rr < 0 || cc < 0 || rr >= static_cast<double>(img.rows()) || cc >= static_cast<double>(img.cols()))
            return 0.0;
        return img(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
    };
    return (1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
           fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

std::vector<double> sample_profile(const Array2D& image, const EdgeProfile& p) {
    if (!(p.step > 0.0) || !(p.half_length > 0.0)) throw std::invalid_argument("profile: step and half_length must be > 0");
    const auto count = static_cast<std::size_t>(std::floor(2.0 * p.half_length / p.step + 1e-9)) + 1;
    std::vector<double> esf(count);
    const double r = std::hypot(p.x0, p.y0);
    if (p.follow_arc && r == 0.0) throw std::invalid_argument("profile: arc through the image center");
    const double phi0 = std::atan2(p.y0, p.x0);
    // Orientation of the arc so that increasing s moves along the normal.
    const double orient = p.follow_arc ? ((-std::sin(phi0) * p.nx + std::cos(phi0) * p.ny) >= 0 ? 1.0 : -1.0) : 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double s = -p.half_length + static_cast<double>(i) * p.step;
        double x, y;
        if (p.follow_arc) {
            const double phi = phi0 + orient * s / r;
            x = r * std::cos(phi);
            y = r * std::sin(phi);
        } else {
            x = p.x0 + s * p.nx;
            y = p.y0 + s * p.ny;
        }
        esf[i] = bilinear(image, x, y);
    }
    return esf;
}

MtfCurve mtf_from_esf(const std::vector<double>& esf, double step, MtfDirection direction, double radius) {
    if (esf.size() < 16) throw std::invalid_argument("mtf: profile needs at least 16 samples");
    if (!(step > 0.0)) throw std::invalid_argument("mtf: step must be > 0");
    const std::size_t n = esf.size() - 2;
    std::vector<double> lsf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = n > 1 ? 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / (n - 1)) : 1.0;
        lsf[i] = w * (esf[i + 2] - esf[i]) / (2.0 * step);
    }
    const std::size_t L = next_pow2(n);
    const std::size_t nfreq = L / 2 + 1;
    double* in = static_cast<double*>(fftw_malloc(sizeof(double) * L));
    fftw_complex* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nfreq));
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), in, out, FFTW_ESTIMATE);
    std::fill(in, in + L, 0.0);
    std::copy(lsf.begin(), lsf.end(), in);
    fftw_execute(plan);
    std::vector<double> mag(nfreq);
    for (std::size_t k = 0; k < nfreq; ++k) mag[k] = std::hypot(out[k][0], out[k][1]);
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);

    const double scale = *std::max_element(esf.begin(), esf.end()) - *std::min_element(esf.begin(), esf.end());
    if (scale == 0.0 || !(mag[0] > 1e-9 * scale))
        throw std::invalid_argument("mtf: profile has no edge contrast");

    MtfCurve curve;
    curve.direction = direction;
    curve.radius = radius;
    for (std::size_t k = 0; k < nfreq; ++k) {
        const double f = static_cast<double>(k) / (static_cast<double>(L) * step);
        if (f > 0.5 + 1e-12) break;
        curve.frequencies.push_back(f);
        curve.magnitudes.push_back(mag[k] / mag[0]);
    }
    return curve;
}

MtfCurve mtf_from_edge(const Array2D& image, const EdgeProfile& profile, MtfDirection direction) {
    return mtf_from_esf(sample_profile(image, profile), profile.step, direction, std::hypot(profile.x0, profile.y0));
}

const MtfCurve& MtfReport::get(MtfDirection direction, bool far) const {
    const MtfCurve* best = nullptr;
    for (const auto& c : curves) {
        if (c.direction != direction) continue;
        if (!best || (far ? c.radius > best->radius : c.radius < best->radius)) best = &c;
    }
    if (!best) throw std::out_of_range("mtf report has no " + to_string(direction) + " curve");
    return *best;
}

namespace {

MtfCurve average(const std::vector<MtfCurve>& curves) {
    MtfCurve avg = curves.front();
    for (std::size_t i = 1; i < curves.size(); ++i)
        for (std::size_t k = 0; k < avg.magnitudes.size(); ++k) avg.magnitudes[k] += curves[i].magnitudes[k];
    for (double& m : avg.magnitudes) m /= static_cast<double>(curves.size());
    return avg;
}

}  // namespace

MtfReport mtf_report(const Array2D& reconstruction, const PhantomSpec& phantom, const MtfReportConfig& config) {
    if (reconstruction.rows() != static_cast<std::size_t>(phantom.n_side) || reconstruction.cols() != reconstruction.rows())
        throw std::invalid_argument("mtf_report: image does not match the phantom size");
    if (!(config.near_frac > 0.0 && config.near_frac < config.far_frac && config.far_frac < 1.0))
        throw std::invalid_argument("mtf_report: need 0 < near_frac < far_frac < 1");
    const double R = phantom.radius_px();
    MtfReport report;
    switch (phantom.kind) {
    case PhantomKind::siemens_star: {
        const double sector = std::numbers::pi / phantom.spokes;
        for (double frac : {config.near_frac, config.far_frac}) {
            const double r = frac * R;
            // Neighbouring spoke edges are r*sector apart along the arc.
            const double half = 0.9 * r * sector;
            const double step = std::min(config.step, 2.0 * half / 16.0);
            std::vector<MtfCurve> per_edge;
            for (int e = 0; e < 2 * phantom.spokes; ++e) {
                const double phi = static_cast<double>(e) * sector;
                EdgeProfile p;
                p.x0 = r * std::cos(phi);
                p.y0 = r * std::sin(phi);
                p.nx = -std::sin(phi);
                p.ny = std::cos(phi);
                p.half_length = half;
                p.step = step;
                p.follow_arc = true;
                per_edge.push_back(mtf_from_edge(reconstruction, p, MtfDirection::tangential));
            }
            report.curves.push_back(average(per_edge));
        }
        break;
    }
    case PhantomKind::concentric_circles: {
        const double band = R / (2.0 * phantom.rings);
        for (double frac : {config.near_frac, config.far_frac}) {
            const double edges = std::clamp(std::round(frac * R / band), 1.0, 2.0 * phantom.rings - 1.0);
            const double r = edges * band;
            std::vector<MtfCurve> per_az;
            for (int a = 0; a < config.radial_azimuths; ++a) {
                const double phi = (a + 0.5) * 2.0 * std::numbers::pi / config.radial_azimuths;
                EdgeProfile p;
                p.nx = std::cos(phi);
                p.ny = std::sin(phi);
                p.x0 = r * p.nx;
                p.y0 = r * p.ny;
                p.half_length = 0.9 * band;
                p.step = std::min(config.step, 2.0 * p.half_length / 16.0);
                per_az.push_back(mtf_from_edge(reconstruction, p, MtfDirection::radial));
            }
            report.curves.push_back(average(per_az));
        }
        break;
    }
    default:
        throw std::invalid_argument("mtf_report: phantom must be siemens_star or concentric_circles");
    }
    return report;
}

}  // namespace codex
