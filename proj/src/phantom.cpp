#include "codex/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "codex/rng.hpp"

namespace codex {

PhantomKind parse_phantom_kind(const std::string& name) {
    if (name == "blobs") return PhantomKind::blobs;
    if (name == "siemens_star") return PhantomKind::siemens_star;
    if (name == "concentric_circles") return PhantomKind::concentric_circles;
    if (name == "disk") return PhantomKind::disk;
    throw std::invalid_argument("unknown phantom kind: " + name);
}

std::string to_string(PhantomKind kind) {
    switch (kind) {
    case PhantomKind::blobs: return "blobs";
    case PhantomKind::siemens_star: return "siemens_star";
    case PhantomKind::concentric_circles: return "concentric_circles";
    case PhantomKind::disk: return "disk";
    }
    return "unknown";
}

namespace {

struct Ellipse {
    double cx, cy, a, b, angle, value;
    bool contains(double x, double y) const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double u = (x - cx) * c + (y - cy) * s;
        const double v = -(x - cx) * s + (y - cy) * c;
        return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
    }
};

// Value at a point given in pixel units, origin at the image center, y up.
using Field = std::function<double(double, double)>;

Field make_field(const PhantomSpec& spec) {
    const double R = spec.radius_px();
    switch (spec.kind) {
    case PhantomKind::disk:
        return [R](double x, double y) { return x * x + y * y <= R * R ? 1.0 : 0.0; };
    case PhantomKind::siemens_star: {
        const double sector = std::numbers::pi / spec.spokes;
        return [R, sector](double x, double y) {
            if (x * x + y * y > R * R) return 0.0;
            double phi = std::atan2(y, x);
            if (phi < 0) phi += 2.0 * std::numbers::pi;
            return static_cast<long>(std::floor(phi / sector)) % 2 == 0 ? 1.0 : 0.0;
        };
    }
    case PhantomKind::concentric_circles: {
        const double band = R / (2.0 * spec.rings);
        return [R, band](double x, double y) {
            const double r = std::sqrt(x * x + y * y);
            if (r > R) return 0.0;
            return static_cast<long>(std::floor(r / band)) % 2 == 0 ? 1.0 : 0.0;
        };
    }
    case PhantomKind::blobs: {
        CounterRng rng(spec.seed, 0xb10b5);
        std::vector<Ellipse> blobs;
        blobs.push_back({0.0, 0.0, R, 0.85 * R, 0.0, 0.35});
        const int count = 7;
        for (int i = 0; i < count; ++i) {
            Ellipse e;
            const double rad = 0.6 * R * std::sqrt(rng.uniform());
            const double ang = 2.0 * std::numbers::pi * rng.uniform();
            e.cx = rad * std::cos(ang);
            e.cy = 0.85 * rad * std::sin(ang);
            e.a = R * (0.08 + 0.22 * rng.uniform());
            e.b = e.a * (0.4 + 0.6 * rng.uniform());
            e.angle = std::numbers::pi * rng.uniform();
            e.value = 0.1 + 0.9 * rng.uniform();
            blobs.push_back(e);
        }
        return [blobs = std::move(blobs)](double x, double y) {
            double v = 0.0;
            for (const auto& e : blobs)
                if (e.contains(x, y)) v = e.value;
            return v;
        };
    }
    }
    throw std::invalid_argument("unhandled phantom kind");
}

}  // namespace

Array2D make_phantom(const PhantomSpec& spec) {
    if (spec.n_side < 16) throw std::invalid_argument("phantom size must be >= 16");
    if (spec.kind == PhantomKind::siemens_star && spec.spokes < 2)
        throw std::invalid_argument("siemens star needs at least 2 spokes");
    if (spec.kind == PhantomKind::concentric_circles && spec.rings < 1)
        throw std::invalid_argument("concentric circles need at least 1 ring");
    if (!(spec.radius_frac > 0.0 && spec.radius_frac <= 0.5))
        throw std::invalid_argument("phantom radius fraction must be in (0, 0.5]");

    const Field field = make_field(spec);
    const int n = spec.n_side;
    const int ss = 4;
    Array2D img(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    const double half = 0.5 * (n - 1);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double acc = 0.0;
            for (int sr = 0; sr < ss; ++sr) {
                for (int sc = 0; sc < ss; ++sc) {
                    const double x = c - half + (sc + 0.5) / ss - 0.5;
                    const double y = half - r - (sr + 0.5) / ss + 0.5;
                    acc += field(x, y);
                }
            }
            img(r, c) = std::clamp(acc / (ss * ss), 0.0, 1.0);
        }
    }
    return img;
}

}  // namespace codex
