#pragma once

#include <cstdint>
#include <string>

#include "codex/array2d.hpp"

namespace codex {

enum class PhantomKind { blobs, siemens_star, concentric_circles, disk };

PhantomKind parse_phantom_kind(const std::string& name);
std::string to_string(PhantomKind kind);

/// Synthetic phantoms. All are confined to a centered disk of radius radius_frac * n_side
/// pixels and take values in [0, 1]; pixels are 4x4 supersampled.
struct PhantomSpec {
    PhantomKind kind = PhantomKind::blobs;
    int n_side = 64;
    std::uint64_t seed = 0;
    /// Siemens star: number of bright wedges (2*spokes sectors in total).
    int spokes = 8;
    /// Concentric circles: number of bright rings (2*rings bands of equal width).
    int rings = 2;
    double radius_frac = 0.45;

    double radius_px() const { return radius_frac * n_side; }

    friend bool operator==(const PhantomSpec&, const PhantomSpec&) = default;
};

/// Throws std::invalid_argument for n_side < 16, spokes < 2 or rings < 1.
Array2D make_phantom(const PhantomSpec& spec);

}  // namespace codex
