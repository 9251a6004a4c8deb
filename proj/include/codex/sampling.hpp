#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace codex {

/// Binary exposure code c with normalizer cbar = number of ones.
struct ExposureCode {
    std::vector<std::uint8_t> bits;
    int cbar = 0;

    int length() const { return static_cast<int>(bits.size()); }
    std::string to_string() const;
};

enum class CodeKind { snapshot, boxcar, custom };

ExposureCode build_code(CodeKind kind, int length,
                        const std::vector<std::uint8_t>& custom_bits = {});

/// Parses a string of '0'/'1' characters into a code. Rejects other characters and all-zero codes.
ExposureCode parse_code(std::string_view text);

/// The basic length-52 fluttered-shutter code shipped in assets/flutter52.txt.
const ExposureCode& flutter52();

/// Fluttered code of arbitrary length, formed by repeating the length-52 code and truncating.
ExposureCode flutter_code(int length);

/// Reads a code asset file: one code per line, blank lines ignored.
std::vector<ExposureCode> read_code_file(const std::string& path);

/// Interlaced view-sampling plan. View i covers micro-angles (i*K + k) mod N_theta, k < K.
struct SamplingPlan {
    int K = 1;
    int m = 1;
    int n = 0;
    int N_theta = 1;
    int M_theta = 1;
    int gcd_K_N = 1;
    bool unique_angle = true;

    double micro_step_rad = 0.0;
    double blur_angle_rad = 0.0;
    double span_rad = 0.0;
    /// theta_i = pi * i * K / N_theta, unreduced (may exceed pi for multi-rotation scans).
    std::vector<double> view_angles_rad;

    double blur_angle_deg() const;
    double span_deg() const;
    /// Micro-angle index of the first chop of view i, i.e. i*K mod N_theta.
    int view_start_index(int view) const;
    /// Angles pi*j/N_theta of all micro-projections, j < N_theta.
    std::vector<double> micro_angles_rad() const;
    /// Start angle of each view reduced onto the micro-angle grid in [0, pi).
    std::vector<double> nominal_view_angles_rad() const;
    /// Nominal angle of each view at the center of its blur window, reduced mod pi.
    std::vector<double> center_view_angles_rad() const;
};

long long gcd(long long a, long long b);

/// N_theta = m*K - n. Throws std::invalid_argument for non-positive N_theta or M_theta < 1.
SamplingPlan make_sampling_plan(int K, int m, int n, int M_theta);

/// Builds a plan with a prescribed N_theta by picking the smallest m with m*K > N_theta.
SamplingPlan plan_for_n_theta(int K, int N_theta, int M_theta);

struct UniquenessReport {
    bool unique = true;
    /// First colliding pair (earlier view, later view), if any.
    std::optional<std::pair<int, int>> collision;
};

/// Exact integer check that theta_i mod pi are pairwise distinct over the plan's views.
UniquenessReport check_unique_angles(const SamplingPlan& plan);

/// (i*K + k) mod N_theta. Throws std::out_of_range for out-of-range i or k.
int micro_index(const SamplingPlan& plan, int view, int chop);

}  // namespace codex
