#include "codex/sampling.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "flutter_asset.hpp"

namespace codex {

std::string ExposureCode::to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

namespace {

ExposureCode from_bits(std::vector<std::uint8_t> bits) {
    int ones = 0;
    for (auto b : bits) ones += b ? 1 : 0;
    if (ones == 0) throw std::invalid_argument("exposure code has no open chops (all zeros)");
    return ExposureCode{std::move(bits), ones};
}

}  // namespace

ExposureCode build_code(CodeKind kind, int length, const std::vector<std::uint8_t>& custom_bits) {
    if (length < 1) throw std::invalid_argument("code length must be >= 1");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(length), 0);
    switch (kind) {
    case CodeKind::snapshot:
        bits[0] = 1;
        break;
    case CodeKind::boxcar:
        std::fill(bits.begin(), bits.end(), 1);
        break;
    case CodeKind::custom:
        if (static_cast<int>(custom_bits.size()) != length)
            throw std::invalid_argument("custom code length does not match requested length");
        for (std::size_t k = 0; k < bits.size(); ++k) {
            if (custom_bits[k] > 1) throw std::invalid_argument("custom code bits must be 0 or 1");
            bits[k] = custom_bits[k];
        }
        break;
    }
    return from_bits(std::move(bits));
}

ExposureCode parse_code(std::string_view text) {
    std::vector<std::uint8_t> bits;
    for (char ch : text) {
        if (ch == '0' || ch == '1')
            bits.push_back(static_cast<std::uint8_t>(ch - '0'));
        else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n')
            continue;
        else
            throw std::invalid_argument(std::string("invalid character in code string: '") + ch + "'");
    }
    if (bits.empty()) throw std::invalid_argument("empty code string");
    return from_bits(std::move(bits));
}

const ExposureCode& flutter52() {
    static const ExposureCode code = parse_code(detail::kFlutter52);
    return code;
}

ExposureCode flutter_code(int length) {
    if (length < 1) throw std::invalid_argument("code length must be >= 1");
    const auto& base = flutter52().bits;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(length));
    for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = base[k % base.size()];
    return from_bits(std::move(bits));
}

std::vector<ExposureCode> read_code_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open code file: " + path);
    std::vector<ExposureCode> codes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        codes.push_back(parse_code(line));
    }
    return codes;
}

long long gcd(long long a, long long b) { return std::gcd(a, b); }

double SamplingPlan::blur_angle_deg() const { return 180.0 * K / N_theta; }

double SamplingPlan::span_deg() const {
    return 180.0 * static_cast<double>(M_theta - 1) * K / N_theta;
}

int SamplingPlan::view_start_index(int view) const {
    return static_cast<int>((static_cast<long long>(view) * K) % N_theta);
}

std::vector<double> SamplingPlan::micro_angles_rad() const {
    std::vector<double> a(static_cast<std::size_t>(N_theta));
    for (int j = 0; j < N_theta; ++j) a[j] = std::numbers::pi * j / N_theta;
    return a;
}

std::vector<double> SamplingPlan::nominal_view_angles_rad() const {
    std::vector<double> a(static_cast<std::size_t>(M_theta));
    for (int i = 0; i < M_theta; ++i) a[i] = std::numbers::pi * view_start_index(i) / N_theta;
    return a;
}

std::vector<double> SamplingPlan::center_view_angles_rad() const {
    std::vector<double> a(static_cast<std::size_t>(M_theta));
    const double half = 0.5 * (K - 1);
    for (int i = 0; i < M_theta; ++i) {
        double j = std::fmod(view_start_index(i) + half, static_cast<double>(N_theta));
        a[i] = std::numbers::pi * j / N_theta;
    }
    return a;
}

SamplingPlan make_sampling_plan(int K, int m, int n, int M_theta) {
    if (K < 1) throw std::invalid_argument("code length K must be >= 1");
    if (m < 1 || n < 0) throw std::invalid_argument("m must be >= 1 and n >= 0");
    if (M_theta < 1) throw std::invalid_argument("M_theta must be >= 1");
    const long long N = static_cast<long long>(m) * K - n;
    if (N <= 0) throw std::invalid_argument("N_theta = m*K - n must be positive");

    SamplingPlan p;
    p.K = K;
    p.m = m;
    p.n = n;
    p.N_theta = static_cast<int>(N);
    p.M_theta = M_theta;
    p.gcd_K_N = static_cast<int>(std::gcd(static_cast<long long>(K), N));
    p.unique_angle = p.gcd_K_N == 1 && M_theta <= p.N_theta;
    p.micro_step_rad = std::numbers::pi / static_cast<double>(N);
    p.blur_angle_rad = K * std::numbers::pi / static_cast<double>(N);
    p.span_rad = static_cast<double>(M_theta - 1) * K * std::numbers::pi / static_cast<double>(N);
    p.view_angles_rad.resize(static_cast<std::size_t>(M_theta));
    for (int i = 0; i < M_theta; ++i)
        p.view_angles_rad[i] = std::numbers::pi * static_cast<double>(i) * K / static_cast<double>(N);
    return p;
}

SamplingPlan plan_for_n_theta(int K, int N_theta, int M_theta) {
    if (K < 1 || N_theta < 1) throw std::invalid_argument("K and N_theta must be >= 1");
    int m = N_theta / K + 1;
    return make_sampling_plan(K, m, m * K - N_theta, M_theta);
}

UniquenessReport check_unique_angles(const SamplingPlan& plan) {
    std::vector<int> first_view(static_cast<std::size_t>(plan.N_theta), -1);
    for (int i = 0; i < plan.M_theta; ++i) {
        int j = plan.view_start_index(i);
        if (first_view[j] >= 0) return {false, std::make_pair(first_view[j], i)};
        first_view[j] = i;
    }
    return {true, std::nullopt};
}

int micro_index(const SamplingPlan& plan, int view, int chop) {
    if (view < 0 || view >= plan.M_theta) throw std::out_of_range("view index out of range");
    if (chop < 0 || chop >= plan.K) throw std::out_of_range("chop index out of range");
    return static_cast<int>((static_cast<long long>(view) * plan.K + chop) % plan.N_theta);
}

}  // namespace codex
