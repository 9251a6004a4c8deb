#include "codex/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "codex/errors.hpp"
#include "json.hpp"

namespace codex::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path with_ext(fs::path stem, const char* ext) {
    const auto e = stem.extension();
    if (e == ".f32" || e == ".json") stem.replace_extension();
    stem += ext;
    return stem;
}

void write_bytes_atomic(const fs::path& path, const char* data, std::size_t size) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(data, static_cast<std::streamsize>(size));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::uint32_t to_little_endian(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

}  // namespace

void write_text_atomic(const fs::path& path, const std::string& text) {
    write_bytes_atomic(path, text.data(), text.size());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_array(const fs::path& stem, const Array2D& a, const ArrayInfo& info) {
    std::vector<std::uint32_t> raw(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const float f = static_cast<float>(a[i]);
        std::uint32_t u;
        std::memcpy(&u, &f, sizeof u);
        raw[i] = to_little_endian(u);
    }
    write_bytes_atomic(with_ext(stem, ".f32"), reinterpret_cast<const char*>(raw.data()), raw.size() * 4);
    json meta = {{"shape", {a.rows(), a.cols()}}, {"dtype", "float32"}, {"byte_order", "little"}, {"role", info.role}};
    meta["angles"] = info.angles;
    write_text_atomic(with_ext(stem, ".json"), meta.dump(2) + "\n");
}

Array2D read_array(const fs::path& stem, ArrayInfo* info) {
    const fs::path meta_path = with_ext(stem, ".json");
    json meta;
    try {
        meta = json::parse(read_text(meta_path));
    } catch (const json::exception& e) {
        throw ConfigError("bad array sidecar " + meta_path.string() + ": " + e.what());
    }
    if (meta.value("dtype", "") != "float32") throw ConfigError("unsupported dtype in " + meta_path.string());
    const auto shape = meta.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw ConfigError("array must be 2D: " + meta_path.string());
    const std::string bytes = read_text(with_ext(stem, ".f32"));
    if (bytes.size() != shape[0] * shape[1] * 4)
        throw ConfigError("array payload size does not match shape: " + with_ext(stem, ".f32").string());
    Array2D a(shape[0], shape[1]);
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::uint32_t u;
        std::memcpy(&u, bytes.data() + 4 * i, 4);
        u = to_little_endian(u);
        float f;
        std::memcpy(&f, &u, sizeof f);
        a[i] = f;
    }
    if (info) {
        info->rows = shape[0];
        info->cols = shape[1];
        info->role = meta.value("role", "");
        info->angles = meta.value("angles", std::vector<double>{});
    }
    return a;
}

void write_pgm(const fs::path& path, const Array2D& a) {
    double lo = 0.0, hi = 0.0;
    if (!a.empty()) {
        const auto [mn, mx] = std::minmax_element(a.flat().begin(), a.flat().end());
        lo = *mn;
        hi = *mx;
    }
    std::string out = "P5\n" + std::to_string(a.cols()) + " " + std::to_string(a.rows()) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + a.size());
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = std::clamp((a[i] - lo) / span, 0.0, 1.0);
        out[header + i] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t)));
    }
    write_bytes_atomic(path, out.data(), out.size());
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

}  // namespace codex::io
