#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "codex/array2d.hpp"

namespace codex::io {

/// Metadata stored next to a raw array file.
struct ArrayInfo {
    std::size_t rows = 0;
    std::size_t cols = 0;
    /// What the array holds, e.g. "image", "views", "micro", "counts".
    std::string role;
    /// Row angles in radians for sinograms; empty for images.
    std::vector<double> angles;
};

/// Writes `<stem>.f32` (little-endian float32, row-major) and `<stem>.json`
/// ({shape, dtype, role, angles}). Both files are written atomically.
void write_array(const std::filesystem::path& stem, const Array2D& a, const ArrayInfo& info);

/// Reads an array written by write_array; `stem` may carry the .f32 or .json extension.
Array2D read_array(const std::filesystem::path& stem, ArrayInfo* info = nullptr);

/// 8-bit binary PGM, linearly windowed from min to max.
void write_pgm(const std::filesystem::path& path, const Array2D& a);

/// Writes text through a temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// 64-bit FNV-1a hash, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace codex::io
