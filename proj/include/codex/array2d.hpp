#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace codex {

/// Dense row-major 2D array of doubles.
class Array2D {
public:
    Array2D() = default;
    Array2D(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Array2D(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("Array2D: data size does not match shape");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& vec() const { return data_; }
    std::vector<double>& vec() { return data_; }

    bool same_shape(const Array2D& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const Array2D&, const Array2D&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// Root-mean-square of (a - b).
double rms_diff(std::span<const double> a, std::span<const double> b);

}  // namespace codex
