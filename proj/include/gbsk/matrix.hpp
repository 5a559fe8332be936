#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace gbsk {

/// Non-owning view over a row-major n x d block of doubles.
class MatrixView {
  public:
    MatrixView() = default;
    MatrixView(std::span<const double> values, std::size_t cols)
        : values_(values), cols_(cols), rows_(cols == 0 ? 0 : values.size() / cols) {
        assert(cols == 0 || values.size() % cols == 0);
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const noexcept {
        return values_.subspan(i * cols_, cols_);
    }
    std::span<const double> values() const noexcept { return values_; }

  private:
    std::span<const double> values_;
    std::size_t cols_ = 0;
    std::size_t rows_ = 0;
};

/// Owning row-major matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : values_(rows * cols, 0.0), rows_(rows), cols_(cols) {}
    Matrix(std::vector<double> values, std::size_t cols)
        : values_(std::move(values)), rows_(cols == 0 ? 0 : values_.size() / cols), cols_(cols) {
        assert(cols == 0 || values_.size() % cols == 0);
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * cols_, cols_};
    }

    void append_row(std::span<const double> r) {
        assert(rows_ == 0 || r.size() == cols_);
        if (rows_ == 0) cols_ = r.size();
        values_.insert(values_.end(), r.begin(), r.end());
        ++rows_;
    }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    MatrixView view() const noexcept { return MatrixView(values_, cols_); }
    operator MatrixView() const noexcept { return view(); }

  private:
    std::vector<double> values_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    assert(a.size() == b.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        sum += diff * diff;
    }
    return sum;
}

inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

} // namespace gbsk
