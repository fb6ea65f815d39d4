#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace synthbench {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != r * c) throw std::invalid_argument("Matrix: value count does not match shape");
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows);
        for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
        return out;
    }

    /// Appends the columns of `other` to the right; row counts must match.
    void append_columns(const Matrix& other) {
        if (cols == 0 && rows == 0) {
            *this = other;
            return;
        }
        if (other.rows != rows) throw std::invalid_argument("Matrix: row count mismatch in append_columns");
        std::vector<double> merged(rows * (cols + other.cols));
        for (std::size_t r = 0; r < rows; ++r) {
            auto a = row(r);
            auto b = other.row(r);
            std::copy(a.begin(), a.end(), merged.begin() + static_cast<std::ptrdiff_t>(r * (cols + other.cols)));
            std::copy(b.begin(), b.end(),
                      merged.begin() + static_cast<std::ptrdiff_t>(r * (cols + other.cols) + cols));
        }
        cols += other.cols;
        data = std::move(merged);
    }
};

}  // namespace synthbench
