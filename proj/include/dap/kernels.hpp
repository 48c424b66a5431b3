#pragma once

// Data-parallel inner loops. Every kernel has a serial reference next to the
// OpenMP version; both evaluate each output element with the same operation
// order, so results agree bit for bit regardless of thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "dap/core.hpp"

namespace dap::kernels {

// cos(left + right, goal) for one pair, without materializing the sum.
// Throws ZeroVector / DimensionMismatch like cosine().
double additive_cosine(std::span<const double> left, std::span<const double> right, std::span<const double> goal);

// out[i] = cos(*left[i] + *right[i], goal)
std::vector<double> additive_scores(std::span<const Vector* const> left, std::span<const Vector* const> right,
                                    const Vector& goal);
std::vector<double> additive_scores_serial(std::span<const Vector* const> left,
                                           std::span<const Vector* const> right, const Vector& goal);

// Dense row-major matrices stored as flat vectors.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return std::span<const double>(data).subspan(r * cols, cols); }
  std::span<double> row(std::size_t r) { return std::span<double>(data).subspan(r * cols, cols); }
};

// out(i, j) = scale * <a.row(i), b.row(j)>
Matrix scaled_gram(const Matrix& a, const Matrix& b, double scale);
Matrix scaled_gram_serial(const Matrix& a, const Matrix& b, double scale);

}  // namespace dap::kernels
