#include "dap/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace dap::kernels {

double additive_cosine(std::span<const double> left, std::span<const double> right, std::span<const double> goal) {
  if (left.size() != right.size() || left.size() != goal.size())
    throw Error(ErrorKind::DimensionMismatch, std::to_string(left.size()) + "/" + std::to_string(right.size()) +
                                                  "/" + std::to_string(goal.size()));
  double d = 0.0, ss = 0.0, gg = 0.0;
  for (std::size_t k = 0; k < goal.size(); ++k) {
    const double s = left[k] + right[k];
    d += s * goal[k];
    ss += s * s;
    gg += goal[k] * goal[k];
  }
  if (ss == 0.0 || gg == 0.0) throw Error(ErrorKind::ZeroVector, "zero vector in additive score");
  double c = d / (std::sqrt(ss) * std::sqrt(gg));
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

namespace {

void require_pairs(std::span<const Vector* const> left, std::span<const Vector* const> right) {
  if (left.size() != right.size())
    throw Error(ErrorKind::InvalidArgument, "left and right pair lists differ in length");
}

}  // namespace

std::vector<double> additive_scores_serial(std::span<const Vector* const> left,
                                           std::span<const Vector* const> right, const Vector& goal) {
  require_pairs(left, right);
  std::vector<double> out(left.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = additive_cosine(left[i]->values(), right[i]->values(), goal.values());
  return out;
}

std::vector<double> additive_scores(std::span<const Vector* const> left, std::span<const Vector* const> right,
                                    const Vector& goal) {
  require_pairs(left, right);
  const auto n = static_cast<std::int64_t>(left.size());
  std::vector<double> out(left.size());
  // Exceptions must not escape an OpenMP region; record the first failing pair instead.
  std::int64_t failed = n;
#pragma omp parallel for schedule(static) reduction(min : failed) if (n > 256)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = additive_cosine(left[i]->values(), right[i]->values(), goal.values());
    } catch (const Error&) {
      if (i < failed) failed = i;
    }
  }
  if (failed < n) {
    // re-run serially to raise the original error
    additive_cosine(left[failed]->values(), right[failed]->values(), goal.values());
  }
  return out;
}

namespace {

void require_gram(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols)
    throw Error(ErrorKind::DimensionMismatch, "gram operands have " + std::to_string(a.cols) + " and " +
                                                  std::to_string(b.cols) + " columns");
}

inline double row_dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
  return acc;
}

}  // namespace

Matrix scaled_gram_serial(const Matrix& a, const Matrix& b, double scale) {
  require_gram(a, b);
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j) out(i, j) = row_dot(a.row(i), b.row(j)) * scale;
  return out;
}

Matrix scaled_gram(const Matrix& a, const Matrix& b, double scale) {
  require_gram(a, b);
  Matrix out(a.rows, b.rows);
  const auto n = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for schedule(static) if (n * static_cast<std::int64_t>(b.rows * a.cols) > 65536)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto ai = a.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < b.rows; ++j) out(static_cast<std::size_t>(i), j) = row_dot(ai, b.row(j)) * scale;
  }
  return out;
}

}  // namespace dap::kernels
