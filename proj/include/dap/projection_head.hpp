#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dap/core.hpp"

namespace dap {

// Three residual GLU layers of width `dim`:
//   y = x + sigmoid(x Wg + bg) * (x Wv + bv)
// Weights are row-major with W[i * dim + j] mapping input i to output j.
// All parameters live in one flat buffer so optimizers and gradient checks
// can treat the head as a single vector.
class ProjectionHead {
 public:
  static constexpr std::size_t kLayers = 3;

  enum class Block { GateWeight, GateBias, ValueWeight, ValueBias };

  ProjectionHead() = default;
  // All parameters zero: the identity map.
  explicit ProjectionHead(std::size_t dim);

  // Gate weights/biases uniform in [-gate_scale, gate_scale]; value path zero.
  static ProjectionHead identity_init(std::size_t dim, std::uint64_t seed, double gate_scale = 0.01);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::size_t offset(std::size_t layer, Block block) const;
  std::size_t block_size(Block block) const noexcept {
    return (block == Block::GateWeight || block == Block::ValueWeight) ? dim_ * dim_ : dim_;
  }
  std::span<const double> block(std::size_t layer, Block b) const {
    return std::span<const double>(params_).subspan(offset(layer, b), block_size(b));
  }
  std::span<double> block(std::size_t layer, Block b) {
    return std::span<double>(params_).subspan(offset(layer, b), block_size(b));
  }
  // Describes a flat parameter index as e.g. "layer1.value_w[3,2]".
  std::string parameter_name(std::size_t flat_index) const;

  Vector forward(const Vector& v) const;
  void forward(std::span<const double> in, std::span<double> out) const;

  bool operator==(const ProjectionHead&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> params_;
};

// Versioned text checkpoint; values written with round-trip precision.
void write_head(std::ostream& os, const ProjectionHead& head);
ProjectionHead read_head(std::istream& is);
void save_head(const std::string& path, const ProjectionHead& head);
ProjectionHead load_head(const std::string& path);

}  // namespace dap
