#include "dap/projection_head.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace dap {

namespace {

constexpr const char* kHeadMagic = "dap-projection-head";
constexpr int kHeadVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const char* block_name(ProjectionHead::Block b) {
  switch (b) {
    case ProjectionHead::Block::GateWeight: return "gate_w";
    case ProjectionHead::Block::GateBias: return "gate_b";
    case ProjectionHead::Block::ValueWeight: return "value_w";
    case ProjectionHead::Block::ValueBias: return "value_b";
  }
  return "?";
}

constexpr ProjectionHead::Block kBlocks[] = {
    ProjectionHead::Block::GateWeight, ProjectionHead::Block::GateBias,
    ProjectionHead::Block::ValueWeight, ProjectionHead::Block::ValueBias};

}  // namespace

ProjectionHead::ProjectionHead(std::size_t dim)
    : dim_(dim), params_(kLayers * 2 * (dim * dim + dim), 0.0) {
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "projection head dimension must be positive");
}

ProjectionHead ProjectionHead::identity_init(std::size_t dim, std::uint64_t seed, double gate_scale) {
  ProjectionHead head(dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-gate_scale, gate_scale);
  for (std::size_t l = 0; l < kLayers; ++l) {
    for (double& w : head.block(l, Block::GateWeight)) w = uni(rng);
    for (double& b : head.block(l, Block::GateBias)) b = uni(rng);
  }
  return head;
}

std::size_t ProjectionHead::offset(std::size_t layer, Block b) const {
  const std::size_t layer_size = 2 * (dim_ * dim_ + dim_);
  std::size_t off = layer * layer_size;
  switch (b) {
    case Block::GateWeight: return off;
    case Block::GateBias: return off + dim_ * dim_;
    case Block::ValueWeight: return off + dim_ * dim_ + dim_;
    case Block::ValueBias: return off + 2 * dim_ * dim_ + dim_;
  }
  return off;
}

std::string ProjectionHead::parameter_name(std::size_t flat) const {
  const std::size_t layer_size = 2 * (dim_ * dim_ + dim_);
  const std::size_t layer = flat / layer_size;
  for (Block b : kBlocks) {
    const std::size_t off = offset(layer, b);
    if (flat >= off && flat < off + block_size(b)) {
      const std::size_t local = flat - off;
      std::ostringstream os;
      os << "layer" << layer << '.' << block_name(b) << '[';
      if (block_size(b) == dim_ * dim_)
        os << local / dim_ << ',' << local % dim_;
      else
        os << local;
      os << ']';
      return os.str();
    }
  }
  return "?";
}

void ProjectionHead::forward(std::span<const double> in, std::span<double> out) const {
  if (in.size() != dim_ || out.size() != dim_)
    throw Error(ErrorKind::DimensionMismatch,
                "head dim " + std::to_string(dim_) + ", input dim " + std::to_string(in.size()));
  std::vector<double> x(in.begin(), in.end());
  std::vector<double> gate(dim_), value(dim_);
  for (std::size_t l = 0; l < kLayers; ++l) {
    const auto wg = block(l, Block::GateWeight);
    const auto bg = block(l, Block::GateBias);
    const auto wv = block(l, Block::ValueWeight);
    const auto bv = block(l, Block::ValueBias);
    for (std::size_t j = 0; j < dim_; ++j) {
      gate[j] = bg[j];
      value[j] = bv[j];
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      const double xi = x[i];
      const double* wg_row = wg.data() + i * dim_;
      const double* wv_row = wv.data() + i * dim_;
      for (std::size_t j = 0; j < dim_; ++j) {
        gate[j] += xi * wg_row[j];
        value[j] += xi * wv_row[j];
      }
    }
    for (std::size_t j = 0; j < dim_; ++j) x[j] += sigmoid(gate[j]) * value[j];
  }
  std::copy(x.begin(), x.end(), out.begin());
}

Vector ProjectionHead::forward(const Vector& v) const {
  std::vector<double> out(dim_);
  forward(v.values(), out);
  return Vector(std::move(out));
}

void write_head(std::ostream& os, const ProjectionHead& head) {
  os << kHeadMagic << ' ' << kHeadVersion << '\n';
  os << "dim " << head.dim() << '\n';
  os << "layers " << ProjectionHead::kLayers << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t l = 0; l < ProjectionHead::kLayers; ++l) {
    for (auto b : kBlocks) {
      os << "layer " << l << ' ' << block_name(b) << '\n';
      const auto values = head.block(l, b);
      const std::size_t cols = head.dim();
      for (std::size_t i = 0; i < values.size(); ++i) {
        os << values[i] << (((i + 1) % cols == 0) ? '\n' : ' ');
      }
    }
  }
}

ProjectionHead read_head(std::istream& is) {
  auto fail = [](const std::string& why) -> ProjectionHead {
    throw Error(ErrorKind::ParseError, "projection head checkpoint: " + why);
  };
  std::string magic, key;
  int version = 0;
  if (!(is >> magic >> version) || magic != kHeadMagic) return fail("bad header");
  if (version != kHeadVersion) return fail("unsupported version " + std::to_string(version));
  std::size_t dim = 0, layers = 0;
  if (!(is >> key >> dim) || key != "dim" || dim == 0) return fail("bad dim line");
  if (!(is >> key >> layers) || key != "layers" || layers != ProjectionHead::kLayers)
    return fail("bad layers line");
  ProjectionHead head(dim);
  for (std::size_t l = 0; l < layers; ++l) {
    for (auto b : kBlocks) {
      std::size_t got_layer = 0;
      std::string name;
      if (!(is >> key >> got_layer >> name) || key != "layer" || got_layer != l || name != block_name(b))
        return fail("expected block layer " + std::to_string(l) + " " + block_name(b));
      for (double& v : head.block(l, b)) {
        if (!(is >> v) || !std::isfinite(v)) return fail("bad value in " + std::string(block_name(b)));
      }
    }
  }
  return head;
}

void save_head(const std::string& path, const ProjectionHead& head) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  write_head(os, head);
}

ProjectionHead load_head(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
  return read_head(is);
}

}  // namespace dap
