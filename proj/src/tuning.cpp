#include "dap/tuning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>

#include "dap/heuristics.hpp"

namespace dap {

using kernels::Matrix;

namespace {

using Block = ProjectionHead::Block;

// Below this many multiply-adds a region stays single threaded.
constexpr std::int64_t kParallelWork = 1 << 15;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct HeadTape {
  std::array<Matrix, ProjectionHead::kLayers> input;
  std::array<Matrix, ProjectionHead::kLayers> gate;   // sigmoid activations
  std::array<Matrix, ProjectionHead::kLayers> value;
  Matrix output;
};

// out(r, j) = b_j + sum_i x(r, i) W(i, j), summed in ascending i.
template <bool Parallel>
void affine(const Matrix& x, std::span<const double> w, std::span<const double> b, Matrix& out) {
  const std::size_t d = x.cols;
  const auto rows = static_cast<std::int64_t>(x.rows);
  const bool big = rows * static_cast<std::int64_t>(d * d) > kParallelWork;
#pragma omp parallel for schedule(static) if (Parallel && big)
  for (std::int64_t r = 0; r < rows; ++r) {
    auto xr = x.row(static_cast<std::size_t>(r));
    auto o = out.row(static_cast<std::size_t>(r));
    std::copy(b.begin(), b.end(), o.begin());
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = xr[i];
      const double* wrow = w.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) o[j] += xi * wrow[j];
    }
  }
}

template <bool Parallel>
HeadTape head_forward_batch(const ProjectionHead& head, const Matrix& in) {
  HeadTape tape;
  const std::size_t d = head.dim();
  Matrix x = in;
  for (std::size_t l = 0; l < ProjectionHead::kLayers; ++l) {
    Matrix gate(x.rows, d), value(x.rows, d);
    affine<Parallel>(x, head.block(l, Block::GateWeight), head.block(l, Block::GateBias), gate);
    affine<Parallel>(x, head.block(l, Block::ValueWeight), head.block(l, Block::ValueBias), value);
    Matrix next = x;
    for (std::size_t k = 0; k < gate.data.size(); ++k) {
      gate.data[k] = sigmoid(gate.data[k]);
      next.data[k] += gate.data[k] * value.data[k];
    }
    tape.input[l] = std::move(x);
    tape.gate[l] = std::move(gate);
    tape.value[l] = std::move(value);
    x = std::move(next);
  }
  tape.output = std::move(x);
  return tape;
}

// Accumulates parameter gradients for d(loss)/d(output) = d_out.
template <bool Parallel>
void head_backward_batch(const ProjectionHead& head, const HeadTape& tape, Matrix d_out, std::vector<double>& grad) {
  const std::size_t d = head.dim();
  const std::size_t m = d_out.rows;
  const bool big = static_cast<std::int64_t>(m * d * d) > kParallelWork;
  Matrix d_value(m, d), d_gate(m, d);
  for (std::size_t li = ProjectionHead::kLayers; li-- > 0;) {
    const Matrix& x = tape.input[li];
    const Matrix& g = tape.gate[li];
    const Matrix& v = tape.value[li];
    for (std::size_t k = 0; k < d_out.data.size(); ++k) {
      d_value.data[k] = d_out.data[k] * g.data[k];
      d_gate.data[k] = d_out.data[k] * v.data[k] * g.data[k] * (1.0 - g.data[k]);
    }
    double* g_wg = grad.data() + head.offset(li, Block::GateWeight);
    double* g_bg = grad.data() + head.offset(li, Block::GateBias);
    double* g_wv = grad.data() + head.offset(li, Block::ValueWeight);
    double* g_bv = grad.data() + head.offset(li, Block::ValueBias);
    const auto di = static_cast<std::int64_t>(d);
    // Each thread owns whole rows of the weight gradients; rows are summed in
    // ascending batch order.
#pragma omp parallel for schedule(static) if (Parallel && big)
    for (std::int64_t i = 0; i < di; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      for (std::size_t r = 0; r < m; ++r) {
        const double xi = x(r, iu);
        const auto dv = d_value.row(r);
        const auto du = d_gate.row(r);
        double* wv_row = g_wv + iu * d;
        double* wg_row = g_wg + iu * d;
        for (std::size_t j = 0; j < d; ++j) {
          wv_row[j] += xi * dv[j];
          wg_row[j] += xi * du[j];
        }
      }
    }
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        g_bv[j] += d_value(r, j);
        g_bg[j] += d_gate(r, j);
      }
    }
    if (li == 0) break;  // the base encoder is frozen
    const auto wv = head.block(li, Block::ValueWeight);
    const auto wg = head.block(li, Block::GateWeight);
    Matrix d_in(m, d);
    const auto mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (Parallel && big)
    for (std::int64_t r = 0; r < mi; ++r) {
      const auto ru = static_cast<std::size_t>(r);
      const auto dv = d_value.row(ru);
      const auto du = d_gate.row(ru);
      for (std::size_t i = 0; i < d; ++i) {
        double acc = d_out(ru, i);
        const double* wv_row = wv.data() + i * d;
        const double* wg_row = wg.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) acc += wv_row[j] * dv[j] + wg_row[j] * du[j];
        d_in(ru, i) = acc;
      }
    }
    d_out = std::move(d_in);
  }
}

std::size_t check_batch(std::span<const Triplet> batch, const ProjectionHead& head, double tau) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "InfoNCE needs at least one triplet");
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "temperature must be positive");
  const std::size_t d = head.dim();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch[i];
    if (t.e_a.dim() != d || t.e_b.dim() != d || t.e_d.dim() != d)
      throw Error(ErrorKind::DimensionMismatch, "triplet " + std::to_string(i) + " does not match head dim " +
                                                    std::to_string(d));
  }
  return d;
}

// Rows [a_0..a_{n-1}, b_0..b_{n-1}, d_0..d_{n-1}].
Matrix stack_inputs(std::span<const Triplet> batch, std::size_t d) {
  const std::size_t n = batch.size();
  Matrix m(3 * n, d);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(batch[i].e_a.values().begin(), batch[i].e_a.values().end(), m.row(i).begin());
    std::copy(batch[i].e_b.values().begin(), batch[i].e_b.values().end(), m.row(n + i).begin());
    std::copy(batch[i].e_d.values().begin(), batch[i].e_d.values().end(), m.row(2 * n + i).begin());
  }
  return m;
}

struct Projected {
  Matrix sums;     // h(a_i) + h(b_i)
  Matrix targets;  // h(d_j)
};

Projected split_outputs(const Matrix& out, std::size_t n) {
  const std::size_t d = out.cols;
  Projected p{Matrix(n, d), Matrix(n, d)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      p.sums(i, k) = out(i, k) + out(n + i, k);
      p.targets(i, k) = out(2 * n + i, k);
    }
  }
  return p;
}

template <bool Parallel>
LossGradients gradients_impl(std::span<const Triplet> batch, const ProjectionHead& head, double tau) {
  const std::size_t d = check_batch(batch, head, tau);
  const std::size_t n = batch.size();
  const HeadTape tape = head_forward_batch<Parallel>(head, stack_inputs(batch, d));
  const Projected p = split_outputs(tape.output, n);
  const Matrix logits =
      Parallel ? kernels::scaled_gram(p.sums, p.targets, 1.0 / tau) : kernels::scaled_gram_serial(p.sums, p.targets, 1.0 / tau);

  LossGradients out;
  out.loss = infonce_from_logits(logits);

  // d(mean loss)/d(logit_ij) = (softmax_ij - [i == j]) / n
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(logits(i, j) - mx);
    for (std::size_t j = 0; j < n; ++j) {
      const double prob = std::exp(logits(i, j) - mx) / z;
      g(i, j) = (prob - (i == j ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }

  Matrix d_out(3 * n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      double ds = 0.0, dt = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        ds += g(i, j) * p.targets(j, k);
        dt += g(j, i) * p.sums(j, k);
      }
      d_out(i, k) = ds / tau;
      d_out(n + i, k) = ds / tau;
      d_out(2 * n + i, k) = dt / tau;
    }
  }
  out.grad.assign(head.parameter_count(), 0.0);
  head_backward_batch<Parallel>(head, tape, std::move(d_out), out.grad);
  return out;
}

}  // namespace

LossResult infonce_from_logits(const Matrix& logits) {
  if (logits.rows == 0) throw Error(ErrorKind::EmptyBatch, "InfoNCE needs at least one item");
  if (logits.rows != logits.cols) throw Error(ErrorKind::DimensionMismatch, "logit matrix must be square");
  const std::size_t n = logits.rows;
  LossResult out;
  out.per_item.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(logits(i, j) - mx);
    const double item = std::max(0.0, mx + std::log(z) - logits(i, i));
    out.per_item[i] = item;
    total += item;
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

LossResult infonce_loss(std::span<const Triplet> batch, const ProjectionHead& head, double tau) {
  const std::size_t d = check_batch(batch, head, tau);
  const HeadTape tape = head_forward_batch<true>(head, stack_inputs(batch, d));
  const Projected p = split_outputs(tape.output, batch.size());
  return infonce_from_logits(kernels::scaled_gram(p.sums, p.targets, 1.0 / tau));
}

LossGradients loss_gradients(std::span<const Triplet> batch, const ProjectionHead& head, double tau) {
  return gradients_impl<true>(batch, head, tau);
}

LossGradients loss_gradients_serial(std::span<const Triplet> batch, const ProjectionHead& head, double tau) {
  return gradients_impl<false>(batch, head, tau);
}

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradReport gradient_check(std::span<const Triplet> batch, const ProjectionHead& head, double tau, double h) {
  GradReport report;
  report.analytic = loss_gradients(batch, head, tau).grad;
  report.numeric.resize(head.parameter_count());
  ProjectionHead probe = head;
  auto params = probe.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + h;
    const double up = infonce_loss(batch, probe, tau).loss;
    params[p] = saved - h;
    const double down = infonce_loss(batch, probe, tau).loss;
    params[p] = saved;
    report.numeric[p] = (up - down) / (2.0 * h);
    const double err = gradient_relative_error(report.analytic[p], report.numeric[p]);
    if (err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = p;
    }
  }
  return report;
}

void TrainConfig::check() const {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::InvalidArgument, "learning rate must be non-negative");
  if (trees_per_batch == 0) throw Error(ErrorKind::InvalidArgument, "trees_per_batch must be at least 1");
  if (max_epochs == 0) throw Error(ErrorKind::InvalidArgument, "max_epochs must be at least 1");
  if (patience == 0) throw Error(ErrorKind::InvalidArgument, "patience must be at least 1");
}

std::vector<std::vector<std::size_t>> tree_batches(std::span<const std::size_t> tree_order,
                                                   std::size_t trees_per_batch) {
  if (trees_per_batch == 0) throw Error(ErrorKind::InvalidArgument, "trees_per_batch must be at least 1");
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < tree_order.size(); start += trees_per_batch) {
    const std::size_t end = std::min(tree_order.size(), start + trees_per_batch);
    batches.emplace_back(tree_order.begin() + static_cast<std::ptrdiff_t>(start),
                         tree_order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

TrainResult train(std::span<const TripletGroup> groups, std::span<const ProofInstance> dev, EncoderPtr base,
                  const TrainConfig& config, std::optional<ProjectionHead> init) {
  config.check();
  if (!base) throw Error(ErrorKind::InvalidArgument, "training needs a base encoder");
  std::vector<std::size_t> usable;
  std::size_t dim = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].triplets.empty()) continue;
    usable.push_back(g);
    if (dim == 0) dim = groups[g].triplets.front().e_a.dim();
  }
  if (usable.empty()) throw Error(ErrorKind::NoTriplets, "no triplets to train on");

  ProjectionHead head = init ? std::move(*init) : ProjectionHead::identity_init(dim, config.seed, config.gate_init_scale);
  if (head.dim() != dim)
    throw Error(ErrorKind::DimensionMismatch, "initial head dim " + std::to_string(head.dim()) + " vs triplet dim " +
                                                  std::to_string(dim));

  // The base encoder is frozen, so its vectors are computed once for all epochs.
  EncoderPtr frozen = std::make_shared<CachingEncoder>(std::move(base));

  TrainResult result;
  result.head = head;
  double best = -1.0;
  std::size_t stale = 0;
  std::mt19937_64 rng(config.seed);
  std::vector<Triplet> batch;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<std::size_t> order = usable;
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    const auto batches = tree_batches(order, config.trees_per_batch);
    for (const auto& trees : batches) {
      batch.clear();
      for (std::size_t t : trees) batch.insert(batch.end(), groups[t].triplets.begin(), groups[t].triplets.end());
      const LossGradients lg = loss_gradients(batch, head, config.tau);
      loss_sum += lg.loss.loss;
      auto params = head.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= config.learning_rate * lg.grad[p];
    }
    const AdditiveHeuristic heuristic(std::make_shared<ProjectedEncoder>(frozen, head));
    const double dev_mrr = mrr(dev, heuristic, config.dev_conditioning).mrr;
    result.history.push_back({epoch, loss_sum / static_cast<double>(batches.size()), dev_mrr});
    if (dev_mrr > best) {
      best = dev_mrr;
      result.head = head;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

void write_history_csv(std::ostream& os, std::span<const EpochRecord> history) {
  os << "epoch,loss,dev_mrr\n";
  char buf[128];
  for (const auto& rec : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.4f\n", rec.epoch, rec.loss, rec.dev_mrr);
    os << buf;
  }
}

}  // namespace dap
