#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dap/core.hpp"
#include "dap/encoders.hpp"
#include "dap/evaluation.hpp"
#include "dap/kernels.hpp"
#include "dap/projection_head.hpp"

namespace dap {

// Premise-premise-deduction embeddings of one gold step.
struct Triplet {
  Vector e_a;
  Vector e_b;
  Vector e_d;
  std::string tree_id;
  std::string text_a;
  std::string text_b;
  std::string text_d;
};

// All triplets of one gold tree; trees are never split across batches.
struct TripletGroup {
  std::string tree_id;
  std::vector<Triplet> triplets;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> per_item;
};

// InfoNCE with in-batch negatives, dot-product similarity and temperature:
//   l_i = -log softmax_j(<h(a_i) + h(b_i), h(d_j)> / tau)[i]
LossResult infonce_loss(std::span<const Triplet> batch, const ProjectionHead& head, double tau);

// Loss from an explicit logit matrix (row i = item i, column i = its positive).
LossResult infonce_from_logits(const kernels::Matrix& logits);

struct LossGradients {
  LossResult loss;
  std::vector<double> grad;  // aligned with head.parameters()
};

// Reverse-mode gradients of the mean loss with respect to every head
// parameter. The parallel version distributes rows/columns of each matrix
// product across threads while keeping each element's summation order, so it
// matches the serial reference exactly.
LossGradients loss_gradients(std::span<const Triplet> batch, const ProjectionHead& head, double tau);
LossGradients loss_gradients_serial(std::span<const Triplet> batch, const ProjectionHead& head, double tau);

struct GradReport {
  std::vector<double> analytic;
  std::vector<double> numeric;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor) so that near-zero gradients
// are compared in absolute terms.
double gradient_relative_error(double analytic, double numeric, double floor = 1e-6);

// Central differences with step h on every parameter.
GradReport gradient_check(std::span<const Triplet> batch, const ProjectionHead& head, double tau, double h = 1e-5);

struct TrainConfig {
  double tau = 0.1;
  double learning_rate = 1e-3;
  std::size_t trees_per_batch = 100;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  double gate_init_scale = 0.01;
  bool shuffle = true;
  Conditioning dev_conditioning = Conditioning::Deduction;

  void check() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;   // mean batch loss before each update
  double dev_mrr = 0.0;
};

struct TrainResult {
  ProjectionHead head;   // best dev-MRR parameters
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

// Groups of tree indices forming each batch, in the order given.
std::vector<std::vector<std::size_t>> tree_batches(std::span<const std::size_t> tree_order,
                                                   std::size_t trees_per_batch);

// Full-batch gradient descent over tree batches with dev-MRR early stopping.
// `base` is frozen; only the head trains.
TrainResult train(std::span<const TripletGroup> groups, std::span<const ProofInstance> dev, EncoderPtr base,
                  const TrainConfig& config, std::optional<ProjectionHead> init = std::nullopt);

void write_history_csv(std::ostream& os, std::span<const EpochRecord> history);

}  // namespace dap
