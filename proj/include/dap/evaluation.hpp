#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dap/core.hpp"
#include "dap/encoders.hpp"
#include "dap/heuristics.hpp"
#include "dap/search.hpp"

namespace dap {

enum class Conditioning { Deduction, Goal };

std::string_view to_string(Conditioning c);
Conditioning parse_conditioning(std::string_view text);

using IndexPair = std::pair<std::size_t, std::size_t>;  // first < second

// Partition of all unordered pairs of a pool of size n around the gold pair.
struct PairSets {
  IndexPair gold;
  std::vector<IndexPair> partial;  // exactly one gold member
  std::vector<IndexPair> random;   // no gold member
};

// Throws TooFewPremises when pool_size < 3, InvalidArgument for a bad gold pair.
PairSets build_pair_sets(std::size_t pool_size, std::size_t a, std::size_t b);

// One gold step seen as a ranking problem: the pool is the instance premises
// followed by the conclusions of the earlier gold steps.
struct StepExample {
  std::string instance_id;
  std::size_t step = 0;
  std::vector<std::string> pool;
  IndexPair gold;
  std::string deduction;
  std::string goal;
};

// Throws NoGoldTree for instances without a gold tree.
std::vector<StepExample> step_examples(const ProofInstance& instance);

// 1 + #(scores strictly above the gold score) + #(other scores equal to it).
std::size_t pessimistic_rank(std::span<const double> scores, std::size_t gold_index);

struct MrrOptions {
  std::size_t exhaustive_limit = 40;  // pools up to this size enumerate every pair
  std::size_t sample_size = 500;      // random pairs sampled above the limit
  std::uint64_t seed = 0;
};

// Candidate pairs for one example: gold first, then partial, then random
// (sampled when the pool exceeds the exhaustive limit).
std::vector<IndexPair> candidate_pairs(const PairSets& sets, std::size_t pool_size, const MrrOptions& options,
                                       std::uint64_t example_seed);

struct MrrExample {
  std::string instance_id;
  std::size_t step = 0;
  std::size_t candidates = 0;
  std::size_t rank = 0;
  bool sampled = false;
};

struct MrrReport {
  Conditioning conditioning = Conditioning::Deduction;
  std::string heuristic;
  std::vector<MrrExample> examples;
  std::size_t skipped_small_pools = 0;  // steps whose pool had fewer than 3 statements
  double mrr = 0.0;
};

// Throws EmptyDataset when no example can be ranked.
MrrReport mrr(std::span<const ProofInstance> instances, const Heuristic& heuristic, Conditioning conditioning,
              const MrrOptions& options = {});

double mean_reciprocal_rank(std::span<const std::size_t> ranks);

enum class DistSetting { Random, Partial, Gold, Model, GoldToModel };
inline constexpr std::array<DistSetting, 5> kDistSettings = {DistSetting::Random, DistSetting::Partial,
                                                             DistSetting::Gold, DistSetting::Model,
                                                             DistSetting::GoldToModel};
std::string_view to_string(DistSetting s);

struct DistributionReport {
  std::map<DistSetting, std::vector<double>> values;
  bool has_model = false;

  // NaN when the setting holds no values.
  double mean(DistSetting s) const;
};

DistributionReport distribution_report(std::span<const ProofInstance> instances, const Encoder& encoder,
                                       const StepModel* step_model = nullptr, const MrrOptions& options = {});

struct SearchComponents {
  std::shared_ptr<const Heuristic> heuristic;
  std::shared_ptr<const StepModel> step_model;
  std::shared_ptr<const EntailmentScorer> entailment;
  std::shared_ptr<const Encoder> agreement_encoder;  // optional
};

using ComponentFactory = std::function<SearchComponents(const ProofInstance&)>;

struct ExtrinsicInstance {
  std::string instance_id;
  std::optional<Termination> termination;  // empty when the search failed
  std::size_t steps = 0;
  std::size_t uncounted_pops = 0;
  std::string error;
};

struct ExtrinsicReport {
  std::vector<ExtrinsicInstance> instances;
  std::size_t solved = 0;
  std::size_t failed = 0;
  double solved_fraction = 0.0;
  double mean_steps = 0.0;  // over solved instances; 0 when none
};

// Runs every search independently (up to `jobs` at once; 0 = runtime default)
// and reduces the results in input order. Throws EmptyDataset on no input.
ExtrinsicReport extrinsic(std::span<const ProofInstance> instances, const ComponentFactory& factory,
                          const SearchConfig& config, std::size_t jobs = 0);

enum class SsrcCategory {
  Analogy,
  CategoricalSyllogism,
  CausalReasoning,
  Classification,
  Comparison,
  Composition,
  Division,
  ModusPonens,
  ModusTollens,
  Definition,
  TemporalLogic,
  PropositionalLogic,
  QuantificationalLogic,
  SpatialRelationship,
};
inline constexpr std::size_t kSsrcCategoryCount = 14;

enum class Perturbation { Negation, FalsePremise, IrrelevantFact, IncorrectQuantifier };
inline constexpr std::size_t kPerturbationCount = 4;

std::string_view to_string(SsrcCategory c);
std::string_view to_string(Perturbation p);
// Case- and punctuation-insensitive; throw UnknownCategory / UnknownPerturbation.
SsrcCategory parse_category(std::string_view label);
Perturbation parse_perturbation(std::string_view label);

struct SsrcExample {
  std::string id;
  SsrcCategory category = SsrcCategory::Analogy;
  std::optional<Perturbation> perturbation;
  std::array<std::string, 2> premises;
  std::string conclusion;
  std::array<std::vector<std::string>, 2> variants;  // perturbed stand-ins for each premise slot
};

// ({premise 0} u variants 0) x ({premise 1} u variants 1); the gold pair is
// index 0. Throws MissingVariants when there is nothing to rank against.
std::vector<PairText> ssrc_candidate_pairs(const SsrcExample& example);

struct SsrcRow {
  std::string id;
  SsrcCategory category;
  std::optional<Perturbation> perturbation;
  std::size_t candidates = 0;
  std::size_t rank = 0;
};

struct SsrcReport {
  std::string heuristic;
  std::vector<SsrcRow> rows;
  // (category, perturbation) cell means; the perturbation is empty for
  // unperturbed examples.
  std::map<std::pair<SsrcCategory, std::optional<Perturbation>>, double> cells;
  std::map<SsrcCategory, double> per_category;     // mean over the category's cells
  std::map<Perturbation, double> per_perturbation; // mean over category cells of that perturbation
  double overall = 0.0;                            // mean of per_category
};

// Ranks every example's gold pair against its candidates, conditioned on the
// conclusion. Throws EmptyDataset on no input.
SsrcReport ssrc_breakdown(std::span<const SsrcExample> examples, const Heuristic& heuristic);

// Recomputes the overall score from the per-category table.
double ssrc_overall_from_categories(const SsrcReport& report);

void write_mrr_csv(std::ostream& os, const MrrReport& report);
void write_mrr_json(std::ostream& os, const MrrReport& report, const MrrOptions& options);
void write_distribution_csv(std::ostream& os, const DistributionReport& report);
void write_distribution_json(std::ostream& os, const DistributionReport& report);
void write_histogram_json(std::ostream& os, const DistributionReport& report);
void write_extrinsic_csv(std::ostream& os, const ExtrinsicReport& report);
void write_extrinsic_json(std::ostream& os, const ExtrinsicReport& report);
void write_ssrc_csv(std::ostream& os, const SsrcReport& report);
void write_ssrc_json(std::ostream& os, const SsrcReport& report);

}  // namespace dap
