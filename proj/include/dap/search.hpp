#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dap/core.hpp"
#include "dap/encoders.hpp"
#include "dap/heuristics.hpp"
#include "dap/remote.hpp"

namespace dap {

struct ValidatorFlags {
  bool duplicate_input = true;
  bool duplicate_prior = true;
  bool consanguinity = true;
  bool agreement = true;
};

struct SearchConfig {
  std::size_t max_steps = 10;
  std::size_t k_samples = 5;
  double t_g = 0.9;    // entailment threshold for the goal
  double t_da = 0.6;   // deduction-agreement threshold on the branch mean
  std::size_t agreement_min_count = 2;
  ValidatorFlags validators;
  std::uint64_t seed = 0;

  // Throws InvalidArgument when a field is out of range.
  void check() const;
};

// Generative step model S: proposes up to k deductions for a premise pair.
class StepModel {
 public:
  virtual ~StepModel() = default;
  virtual std::vector<std::string> generate(std::string_view left, std::string_view right, std::size_t k,
                                            std::uint64_t seed) const = 0;
  virtual std::string describe() const = 0;
};

// Replays configured conclusions for known (unordered) pairs and returns a
// tagged filler sentence, unique per pair, for everything else.
class OracleStepModel final : public StepModel {
 public:
  void add(std::string_view left, std::string_view right, std::vector<std::string> generations);
  static std::shared_ptr<OracleStepModel> from_gold(const ProofInstance& instance);
  static std::string filler(std::string_view left, std::string_view right);

  std::vector<std::string> generate(std::string_view left, std::string_view right, std::size_t k,
                                    std::uint64_t seed) const override;
  std::string describe() const override { return "oracle-step-model"; }

 private:
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> table_;
};

// POST {"left","right","k","seed"} -> {"generations": [...]}
class RemoteStepModel final : public StepModel {
 public:
  explicit RemoteStepModel(RemoteConfig config) : endpoint_(std::move(config)) {}
  std::vector<std::string> generate(std::string_view left, std::string_view right, std::size_t k,
                                    std::uint64_t seed) const override;
  std::string describe() const override { return "remote-step-model(" + endpoint_.config().url + ")"; }

 private:
  JsonEndpoint endpoint_;
};

class EntailmentScorer {
 public:
  virtual ~EntailmentScorer() = default;
  // Probability-like score in [0, 1] that `premise` entails `hypothesis`.
  virtual double score(std::string_view premise, std::string_view hypothesis) const = 0;
  virtual std::string describe() const = 0;
};

// 1.0 on normalized-text equality or a configured pair, otherwise 0.0.
class OracleEntailment final : public EntailmentScorer {
 public:
  void add(std::string_view premise, std::string_view hypothesis, double score = 1.0);
  double score(std::string_view premise, std::string_view hypothesis) const override;
  std::string describe() const override { return "oracle-entailment"; }

 private:
  std::map<std::pair<std::string, std::string>, double> table_;
};

// POST {"premise","hypothesis"} -> {"score": number}
class RemoteEntailment final : public EntailmentScorer {
 public:
  explicit RemoteEntailment(RemoteConfig config) : endpoint_(std::move(config)) {}
  double score(std::string_view premise, std::string_view hypothesis) const override;
  std::string describe() const override { return "remote-entailment(" + endpoint_.config().url + ")"; }

 private:
  JsonEndpoint endpoint_;
};

enum class FilterReason { DuplicateOfInput, DuplicateOfPrior, AgreementFailure };
enum class Termination { Proved, FringeExhausted, MaxSteps };

std::string_view to_string(FilterReason reason);
std::string_view to_string(Termination termination);

struct AgreementResult {
  double agreement = 1.0;
  double branch_mean = 1.0;
  std::size_t branch_count = 1;
  bool prune = false;
};

// agreement = cos(pair_sum, gen_embedding); the branch mean averages it with
// the agreements of every intermediate ancestor. Prunes only once the branch
// holds at least `agreement_min_count` generations.
AgreementResult deduction_agreement(const Vector& pair_sum, const Vector& gen_embedding,
                                    std::span<const double> ancestor_agreements, const SearchConfig& config);

struct Verdict {
  bool keep = true;
  std::optional<FilterReason> reason;
};

// Applies the duplicate rules and, when supplied, the agreement verdict.
Verdict validate_generation(std::string_view left_text, std::string_view right_text, std::string_view generation,
                            const std::unordered_set<std::string>& prior_kept_normalized,
                            const std::optional<AgreementResult>& agreement, const ValidatorFlags& flags);

// True when pairing a and b would combine a node with itself or with one of
// its direct parents.
bool consanguineous(NodeRef a, NodeRef b, std::span<const Intermediate> intermediates);

struct ProofNode {
  Statement statement;
  std::optional<NodeRef> source;  // position in the search pool, when the tree came from a search
  std::optional<std::pair<std::size_t, std::size_t>> children;
};

// Each distinct premise and intermediate appears once; internal nodes carry
// exactly their recorded parents.
struct ProofTree {
  std::vector<ProofNode> nodes;
  std::size_t root = 0;

  std::size_t internal_count() const;
  std::vector<std::size_t> leaves() const;
  // Order-insensitive structural form over normalized text; equal forms mean
  // isomorphic trees.
  std::string canonical_form() const;
};

ProofTree proof_tree_from_gold(const ProofInstance& instance);

struct GenerationOutcome {
  std::string text;
  bool kept = false;
  std::optional<FilterReason> reason;
  std::optional<std::size_t> intermediate;
  std::optional<double> agreement;
  std::optional<double> entailment;
};

struct StepRecord {
  CandidateStep step;
  std::size_t pop_index = 0;
  std::vector<GenerationOutcome> generations;
};

struct TraceEvent {
  enum class Type { Enqueued, Popped, Generation, NotCounted, Pruned, Proved, Terminated };
  Type type = Type::Enqueued;
  std::optional<CandidateStep> step;
  std::optional<GenerationOutcome> generation;
  std::vector<NodeRef> nodes;
  std::optional<std::size_t> pop_index;
  std::optional<double> value;
  std::optional<Termination> termination;
};

struct SearchResult {
  std::vector<StepRecord> steps_taken;     // counted pops (at least one kept generation)
  std::vector<StepRecord> uncounted_pops;  // pops whose generations were all filtered
  std::vector<Intermediate> intermediates;
  bool proved = false;
  std::optional<ProofTree> proof;
  std::optional<std::size_t> proving_node;
  Termination termination = Termination::FringeExhausted;
  std::vector<TraceEvent> trace;
};

// Aborts a search; carries everything recorded up to the failure.
class SearchError : public Error {
 public:
  SearchError(ErrorKind kind, const std::string& message, std::shared_ptr<const SearchResult> partial)
      : Error(kind, message), partial_(std::move(partial)) {}
  const SearchResult& partial() const { return *partial_; }

 private:
  std::shared_ptr<const SearchResult> partial_;
};

// Best-first proof search. The fringe starts with every unordered premise
// pair; each pop samples k generations, validates them, checks each kept one
// against the goal and pairs it with all premises and earlier kept
// generations. `agreement_encoder` defaults to the heuristic's encoder; with
// neither, deduction agreement is disabled.
SearchResult run_search(const ProofInstance& instance, const Heuristic& heuristic, const StepModel& step_model,
                        const EntailmentScorer& entailment, const SearchConfig& config,
                        const Encoder* agreement_encoder = nullptr);

// Ancestor closure of one intermediate, as a proof tree rooted at it.
ProofTree extract_proof(std::span<const Statement> premises, std::span<const Intermediate> intermediates,
                        std::size_t proving_node);

void write_trace(std::ostream& os, const SearchResult& result, std::span<const Statement> premises);

}  // namespace dap
