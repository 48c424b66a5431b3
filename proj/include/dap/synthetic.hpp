#pragma once

// Generated fixtures with known answers, shared by the tests, the acceptance
// binary and the `selftest` subcommand.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dap/core.hpp"
#include "dap/encoders.hpp"
#include "dap/search.hpp"

namespace dap::synthetic {

// "c0", "c1", ... one token per concept.
std::vector<std::string> concept_lexicon(std::size_t size);
std::string concept_text(const std::set<std::size_t>& concepts);
std::shared_ptr<SyntheticAdditiveEncoder> concept_encoder(std::size_t lexicon_size);

// Premises are distinct concept sets. The single gold step joins two disjoint
// premises; its conclusion and the goal are their union. No other pair sums to
// a multiple of the union vector, so the gold pair is the unique additive
// optimum.
ProofInstance additive_instance(std::mt19937_64& rng, std::size_t lexicon_size, std::size_t premise_count,
                                const std::string& id);

// A random binary gold tree with `internal_nodes` steps over unique fact
// texts, plus `distractors` unrelated premises. The goal is the root text.
ProofInstance gold_tree_instance(std::mt19937_64& rng, std::size_t internal_nodes, std::size_t distractors,
                                 const std::string& id);

// Instance with `premise_count` premises and an arbitrary gold pair, for pair
// partition checks.
ProofInstance random_pool_instance(std::mt19937_64& rng, std::size_t premise_count, const std::string& id);

// Produces concept-set deductions from its inputs; with the given
// probabilities a sample repeats an input or an earlier sample, which
// exercises the duplicate filters.
class RandomStepModel final : public StepModel {
 public:
  RandomStepModel(std::size_t lexicon_size, double repeat_input, double repeat_sample)
      : lexicon_size_(lexicon_size), repeat_input_(repeat_input), repeat_sample_(repeat_sample) {}
  std::vector<std::string> generate(std::string_view left, std::string_view right, std::size_t k,
                                    std::uint64_t seed) const override;
  std::string describe() const override { return "random-step-model"; }

 private:
  std::size_t lexicon_size_;
  double repeat_input_;
  double repeat_sample_;
};

struct AuditResult {
  std::size_t consanguineous_enqueues = 0;
  std::size_t duplicate_keeps = 0;
};

// Checks a finished search: no enqueued pair joins a node with itself or a
// direct parent, and no kept generation repeats its inputs or an earlier kept
// generation.
AuditResult audit_search(const ProofInstance& instance, const SearchResult& result);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Offline property checks: additive MRR, oracle replay, validator audit and
// pair partition. `scale` in (0, 1] shrinks the case counts.
std::vector<CheckResult> run_property_suite(std::uint64_t seed, double scale = 1.0);

CheckResult check_additive_mrr(std::uint64_t seed, std::size_t instances);
CheckResult check_oracle_replay(std::uint64_t seed, std::size_t trees);
CheckResult check_validator_audit(std::uint64_t seed, std::size_t searches);
CheckResult check_pair_partition(std::uint64_t seed, std::size_t instances);

}  // namespace dap::synthetic
