#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dap/bm25.hpp"
#include "dap/core.hpp"
#include "dap/encoders.hpp"
#include "dap/remote.hpp"

namespace dap {

struct PairText {
  std::string left;
  std::string right;
};

// A planning heuristic M: scores candidate premise pairs against a target
// statement (a deduction or the goal). Higher is better. Implementations are
// read-only after construction and may be called concurrently.
class Heuristic {
 public:
  virtual ~Heuristic() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> score_pairs(std::span<const PairText> pairs, std::string_view target) const = 0;
  // Encoder usable for deduction agreement; null when the heuristic is not vector based.
  virtual const Encoder* encoder() const { return nullptr; }
};

using HeuristicPtr = std::shared_ptr<const Heuristic>;

// cos(e_left + e_right, e_goal)
double additive_score(const Vector& e_left, const Vector& e_right, const Vector& e_goal);

// Deductive additivity under an arbitrary encoder. The encoder is wrapped in
// a cache unless it already is one.
class AdditiveHeuristic final : public Heuristic {
 public:
  explicit AdditiveHeuristic(EncoderPtr encoder);

  std::string name() const override { return "additive[" + encoder_->describe() + "]"; }
  std::vector<double> score_pairs(std::span<const PairText> pairs, std::string_view target) const override;
  std::vector<double> score_vectors(std::span<const Vector* const> left, std::span<const Vector* const> right,
                                    const Vector& target) const;
  const Encoder* encoder() const override { return encoder_.get(); }

 private:
  EncoderPtr encoder_;
};

// Indexes each candidate pair as "left right" and scores it with the target
// text as the BM25 query. Collection statistics come from the scored batch.
class Bm25Heuristic final : public Heuristic {
 public:
  explicit Bm25Heuristic(Bm25Params params = {}) : params_(params) {}

  std::string name() const override { return "bm25"; }
  std::vector<double> score_pairs(std::span<const PairText> pairs, std::string_view target) const override;

 private:
  Bm25Params params_;
};

struct PairScoreRequest {
  std::string left_text;
  std::string right_text;
  std::string goal_text;
};

// Early-fusion scorer over (left, right, goal) triples returning logits.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual std::vector<double> score(std::span<const PairScoreRequest> requests) const = 0;
  virtual std::string describe() const = 0;
};

// Lookup table keyed by normalized triples. With `symmetric` the two premises
// are canonicalized so (a,b,g) and (b,a,g) share an entry. Without a default
// unknown triples raise UnknownTripleStrict.
class MockPairScorer final : public PairScorer {
 public:
  MockPairScorer(bool symmetric, std::optional<double> default_logit);

  void set(const PairScoreRequest& req, double logit);
  std::vector<double> score(std::span<const PairScoreRequest> requests) const override;
  std::string describe() const override { return "mock-pair-scorer"; }

  // Reads {"left","right","goal","logit"} lines.
  static std::shared_ptr<MockPairScorer> from_file(const std::string& path, bool symmetric,
                                                   std::optional<double> default_logit);

 private:
  std::string key(const PairScoreRequest& req) const;

  bool symmetric_;
  std::optional<double> default_logit_;
  std::map<std::string, double> table_;
};

// POST {"pairs": [{"left","right","goal"}, ...]} -> {"logits": [...]}
class RemotePairScorer final : public PairScorer {
 public:
  explicit RemotePairScorer(RemoteConfig config) : endpoint_(std::move(config)) {}
  std::vector<double> score(std::span<const PairScoreRequest> requests) const override;
  std::string describe() const override { return "remote-pair-scorer(" + endpoint_.config().url + ")"; }

 private:
  JsonEndpoint endpoint_;
};

double external_pair_score(const PairScorer& scorer, const PairScoreRequest& req);

class ExternalPairHeuristic final : public Heuristic {
 public:
  // Ordered by default; `max_of_both_orders` scores (l,r) and (r,l) and keeps the max.
  explicit ExternalPairHeuristic(std::shared_ptr<const PairScorer> scorer, bool max_of_both_orders = false);

  std::string name() const override { return "scorer[" + scorer_->describe() + "]"; }
  std::vector<double> score_pairs(std::span<const PairText> pairs, std::string_view target) const override;

 private:
  std::shared_ptr<const PairScorer> scorer_;
  bool max_of_both_orders_;
};

// Scores 1 for pairs listed as gold (unordered, normalized text), else 0.
// Used to replay annotated proofs.
class OracleHeuristic final : public Heuristic {
 public:
  void add_gold_pair(std::string_view a, std::string_view b);
  static std::shared_ptr<OracleHeuristic> from_gold(const ProofInstance& instance);

  std::string name() const override { return "oracle"; }
  std::vector<double> score_pairs(std::span<const PairText> pairs, std::string_view target) const override;

 private:
  std::set<std::pair<std::string, std::string>> gold_;
};

struct RankedPair {
  std::size_t index = 0;  // position in the input list (the tie-break sequence)
  double score = 0.0;
  std::size_t rank = 0;   // 1-based
};

// Stable ranking: score descending, input order ascending.
std::vector<RankedPair> rank_scores(std::span<const double> scores);
std::vector<RankedPair> rank_pairs(std::span<const PairText> pairs, std::string_view target,
                                   const Heuristic& heuristic);
std::vector<RankedPair> rank_pairs(std::span<const Vector* const> left, std::span<const Vector* const> right,
                                   const Vector& target, const AdditiveHeuristic& heuristic);

}  // namespace dap
