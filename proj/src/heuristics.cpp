#include "dap/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "dap/kernels.hpp"

namespace dap {

using nlohmann::json;

namespace {

std::string describe_pair(std::size_t i, const PairText& p) {
  return "pair " + std::to_string(i) + " ('" + p.left + "' + '" + p.right + "')";
}

void require_finite(std::span<const double> scores, std::string_view who) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw Error(ErrorKind::NonFinite, std::string(who) + " produced a non-finite score for pair " + std::to_string(i));
  }
}

}  // namespace

double additive_score(const Vector& e_left, const Vector& e_right, const Vector& e_goal) {
  return kernels::additive_cosine(e_left.values(), e_right.values(), e_goal.values());
}

AdditiveHeuristic::AdditiveHeuristic(EncoderPtr encoder) {
  if (!encoder) throw Error(ErrorKind::InvalidArgument, "additive heuristic needs an encoder");
  if (dynamic_cast<const CachingEncoder*>(encoder.get()) != nullptr)
    encoder_ = std::move(encoder);
  else
    encoder_ = std::make_shared<CachingEncoder>(std::move(encoder));
}

std::vector<double> AdditiveHeuristic::score_vectors(std::span<const Vector* const> left,
                                                     std::span<const Vector* const> right,
                                                     const Vector& target) const {
  try {
    return kernels::additive_scores(left, right, target);
  } catch (const Error& e) {
    // locate the offending pair for the message
    for (std::size_t i = 0; i < left.size(); ++i) {
      try {
        additive_score(*left[i], *right[i], target);
      } catch (const Error& inner) {
        throw Error(inner.kind(), "pair " + std::to_string(i) + ": " + inner.what());
      }
    }
    throw;
  }
}

std::vector<double> AdditiveHeuristic::score_pairs(std::span<const PairText> pairs, std::string_view target) const {
  if (pairs.empty()) return {};
  // Encode each distinct text once.
  std::vector<std::string> texts;
  std::unordered_map<std::string, std::size_t> slot;
  auto intern = [&](const std::string& t) {
    auto [it, inserted] = slot.try_emplace(normalize_text(t), texts.size());
    if (inserted) texts.push_back(t);
    return it->second;
  };
  std::vector<std::size_t> li(pairs.size()), ri(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    li[i] = intern(pairs[i].left);
    ri[i] = intern(pairs[i].right);
  }
  std::vector<Vector> vecs;
  try {
    vecs = encoder_->encode_batch(texts);
  } catch (const BatchItemError& e) {
    throw Error(ErrorKind::EncodingFailure, "text '" + texts.at(e.index()) + "': " + e.what());
  }
  Vector goal;
  try {
    goal = encoder_->encode(target);
  } catch (const Error& e) {
    throw Error(ErrorKind::EncodingFailure, "target '" + std::string(target) + "': " + e.what());
  }
  std::vector<const Vector*> lp(pairs.size()), rp(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    lp[i] = &vecs[li[i]];
    rp[i] = &vecs[ri[i]];
  }
  try {
    return kernels::additive_scores(lp, rp, goal);
  } catch (const Error&) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      try {
        additive_score(*lp[i], *rp[i], goal);
      } catch (const Error& inner) {
        throw Error(inner.kind(), describe_pair(i, pairs[i]) + ": " + inner.what());
      }
    }
    throw;
  }
}

std::vector<double> Bm25Heuristic::score_pairs(std::span<const PairText> pairs, std::string_view target) const {
  if (pairs.empty()) return {};
  Bm25Index index(params_);
  for (const auto& p : pairs) index.add_document(p.left + " " + p.right);
  index.build();
  return index.score_all(tokenize(target));
}

MockPairScorer::MockPairScorer(bool symmetric, std::optional<double> default_logit)
    : symmetric_(symmetric), default_logit_(default_logit) {}

std::string MockPairScorer::key(const PairScoreRequest& req) const {
  std::string a = normalize_text(req.left_text);
  std::string b = normalize_text(req.right_text);
  if (symmetric_ && b < a) std::swap(a, b);
  return a + '\x1f' + b + '\x1f' + normalize_text(req.goal_text);
}

void MockPairScorer::set(const PairScoreRequest& req, double logit) {
  if (!std::isfinite(logit)) throw Error(ErrorKind::NonFinite, "mock logit must be finite");
  table_[key(req)] = logit;
}

std::vector<double> MockPairScorer::score(std::span<const PairScoreRequest> requests) const {
  std::vector<double> out;
  out.reserve(requests.size());
  for (const auto& req : requests) {
    if (req.left_text.empty() || req.right_text.empty() || req.goal_text.empty())
      throw Error(ErrorKind::InvalidArgument, "pair score request fields must be nonempty");
    if (auto it = table_.find(key(req)); it != table_.end()) {
      out.push_back(it->second);
    } else if (default_logit_) {
      out.push_back(*default_logit_);
    } else {
      throw Error(ErrorKind::UnknownTripleStrict,
                  "no logit for ('" + req.left_text + "', '" + req.right_text + "', '" + req.goal_text + "')");
    }
  }
  return out;
}

std::shared_ptr<MockPairScorer> MockPairScorer::from_file(const std::string& path, bool symmetric,
                                                          std::optional<double> default_logit) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read scorer table " + path);
  auto scorer = std::make_shared<MockPairScorer>(symmetric, default_logit);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto rec = json::parse(line, nullptr, false);
    const std::string where = path + ":" + std::to_string(lineno);
    if (rec.is_discarded() || !rec.is_object()) throw Error(ErrorKind::ParseError, where + ": not a JSON object");
    try {
      scorer->set({rec.at("left").get<std::string>(), rec.at("right").get<std::string>(),
                   rec.at("goal").get<std::string>()},
                  rec.at("logit").get<double>());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    }
  }
  return scorer;
}

std::vector<double> RemotePairScorer::score(std::span<const PairScoreRequest> requests) const {
  if (requests.empty()) return {};
  json body;
  body["pairs"] = json::array();
  for (const auto& r : requests) body["pairs"].push_back({{"left", r.left_text}, {"right", r.right_text}, {"goal", r.goal_text}});
  const json resp = endpoint_.post(body);
  if (!resp.contains("logits") || !resp["logits"].is_array() || resp["logits"].size() != requests.size())
    throw Error(ErrorKind::RemoteFailure, endpoint_.config().url + ": response must carry one logit per pair");
  std::vector<double> out;
  out.reserve(requests.size());
  for (const auto& x : resp["logits"]) {
    if (!x.is_number() || !std::isfinite(x.get<double>()))
      throw Error(ErrorKind::RemoteFailure, endpoint_.config().url + ": non-numeric logit");
    out.push_back(x.get<double>());
  }
  return out;
}

double external_pair_score(const PairScorer& scorer, const PairScoreRequest& req) {
  return scorer.score(std::span<const PairScoreRequest>(&req, 1)).front();
}

ExternalPairHeuristic::ExternalPairHeuristic(std::shared_ptr<const PairScorer> scorer, bool max_of_both_orders)
    : scorer_(std::move(scorer)), max_of_both_orders_(max_of_both_orders) {
  if (!scorer_) throw Error(ErrorKind::InvalidArgument, "external heuristic needs a scorer");
}

std::vector<double> ExternalPairHeuristic::score_pairs(std::span<const PairText> pairs,
                                                       std::string_view target) const {
  if (pairs.empty()) return {};
  std::vector<PairScoreRequest> reqs;
  reqs.reserve(pairs.size() * (max_of_both_orders_ ? 2 : 1));
  for (const auto& p : pairs) reqs.push_back({p.left, p.right, std::string(target)});
  if (max_of_both_orders_) {
    for (const auto& p : pairs) reqs.push_back({p.right, p.left, std::string(target)});
  }
  auto logits = scorer_->score(reqs);
  require_finite(logits, name());
  if (max_of_both_orders_) {
    for (std::size_t i = 0; i < pairs.size(); ++i) logits[i] = std::max(logits[i], logits[i + pairs.size()]);
    logits.resize(pairs.size());
  }
  return logits;
}

void OracleHeuristic::add_gold_pair(std::string_view a, std::string_view b) {
  std::string x = normalize_text(a), y = normalize_text(b);
  if (y < x) std::swap(x, y);
  gold_.emplace(std::move(x), std::move(y));
}

std::shared_ptr<OracleHeuristic> OracleHeuristic::from_gold(const ProofInstance& instance) {
  if (!instance.gold_tree) throw Error(ErrorKind::NoGoldTree, "instance '" + instance.id + "' has no gold tree");
  auto oracle = std::make_shared<OracleHeuristic>();
  for (const auto& step : instance.gold_tree->steps) {
    oracle->add_gold_pair(*instance.text_of(step.left_id), *instance.text_of(step.right_id));
  }
  return oracle;
}

std::vector<double> OracleHeuristic::score_pairs(std::span<const PairText> pairs, std::string_view) const {
  std::vector<double> out(pairs.size(), 0.0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::string x = normalize_text(pairs[i].left), y = normalize_text(pairs[i].right);
    if (y < x) std::swap(x, y);
    if (gold_.contains({x, y})) out[i] = 1.0;
  }
  return out;
}

std::vector<RankedPair> rank_scores(std::span<const double> scores) {
  std::vector<RankedPair> ranked(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) ranked[i] = {i, scores[i], 0};
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedPair& a, const RankedPair& b) { return a.score > b.score; });
  for (std::size_t r = 0; r < ranked.size(); ++r) ranked[r].rank = r + 1;
  return ranked;
}

std::vector<RankedPair> rank_pairs(std::span<const PairText> pairs, std::string_view target,
                                   const Heuristic& heuristic) {
  if (pairs.empty()) throw Error(ErrorKind::InvalidArgument, "rank_pairs needs at least one pair");
  const auto scores = heuristic.score_pairs(pairs, target);
  if (scores.size() != pairs.size())
    throw Error(ErrorKind::InvalidArgument, heuristic.name() + " returned the wrong number of scores");
  require_finite(scores, heuristic.name());
  return rank_scores(scores);
}

std::vector<RankedPair> rank_pairs(std::span<const Vector* const> left, std::span<const Vector* const> right,
                                   const Vector& target, const AdditiveHeuristic& heuristic) {
  if (left.empty()) throw Error(ErrorKind::InvalidArgument, "rank_pairs needs at least one pair");
  return rank_scores(heuristic.score_vectors(left, right, target));
}

}  // namespace dap
