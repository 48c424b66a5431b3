#include "dap/search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace dap {

using nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::pair<std::string, std::string> unordered_key(std::string_view a, std::string_view b) {
  std::string x = normalize_text(a), y = normalize_text(b);
  if (y < x) std::swap(x, y);
  return {std::move(x), std::move(y)};
}

}  // namespace

void SearchConfig::check() const {
  if (max_steps == 0) throw Error(ErrorKind::InvalidArgument, "max_steps must be positive");
  if (k_samples == 0) throw Error(ErrorKind::InvalidArgument, "k_samples must be positive");
  if (!(t_g > 0.0 && t_g < 1.0)) throw Error(ErrorKind::InvalidArgument, "t_g must lie in (0, 1)");
  if (!(t_da > -1.0 && t_da < 1.0)) throw Error(ErrorKind::InvalidArgument, "t_da must lie in (-1, 1)");
}

std::string_view to_string(FilterReason reason) {
  switch (reason) {
    case FilterReason::DuplicateOfInput: return "DuplicateOfInput";
    case FilterReason::DuplicateOfPrior: return "DuplicateOfPrior";
    case FilterReason::AgreementFailure: return "AgreementFailure";
  }
  return "?";
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::Proved: return "Proved";
    case Termination::FringeExhausted: return "FringeExhausted";
    case Termination::MaxSteps: return "MaxSteps";
  }
  return "?";
}

void OracleStepModel::add(std::string_view left, std::string_view right, std::vector<std::string> generations) {
  auto& slot = table_[unordered_key(left, right)];
  slot.insert(slot.end(), std::make_move_iterator(generations.begin()), std::make_move_iterator(generations.end()));
}

std::shared_ptr<OracleStepModel> OracleStepModel::from_gold(const ProofInstance& instance) {
  if (!instance.gold_tree) throw Error(ErrorKind::NoGoldTree, "instance '" + instance.id + "' has no gold tree");
  auto model = std::make_shared<OracleStepModel>();
  for (const auto& step : instance.gold_tree->steps) {
    model->add(*instance.text_of(step.left_id), *instance.text_of(step.right_id), {step.conclusion.text});
  }
  return model;
}

std::string OracleStepModel::filler(std::string_view left, std::string_view right) {
  const auto [a, b] = unordered_key(left, right);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : a + '\x1f' + b) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << "unsupported deduction " << std::hex << h;
  return os.str();
}

std::vector<std::string> OracleStepModel::generate(std::string_view left, std::string_view right, std::size_t k,
                                                   std::uint64_t) const {
  if (auto it = table_.find(unordered_key(left, right)); it != table_.end()) {
    std::vector<std::string> out(it->second.begin(),
                                 it->second.begin() + static_cast<std::ptrdiff_t>(std::min(k, it->second.size())));
    return out;
  }
  return {filler(left, right)};
}

std::vector<std::string> RemoteStepModel::generate(std::string_view left, std::string_view right, std::size_t k,
                                                   std::uint64_t seed) const {
  const json resp = endpoint_.post({{"left", left}, {"right", right}, {"k", k}, {"seed", seed}});
  if (!resp.contains("generations") || !resp["generations"].is_array())
    throw Error(ErrorKind::RemoteFailure, endpoint_.config().url + ": response lacks 'generations'");
  std::vector<std::string> out;
  for (const auto& g : resp["generations"]) {
    if (!g.is_string()) throw Error(ErrorKind::RemoteFailure, endpoint_.config().url + ": non-string generation");
    out.push_back(g.get<std::string>());
  }
  return out;
}

void OracleEntailment::add(std::string_view premise, std::string_view hypothesis, double score) {
  if (!(score >= 0.0 && score <= 1.0)) throw Error(ErrorKind::InvalidArgument, "entailment score must lie in [0,1]");
  table_[{normalize_text(premise), normalize_text(hypothesis)}] = score;
}

double OracleEntailment::score(std::string_view premise, std::string_view hypothesis) const {
  std::string p = normalize_text(premise), h = normalize_text(hypothesis);
  if (p == h) return 1.0;
  if (auto it = table_.find({p, h}); it != table_.end()) return it->second;
  return 0.0;
}

double RemoteEntailment::score(std::string_view premise, std::string_view hypothesis) const {
  const json resp = endpoint_.post({{"premise", premise}, {"hypothesis", hypothesis}});
  if (!resp.contains("score") || !resp["score"].is_number())
    throw Error(ErrorKind::RemoteFailure, endpoint_.config().url + ": response lacks numeric 'score'");
  const double s = resp["score"].get<double>();
  if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorKind::RemoteFailure, endpoint_.config().url + ": score outside [0,1]");
  return s;
}

AgreementResult deduction_agreement(const Vector& pair_sum, const Vector& gen_embedding,
                                    std::span<const double> ancestor_agreements, const SearchConfig& config) {
  AgreementResult r;
  r.agreement = cosine(pair_sum, gen_embedding);
  double total = r.agreement;
  for (double a : ancestor_agreements) total += a;
  r.branch_count = ancestor_agreements.size() + 1;
  r.branch_mean = total / static_cast<double>(r.branch_count);
  r.prune = r.branch_count >= config.agreement_min_count && r.branch_mean < config.t_da;
  return r;
}

Verdict validate_generation(std::string_view left_text, std::string_view right_text, std::string_view generation,
                            const std::unordered_set<std::string>& prior_kept_normalized,
                            const std::optional<AgreementResult>& agreement, const ValidatorFlags& flags) {
  const std::string g = normalize_text(generation);
  if (g.empty()) throw Error(ErrorKind::InvalidArgument, "generation text is empty");
  if (flags.duplicate_input && (g == normalize_text(left_text) || g == normalize_text(right_text)))
    return {false, FilterReason::DuplicateOfInput};
  if (flags.duplicate_prior && prior_kept_normalized.contains(g)) return {false, FilterReason::DuplicateOfPrior};
  if (flags.agreement && agreement && agreement->prune) return {false, FilterReason::AgreementFailure};
  return {true, std::nullopt};
}

bool consanguineous(NodeRef a, NodeRef b, std::span<const Intermediate> intermediates) {
  if (a == b) return true;
  auto is_parent = [&](NodeRef child, NodeRef maybe_parent) {
    if (child.is_premise()) return false;
    const auto& parents = intermediates[child.index].parents;
    return parents.first == maybe_parent || parents.second == maybe_parent;
  };
  return is_parent(a, b) || is_parent(b, a);
}

std::size_t ProofTree::internal_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const ProofNode& n) { return n.children.has_value(); }));
}

std::vector<std::size_t> ProofTree::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].children) out.push_back(i);
  }
  return out;
}

std::string ProofTree::canonical_form() const {
  std::function<std::string(std::size_t)> form = [&](std::size_t i) -> std::string {
    const auto& n = nodes.at(i);
    const std::string text = "'" + normalize_text(n.statement.text) + "'";
    if (!n.children) return text;
    std::string a = form(n.children->first), b = form(n.children->second);
    if (b < a) std::swap(a, b);
    return "(" + a + "," + b + ")>" + text;
  };
  return nodes.empty() ? std::string() : form(root);
}

ProofTree proof_tree_from_gold(const ProofInstance& instance) {
  if (!instance.gold_tree || instance.gold_tree->steps.empty())
    throw Error(ErrorKind::NoGoldTree, "instance '" + instance.id + "' has no gold tree");
  const auto& gold = *instance.gold_tree;
  std::unordered_map<std::string, const GoldStep*> by_conclusion;
  for (const auto& s : gold.steps) by_conclusion[s.conclusion.id] = &s;

  ProofTree tree;
  std::unordered_map<std::string, std::size_t> placed;
  std::function<std::size_t(const std::string&)> build = [&](const std::string& id) -> std::size_t {
    if (auto it = placed.find(id); it != placed.end()) return it->second;
    ProofNode node;
    if (auto it = by_conclusion.find(id); it != by_conclusion.end()) {
      node.statement = it->second->conclusion;
      const std::size_t l = build(it->second->left_id);
      const std::size_t r = build(it->second->right_id);
      node.children = std::make_pair(l, r);
    } else if (auto p = instance.premise_index(id)) {
      node.statement = instance.premises[*p];
      node.source = NodeRef::premise(*p);
    } else {
      throw Error(ErrorKind::DanglingReference, "gold tree cites unknown id '" + id + "'");
    }
    tree.nodes.push_back(std::move(node));
    placed[id] = tree.nodes.size() - 1;
    return tree.nodes.size() - 1;
  };
  tree.root = build(gold.root_id.empty() ? gold.steps.back().conclusion.id : gold.root_id);
  return tree;
}

ProofTree extract_proof(std::span<const Statement> premises, std::span<const Intermediate> intermediates,
                        std::size_t proving_node) {
  if (proving_node >= intermediates.size())
    throw Error(ErrorKind::NodeNotFound, "intermediate " + std::to_string(proving_node) + " does not exist");
  ProofTree tree;
  std::map<NodeRef, std::size_t> placed;
  std::function<std::size_t(NodeRef)> build = [&](NodeRef ref) -> std::size_t {
    if (auto it = placed.find(ref); it != placed.end()) return it->second;
    ProofNode node;
    node.source = ref;
    if (ref.is_premise()) {
      if (ref.index >= premises.size()) throw Error(ErrorKind::NodeNotFound, "premise " + to_string(ref));
      node.statement = premises[ref.index];
    } else {
      if (ref.index >= intermediates.size()) throw Error(ErrorKind::NodeNotFound, "intermediate " + to_string(ref));
      const auto& inter = intermediates[ref.index];
      node.statement = inter.statement;
      const std::size_t l = build(inter.parents.first);
      const std::size_t r = build(inter.parents.second);
      node.children = std::make_pair(l, r);
    }
    tree.nodes.push_back(std::move(node));
    placed[ref] = tree.nodes.size() - 1;
    return tree.nodes.size() - 1;
  };
  tree.root = build(NodeRef::intermediate(proving_node));
  return tree;
}

namespace {

// Holds the mutable state of one search run.
class SearchRun {
 public:
  SearchRun(const ProofInstance& instance, const Heuristic& heuristic, const StepModel& step_model,
            const EntailmentScorer& entailment, const SearchConfig& config, const Encoder* encoder)
      : instance_(instance),
        heuristic_(heuristic),
        step_model_(step_model),
        entailment_(entailment),
        config_(config),
        encoder_(config.validators.agreement ? encoder : nullptr),
        result_(std::make_shared<SearchResult>()) {}

  SearchResult run() {
    seed_fringe();
    std::size_t counted = 0;
    std::size_t pops = 0;
    while (true) {
      if (counted >= config_.max_steps) {
        result_->termination = Termination::MaxSteps;
        break;
      }
      auto step = pop_live();
      if (!step) {
        result_->termination = Termination::FringeExhausted;
        break;
      }
      const bool any_kept = expand(*step, pops++);
      if (any_kept) {
        ++counted;
      }
      if (result_->proved) {
        result_->termination = Termination::Proved;
        break;
      }
    }
    if (result_->proved) {
      result_->proof = extract_proof(instance_.premises, result_->intermediates, *result_->proving_node);
      TraceEvent ev;
      ev.type = TraceEvent::Type::Proved;
      ev.nodes = {NodeRef::intermediate(*result_->proving_node)};
      ev.value = proving_score_;
      ev.termination = Termination::Proved;
      result_->trace.push_back(std::move(ev));
    } else {
      TraceEvent ev;
      ev.type = TraceEvent::Type::Terminated;
      ev.termination = result_->termination;
      ev.value = static_cast<double>(counted);
      result_->trace.push_back(std::move(ev));
    }
    return std::move(*result_);
  }

 private:
  [[noreturn]] void fail(ErrorKind kind, const std::string& what) {
    throw SearchError(kind, what, std::make_shared<const SearchResult>(*result_));
  }

  const std::string& text(NodeRef ref) const {
    return ref.is_premise() ? instance_.premises[ref.index].text : result_->intermediates[ref.index].statement.text;
  }

  const Vector& embedding(NodeRef ref) {
    if (ref.is_premise()) {
      if (premise_embeddings_.empty()) {
        std::vector<std::string> texts;
        for (const auto& p : instance_.premises) texts.push_back(p.text);
        try {
          premise_embeddings_ = encoder_->encode_batch(texts);
        } catch (const Error& e) {
          fail(ErrorKind::EncodingFailure, std::string("premise pool: ") + e.what());
        }
      }
      return premise_embeddings_[ref.index];
    }
    return *result_->intermediates[ref.index].embedding;
  }

  void enqueue(const std::vector<std::pair<NodeRef, NodeRef>>& pairs) {
    if (pairs.empty()) return;
    std::vector<PairText> texts;
    texts.reserve(pairs.size());
    for (const auto& [a, b] : pairs) texts.push_back({text(a), text(b)});
    std::vector<double> scores;
    try {
      scores = heuristic_.score_pairs(texts, instance_.goal.text);
    } catch (const Error& e) {
      fail(ErrorKind::EncodingFailure, heuristic_.name() + ": " + e.what());
    }
    if (scores.size() != pairs.size()) fail(ErrorKind::EncodingFailure, heuristic_.name() + " returned a short score list");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!std::isfinite(scores[i])) fail(ErrorKind::EncodingFailure, heuristic_.name() + " produced a non-finite score");
      const auto canon = canonical_pair(pairs[i].first, pairs[i].second);
      if (!enqueued_.insert(canon).second) continue;
      CandidateStep step{canon.first, canon.second, scores[i], next_seq_++};
      fringe_.push(step);
      TraceEvent ev;
      ev.type = TraceEvent::Type::Enqueued;
      ev.step = step;
      result_->trace.push_back(std::move(ev));
    }
  }

  void seed_fringe() {
    std::vector<std::pair<NodeRef, NodeRef>> pairs;
    const std::size_t n = instance_.premises.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(NodeRef::premise(i), NodeRef::premise(j));
    enqueue(pairs);
  }

  bool is_pruned(NodeRef ref) const { return !ref.is_premise() && pruned_[ref.index]; }

  std::optional<CandidateStep> pop_live() {
    while (!fringe_.empty()) {
      CandidateStep s = fringe_.top();
      fringe_.pop();
      if (is_pruned(s.left) || is_pruned(s.right)) continue;
      return s;
    }
    return std::nullopt;
  }

  // Intermediate ancestors of a node, itself included when it is an intermediate.
  void collect_ancestors(NodeRef ref, std::set<std::size_t>& out) const {
    if (ref.is_premise() || !out.insert(ref.index).second) return;
    const auto& parents = result_->intermediates[ref.index].parents;
    collect_ancestors(parents.first, out);
    collect_ancestors(parents.second, out);
  }

  bool expand(const CandidateStep& step, std::size_t pop_index) {
    {
      TraceEvent ev;
      ev.type = TraceEvent::Type::Popped;
      ev.step = step;
      ev.pop_index = pop_index;
      result_->trace.push_back(std::move(ev));
    }
    StepRecord record{step, pop_index, {}};
    // Copies: kept generations grow the intermediates vector.
    const std::string left = text(step.left);
    const std::string right = text(step.right);

    std::vector<std::string> generations;
    try {
      generations = step_model_.generate(left, right, config_.k_samples, mix_seed(config_.seed, pop_index));
    } catch (const Error& e) {
      fail(ErrorKind::StepModelFailure, e.what());
    }
    if (generations.size() > config_.k_samples) generations.resize(config_.k_samples);
    for (const auto& g : generations) {
      if (normalize_text(g).empty()) fail(ErrorKind::StepModelFailure, "step model returned an empty generation");
    }

    std::optional<Vector> pair_sum;
    std::vector<Vector> gen_embeddings;
    std::vector<double> ancestor_agreements;
    std::set<std::size_t> ancestors;
    collect_ancestors(step.left, ancestors);
    collect_ancestors(step.right, ancestors);
    if (encoder_ && !generations.empty()) {
      pair_sum = vec_sum(embedding(step.left), embedding(step.right));
      try {
        gen_embeddings = encoder_->encode_batch(generations);
      } catch (const Error& e) {
        fail(ErrorKind::EncodingFailure, std::string("generations: ") + e.what());
      }
      for (std::size_t a : ancestors) ancestor_agreements.push_back(result_->intermediates[a].agreement);
    }

    bool any_kept = false;
    for (std::size_t g = 0; g < generations.size() && !result_->proved; ++g) {
      GenerationOutcome outcome;
      outcome.text = generations[g];
      std::optional<AgreementResult> agreement;
      if (pair_sum) {
        try {
          agreement = deduction_agreement(*pair_sum, gen_embeddings[g], ancestor_agreements, config_);
        } catch (const Error& e) {
          fail(ErrorKind::EncodingFailure, std::string("deduction agreement: ") + e.what());
        }
        outcome.agreement = agreement->agreement;
      }
      const Verdict verdict = validate_generation(left, right, generations[g], kept_texts_, agreement, config_.validators);
      if (!verdict.keep) {
        outcome.reason = verdict.reason;
        record_generation(record, outcome);
        if (verdict.reason == FilterReason::AgreementFailure) prune(ancestors);
        continue;
      }

      const std::size_t index = result_->intermediates.size();
      Intermediate inter;
      inter.statement = {"gen" + std::to_string(index), generations[g], Origin::Intermediate};
      inter.parents = {step.left, step.right};
      if (pair_sum) {
        inter.embedding = gen_embeddings[g];
        inter.agreement = agreement->agreement;
        inter.branch_agreement_mean = agreement->branch_mean;
      }
      result_->intermediates.push_back(std::move(inter));
      pruned_.push_back(false);
      kept_texts_.insert(normalize_text(generations[g]));
      any_kept = true;
      outcome.kept = true;
      outcome.intermediate = index;

      double entailed = 0.0;
      try {
        entailed = entailment_.score(generations[g], instance_.goal.text);
      } catch (const Error& e) {
        fail(ErrorKind::EntailmentFailure, e.what());
      }
      outcome.entailment = entailed;
      record_generation(record, outcome);
      if (entailed >= config_.t_g) {
        result_->proved = true;
        result_->proving_node = index;
        proving_score_ = entailed;
        break;
      }
      spawn(NodeRef::intermediate(index));
    }

    if (any_kept) {
      result_->steps_taken.push_back(std::move(record));
    } else {
      TraceEvent ev;
      ev.type = TraceEvent::Type::NotCounted;
      ev.pop_index = pop_index;
      result_->trace.push_back(std::move(ev));
      result_->uncounted_pops.push_back(std::move(record));
    }
    return any_kept;
  }

  void record_generation(StepRecord& record, const GenerationOutcome& outcome) {
    record.generations.push_back(outcome);
    TraceEvent ev;
    ev.type = TraceEvent::Type::Generation;
    ev.generation = outcome;
    result_->trace.push_back(std::move(ev));
  }

  void prune(const std::set<std::size_t>& nodes) {
    TraceEvent ev;
    ev.type = TraceEvent::Type::Pruned;
    for (std::size_t n : nodes) {
      if (!pruned_[n]) {
        pruned_[n] = true;
        ev.nodes.push_back(NodeRef::intermediate(n));
      }
    }
    if (!ev.nodes.empty()) result_->trace.push_back(std::move(ev));
  }

  void spawn(NodeRef fresh) {
    const auto& inters = result_->intermediates;
    std::vector<std::pair<NodeRef, NodeRef>> pairs;
    auto consider = [&](NodeRef other) {
      if (config_.validators.consanguinity ? consanguineous(fresh, other, inters) : fresh == other) return;
      pairs.emplace_back(other, fresh);
    };
    for (std::size_t p = 0; p < instance_.premises.size(); ++p) consider(NodeRef::premise(p));
    for (std::size_t m = 0; m < fresh.index; ++m) {
      if (!pruned_[m]) consider(NodeRef::intermediate(m));
    }
    enqueue(pairs);
  }

  const ProofInstance& instance_;
  const Heuristic& heuristic_;
  const StepModel& step_model_;
  const EntailmentScorer& entailment_;
  const SearchConfig& config_;
  const Encoder* encoder_;
  std::shared_ptr<SearchResult> result_;

  std::priority_queue<CandidateStep, std::vector<CandidateStep>, FringeOrder> fringe_;
  std::set<std::pair<NodeRef, NodeRef>> enqueued_;
  std::uint64_t next_seq_ = 0;
  std::vector<Vector> premise_embeddings_;
  std::vector<bool> pruned_;
  std::unordered_set<std::string> kept_texts_;
  double proving_score_ = 0.0;
};

}  // namespace

SearchResult run_search(const ProofInstance& instance, const Heuristic& heuristic, const StepModel& step_model,
                        const EntailmentScorer& entailment, const SearchConfig& config,
                        const Encoder* agreement_encoder) {
  config.check();
  validate(instance);
  const Encoder* encoder = agreement_encoder ? agreement_encoder : heuristic.encoder();
  return SearchRun(instance, heuristic, step_model, entailment, config, encoder).run();
}

namespace {

std::string_view event_name(TraceEvent::Type t) {
  switch (t) {
    case TraceEvent::Type::Enqueued: return "enqueued";
    case TraceEvent::Type::Popped: return "popped";
    case TraceEvent::Type::Generation: return "generation";
    case TraceEvent::Type::NotCounted: return "not_counted";
    case TraceEvent::Type::Pruned: return "pruned";
    case TraceEvent::Type::Proved: return "proved";
    case TraceEvent::Type::Terminated: return "terminated";
  }
  return "?";
}

}  // namespace

void write_trace(std::ostream& os, const SearchResult& result, std::span<const Statement> premises) {
  auto node_text = [&](NodeRef ref) -> std::string {
    if (ref.is_premise()) return ref.index < premises.size() ? premises[ref.index].text : std::string();
    return ref.index < result.intermediates.size() ? result.intermediates[ref.index].statement.text : std::string();
  };
  for (const auto& ev : result.trace) {
    json j;
    j["event"] = event_name(ev.type);
    if (ev.pop_index) j["pop"] = *ev.pop_index;
    if (ev.step) {
      j["left"] = to_string(ev.step->left);
      j["right"] = to_string(ev.step->right);
      j["score"] = ev.step->score;
      j["seq"] = ev.step->seq;
      if (ev.type == TraceEvent::Type::Popped) {
        j["left_text"] = node_text(ev.step->left);
        j["right_text"] = node_text(ev.step->right);
      }
    }
    if (ev.generation) {
      const auto& g = *ev.generation;
      j["text"] = g.text;
      j["status"] = g.kept ? "kept" : "filtered";
      if (g.reason) j["reason"] = to_string(*g.reason);
      if (g.intermediate) j["node"] = to_string(NodeRef::intermediate(*g.intermediate));
      if (g.agreement) j["agreement"] = *g.agreement;
      if (g.entailment) j["entailment"] = *g.entailment;
    }
    if (!ev.nodes.empty()) {
      j["nodes"] = json::array();
      for (auto n : ev.nodes) j["nodes"].push_back(to_string(n));
    }
    if (ev.type == TraceEvent::Type::Proved && ev.value) j["entailment"] = *ev.value;
    if (ev.type == TraceEvent::Type::Terminated && ev.value) j["steps"] = static_cast<std::size_t>(*ev.value);
    if (ev.termination) j["termination"] = to_string(*ev.termination);
    os << j.dump() << '\n';
  }
}

}  // namespace dap
