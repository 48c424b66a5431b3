#include "dap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_set>

#include "dap/bm25.hpp"
#include "dap/evaluation.hpp"
#include "dap/heuristics.hpp"

namespace dap::synthetic {

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::set<std::size_t> random_subset(std::mt19937_64& rng, std::size_t lexicon, std::size_t size,
                                    const std::set<std::size_t>& exclude = {}) {
  std::vector<std::size_t> pool;
  for (std::size_t c = 0; c < lexicon; ++c) {
    if (!exclude.contains(c)) pool.push_back(c);
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(size, pool.size()));
  return {pool.begin(), pool.end()};
}

// 1_x + 1_y == c * 1_u for some c > 0.
bool sums_to_multiple(const std::set<std::size_t>& x, const std::set<std::size_t>& y, const std::set<std::size_t>& u) {
  std::map<std::size_t, int> counts;
  for (auto c : x) ++counts[c];
  for (auto c : y) ++counts[c];
  if (counts.size() != u.size()) return false;
  const int first = counts.begin()->second;
  for (const auto& [c, n] : counts) {
    if (!u.contains(c) || n != first) return false;
  }
  return true;
}

std::uint64_t text_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string count_detail(std::size_t bad, std::size_t total, const std::string& what) {
  return std::to_string(bad) + " of " + std::to_string(total) + " " + what;
}

}  // namespace

std::vector<std::string> concept_lexicon(std::size_t size) {
  std::vector<std::string> lex;
  for (std::size_t i = 0; i < size; ++i) lex.push_back("c" + std::to_string(i));
  return lex;
}

std::string concept_text(const std::set<std::size_t>& concepts) {
  std::string out;
  for (auto c : concepts) {
    if (!out.empty()) out += ' ';
    out += "c" + std::to_string(c);
  }
  return out;
}

std::shared_ptr<SyntheticAdditiveEncoder> concept_encoder(std::size_t lexicon_size) {
  return std::make_shared<SyntheticAdditiveEncoder>(concept_lexicon(lexicon_size));
}

ProofInstance additive_instance(std::mt19937_64& rng, std::size_t lexicon_size, std::size_t premise_count,
                                const std::string& id) {
  if (lexicon_size < 4 || premise_count < 2)
    throw Error(ErrorKind::InvalidArgument, "additive fixtures need >= 4 concepts and >= 2 premises");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<std::set<std::size_t>> sets;
    sets.push_back(random_subset(rng, lexicon_size, uniform(rng, 1, 3)));
    sets.push_back(random_subset(rng, lexicon_size, uniform(rng, 1, 3), sets[0]));
    std::set<std::size_t> uni = sets[0];
    uni.insert(sets[1].begin(), sets[1].end());
    int tries = 0;
    while (sets.size() < premise_count && tries++ < 10000) {
      auto s = random_subset(rng, lexicon_size, uniform(rng, 1, 3));
      if (s != uni && std::find(sets.begin(), sets.end(), s) == sets.end()) sets.push_back(std::move(s));
    }
    if (sets.size() < premise_count) continue;

    std::vector<std::size_t> order(premise_count);
    for (std::size_t i = 0; i < premise_count; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);  // order[slot] = set index

    bool unique = true;
    for (std::size_t i = 0; i < premise_count && unique; ++i) {
      for (std::size_t j = i + 1; j < premise_count && unique; ++j) {
        if (i == 0 && j == 1) continue;
        if (sums_to_multiple(sets[i], sets[j], uni)) unique = false;
      }
    }
    if (!unique) continue;

    ProofInstance inst;
    inst.id = id;
    std::string gold_ids[2];
    for (std::size_t slot = 0; slot < premise_count; ++slot) {
      const std::string pid = "p" + std::to_string(slot);
      inst.premises.push_back({pid, concept_text(sets[order[slot]]), Origin::GeneralFact});
      if (order[slot] < 2) gold_ids[order[slot]] = pid;
    }
    const std::string goal_text = concept_text(uni);
    inst.goal = {"goal", goal_text, Origin::Goal};
    inst.gold_tree = GoldTree{{{gold_ids[0], gold_ids[1], {"d0", goal_text, Origin::Intermediate}}}, "d0"};
    return inst;
  }
  throw Error(ErrorKind::InvalidArgument, "could not build an additive fixture with a unique gold pair");
}

ProofInstance gold_tree_instance(std::mt19937_64& rng, std::size_t internal_nodes, std::size_t distractors,
                                 const std::string& id) {
  if (internal_nodes == 0) throw Error(ErrorKind::InvalidArgument, "gold trees need at least one step");
  ProofInstance inst;
  inst.id = id;
  std::vector<Statement> premises;
  std::vector<GoldStep> steps;
  std::size_t inter = 0;
  auto build = [&](auto& self, std::size_t m) -> std::string {
    if (m == 0) {
      const std::string pid = "p" + std::to_string(premises.size());
      premises.push_back({pid, "leaf fact number " + std::to_string(premises.size()) + " of " + id, Origin::GeneralFact});
      return pid;
    }
    const std::size_t left = uniform(rng, 0, m - 1);
    const std::string l = self(self, left);
    const std::string r = self(self, m - 1 - left);
    const std::string iid = "i" + std::to_string(inter);
    steps.push_back({l, r, {iid, "derived claim number " + std::to_string(inter) + " of " + id, Origin::Intermediate}});
    ++inter;
    return iid;
  };
  const std::string root = build(build, internal_nodes);
  for (std::size_t d = 0; d < distractors; ++d) {
    premises.push_back({"p" + std::to_string(premises.size()), "distractor fact number " + std::to_string(d) + " of " + id,
                        Origin::GeneralFact});
  }
  std::shuffle(premises.begin(), premises.end(), rng);
  inst.premises = std::move(premises);
  inst.goal = {"goal", steps.back().conclusion.text, Origin::Goal};
  inst.gold_tree = GoldTree{std::move(steps), root};
  return inst;
}

ProofInstance random_pool_instance(std::mt19937_64& rng, std::size_t premise_count, const std::string& id) {
  ProofInstance inst;
  inst.id = id;
  for (std::size_t i = 0; i < premise_count; ++i)
    inst.premises.push_back({"p" + std::to_string(i), "statement " + std::to_string(i), Origin::GeneralFact});
  const std::size_t a = uniform(rng, 0, premise_count - 1);
  std::size_t b = uniform(rng, 0, premise_count - 2);
  if (b >= a) ++b;
  inst.goal = {"goal", "conclusion", Origin::Goal};
  inst.gold_tree = GoldTree{{{inst.premises[a].id, inst.premises[b].id, {"d0", "conclusion", Origin::Intermediate}}}, "d0"};
  return inst;
}

std::vector<std::string> RandomStepModel::generate(std::string_view left, std::string_view right, std::size_t k,
                                                   std::uint64_t seed) const {
  std::mt19937_64 rng(seed ^ (text_hash(left) * 31 + text_hash(right)));
  std::set<std::size_t> base;
  for (const auto& text : {left, right}) {
    for (const auto& tok : tokenize(text)) {
      if (tok.size() > 1 && tok[0] == 'c') base.insert(std::stoul(tok.substr(1)));
    }
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::string> out;
  for (std::size_t s = 0; s < k; ++s) {
    const double r = coin(rng);
    if (r < repeat_input_) {
      out.emplace_back(coin(rng) < 0.5 ? left : right);
    } else if (r < repeat_input_ + repeat_sample_ && !out.empty()) {
      out.push_back(out[uniform(rng, 0, out.size() - 1)]);
    } else {
      std::set<std::size_t> g = base;
      if (g.size() > 1 && coin(rng) < 0.5) g.erase(std::next(g.begin(), static_cast<std::ptrdiff_t>(uniform(rng, 0, g.size() - 1))));
      if (g.empty() || coin(rng) < 0.5) g.insert(uniform(rng, 0, lexicon_size_ - 1));
      out.push_back(concept_text(g));
    }
  }
  return out;
}

AuditResult audit_search(const ProofInstance& instance, const SearchResult& result) {
  AuditResult audit;
  for (const auto& ev : result.trace) {
    if (ev.type == TraceEvent::Type::Enqueued && ev.step && consanguineous(ev.step->left, ev.step->right, result.intermediates))
      ++audit.consanguineous_enqueues;
  }
  auto text = [&](NodeRef r) {
    return normalize_text(r.is_premise() ? instance.premises[r.index].text : result.intermediates[r.index].statement.text);
  };
  std::vector<const StepRecord*> pops;
  for (const auto& s : result.steps_taken) pops.push_back(&s);
  for (const auto& s : result.uncounted_pops) pops.push_back(&s);
  std::sort(pops.begin(), pops.end(), [](auto* a, auto* b) { return a->pop_index < b->pop_index; });
  std::unordered_set<std::string> kept;
  for (const auto* pop : pops) {
    const std::string l = text(pop->step.left), r = text(pop->step.right);
    for (const auto& g : pop->generations) {
      if (!g.kept) continue;
      const std::string n = normalize_text(g.text);
      if (n == l || n == r || kept.contains(n)) ++audit.duplicate_keeps;
      kept.insert(n);
    }
  }
  return audit;
}

CheckResult check_additive_mrr(std::uint64_t seed, std::size_t instances) {
  CheckResult res{"synthetic additivity MRR", false, ""};
  std::mt19937_64 rng(seed);
  std::vector<ProofInstance> data;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t lex = uniform(rng, 8, 16);
    data.push_back(additive_instance(rng, lex, uniform(rng, 4, 12), "add" + std::to_string(i)));
  }
  const AdditiveHeuristic heuristic(concept_encoder(16));
  const MrrReport report = mrr(data, heuristic, Conditioning::Deduction);
  res.pass = report.mrr == 1.0 && report.examples.size() == instances;
  std::ostringstream os;
  os.precision(17);
  os << "MRR " << report.mrr << " over " << report.examples.size() << " instances";
  res.detail = os.str();
  return res;
}

CheckResult check_oracle_replay(std::uint64_t seed, std::size_t trees) {
  CheckResult res{"oracle search replay", false, ""};
  std::mt19937_64 rng(seed);
  std::size_t proved = 0, step_match = 0, iso = 0;
  for (std::size_t t = 0; t < trees; ++t) {
    const std::size_t internal = uniform(rng, 2, 6);
    const ProofInstance inst = gold_tree_instance(rng, internal, uniform(rng, 0, 4), "tree" + std::to_string(t));
    const auto heuristic = OracleHeuristic::from_gold(inst);
    const auto steps = OracleStepModel::from_gold(inst);
    const OracleEntailment entail;
    SearchConfig cfg;
    cfg.seed = seed + t;
    const SearchResult r = run_search(inst, *heuristic, *steps, entail, cfg);
    if (!r.proved || !r.proof) continue;
    ++proved;
    if (r.steps_taken.size() == internal) ++step_match;
    if (r.proof->canonical_form() == proof_tree_from_gold(inst).canonical_form()) ++iso;
  }
  res.pass = proved == trees && step_match == trees && iso == trees;
  res.detail = std::to_string(proved) + "/" + std::to_string(trees) + " proved, " + std::to_string(step_match) +
               " step counts match, " + std::to_string(iso) + " isomorphic";
  return res;
}

CheckResult check_validator_audit(std::uint64_t seed, std::size_t searches) {
  CheckResult res{"validator trace audit", false, ""};
  std::mt19937_64 rng(seed);
  const std::size_t lex = 8;
  const AdditiveHeuristic heuristic(concept_encoder(lex));
  const RandomStepModel step_model(lex, 0.2, 0.2);
  const OracleEntailment entail;
  std::size_t consanguineous_enqueues = 0, duplicates = 0, enqueues = 0, filtered = 0;
  for (std::size_t s = 0; s < searches; ++s) {
    const ProofInstance inst = additive_instance(rng, lex, uniform(rng, 4, 8), "audit" + std::to_string(s));
    SearchConfig cfg;
    cfg.seed = seed ^ (s * 0x9e3779b97f4a7c15ULL);
    const SearchResult r = run_search(inst, heuristic, step_model, entail, cfg);
    const AuditResult a = audit_search(inst, r);
    consanguineous_enqueues += a.consanguineous_enqueues;
    duplicates += a.duplicate_keeps;
    for (const auto& ev : r.trace) {
      if (ev.type == TraceEvent::Type::Enqueued) ++enqueues;
      if (ev.type == TraceEvent::Type::Generation && ev.generation && ev.generation->reason &&
          *ev.generation->reason != FilterReason::AgreementFailure)
        ++filtered;
    }
  }
  res.pass = consanguineous_enqueues == 0 && duplicates == 0 && filtered > 0;
  res.detail = count_detail(consanguineous_enqueues, enqueues, "enqueues consanguineous") + ", " +
               std::to_string(duplicates) + " duplicate keeps, " + std::to_string(filtered) +
               " duplicates filtered over " + std::to_string(searches) + " searches";
  return res;
}

CheckResult check_pair_partition(std::uint64_t seed, std::size_t instances) {
  CheckResult res{"pair partition", false, ""};
  std::mt19937_64 rng(seed);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = uniform(rng, 3, 30);
    const ProofInstance inst = random_pool_instance(rng, n, "pool" + std::to_string(i));
    const auto& step = inst.gold_tree->steps.front();
    const std::size_t a = *inst.premise_index(step.left_id), b = *inst.premise_index(step.right_id);
    const PairSets sets = build_pair_sets(n, a, b);
    std::set<IndexPair> seen{sets.gold};
    bool ok = sets.gold == IndexPair{std::min(a, b), std::max(a, b)};
    for (const auto& p : sets.partial) {
      ok &= seen.insert(p).second && ((p.first == a || p.first == b) != (p.second == a || p.second == b));
    }
    for (const auto& p : sets.random) {
      ok &= seen.insert(p).second && p.first != a && p.first != b && p.second != a && p.second != b;
    }
    ok &= seen.size() == n * (n - 1) / 2;
    for (const auto& p : seen) ok &= p.first < p.second && p.second < n;
    if (!ok) ++bad;
  }
  res.pass = bad == 0;
  res.detail = count_detail(bad, instances, "instances violate the partition");
  return res;
}

std::vector<CheckResult> run_property_suite(std::uint64_t seed, double scale) {
  auto count = [scale](std::size_t n) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(n * scale))); };
  return {check_additive_mrr(seed, count(200)), check_oracle_replay(seed + 1, count(50)),
          check_validator_audit(seed + 2, count(1000)), check_pair_partition(seed + 3, count(1000))};
}

}  // namespace dap::synthetic
