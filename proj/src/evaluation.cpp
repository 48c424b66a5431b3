#include "dap/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include <json.hpp>

namespace dap {

using nlohmann::ordered_json;

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string compact_label(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

IndexPair ordered(std::size_t a, std::size_t b) { return a < b ? IndexPair{a, b} : IndexPair{b, a}; }

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Fixed-precision number for CSV output.
std::string fmt(double x, int digits = 6) {
  if (std::isnan(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

ordered_json json_number(double x) { return std::isnan(x) ? ordered_json(nullptr) : ordered_json(x); }

}  // namespace

std::string_view to_string(Conditioning c) { return c == Conditioning::Deduction ? "deduction" : "goal"; }

Conditioning parse_conditioning(std::string_view text) {
  const std::string k = compact_label(text);
  if (k == "deduction") return Conditioning::Deduction;
  if (k == "goal") return Conditioning::Goal;
  throw Error(ErrorKind::InvalidArgument, "unknown conditioning '" + std::string(text) + "'");
}

PairSets build_pair_sets(std::size_t pool_size, std::size_t a, std::size_t b) {
  if (pool_size < 3)
    throw Error(ErrorKind::TooFewPremises, "pair sets need at least 3 premises, got " + std::to_string(pool_size));
  if (a == b || a >= pool_size || b >= pool_size)
    throw Error(ErrorKind::InvalidArgument, "gold pair must be two distinct pool members");
  PairSets sets;
  sets.gold = ordered(a, b);
  for (std::size_t i = 0; i < pool_size; ++i) {
    for (std::size_t j = i + 1; j < pool_size; ++j) {
      const IndexPair p{i, j};
      if (p == sets.gold) continue;
      const int members = (i == a || i == b) + (j == a || j == b);
      (members == 1 ? sets.partial : sets.random).push_back(p);
    }
  }
  return sets;
}

std::vector<StepExample> step_examples(const ProofInstance& instance) {
  if (!instance.gold_tree) throw Error(ErrorKind::NoGoldTree, "instance '" + instance.id + "' has no gold tree");
  std::vector<std::string> pool;
  std::unordered_map<std::string, std::size_t> where;
  for (const auto& p : instance.premises) {
    where.emplace(p.id, pool.size());
    pool.push_back(p.text);
  }
  std::vector<StepExample> out;
  for (std::size_t s = 0; s < instance.gold_tree->steps.size(); ++s) {
    const auto& step = instance.gold_tree->steps[s];
    auto li = where.find(step.left_id);
    auto ri = where.find(step.right_id);
    if (li == where.end() || ri == where.end())
      throw Error(ErrorKind::DanglingReference, "instance '" + instance.id + "' step " + std::to_string(s) +
                                                    " cites an unknown id");
    out.push_back({instance.id, s, pool, ordered(li->second, ri->second), step.conclusion.text, instance.goal.text});
    where.emplace(step.conclusion.id, pool.size());
    pool.push_back(step.conclusion.text);
  }
  return out;
}

std::size_t pessimistic_rank(std::span<const double> scores, std::size_t gold_index) {
  if (gold_index >= scores.size()) throw Error(ErrorKind::InvalidArgument, "gold index out of range");
  const double g = scores[gold_index];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != gold_index && scores[i] >= g) ++rank;
  }
  return rank;
}

std::vector<IndexPair> candidate_pairs(const PairSets& sets, std::size_t pool_size, const MrrOptions& options,
                                       std::uint64_t example_seed) {
  std::vector<IndexPair> out;
  out.push_back(sets.gold);
  out.insert(out.end(), sets.partial.begin(), sets.partial.end());
  if (pool_size <= options.exhaustive_limit || sets.random.size() <= options.sample_size) {
    out.insert(out.end(), sets.random.begin(), sets.random.end());
  } else {
    std::mt19937_64 rng(example_seed);
    std::vector<IndexPair> sample;
    std::sample(sets.random.begin(), sets.random.end(), std::back_inserter(sample), options.sample_size, rng);
    out.insert(out.end(), sample.begin(), sample.end());
  }
  return out;
}

double mean_reciprocal_rank(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw Error(ErrorKind::EmptyDataset, "no ranks to average");
  double total = 0.0;
  for (std::size_t r : ranks) {
    if (r == 0) throw Error(ErrorKind::InvalidArgument, "ranks start at 1");
    total += 1.0 / static_cast<double>(r);
  }
  return total / static_cast<double>(ranks.size());
}

MrrReport mrr(std::span<const ProofInstance> instances, const Heuristic& heuristic, Conditioning conditioning,
              const MrrOptions& options) {
  MrrReport report;
  report.conditioning = conditioning;
  report.heuristic = heuristic.name();
  std::vector<std::size_t> ranks;
  std::uint64_t counter = 0;
  for (const auto& instance : instances) {
    for (const auto& ex : step_examples(instance)) {
      const std::uint64_t example_seed = mix(options.seed ^ mix(counter++));
      if (ex.pool.size() < 3) {
        ++report.skipped_small_pools;
        continue;
      }
      const PairSets sets = build_pair_sets(ex.pool.size(), ex.gold.first, ex.gold.second);
      const auto cands = candidate_pairs(sets, ex.pool.size(), options, example_seed);
      std::vector<PairText> pairs;
      pairs.reserve(cands.size());
      for (const auto& [i, j] : cands) pairs.push_back({ex.pool[i], ex.pool[j]});
      const std::string& target = conditioning == Conditioning::Deduction ? ex.deduction : ex.goal;
      const auto scores = heuristic.score_pairs(pairs, target);
      if (scores.size() != pairs.size())
        throw Error(ErrorKind::InvalidArgument, heuristic.name() + " returned the wrong number of scores");
      for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]))
          throw Error(ErrorKind::NonFinite, heuristic.name() + " produced a non-finite score in '" + ex.instance_id + "'");
      }
      MrrExample row{ex.instance_id, ex.step, cands.size(), pessimistic_rank(scores, 0),
                     cands.size() < 1 + sets.partial.size() + sets.random.size()};
      ranks.push_back(row.rank);
      report.examples.push_back(std::move(row));
    }
  }
  if (ranks.empty()) throw Error(ErrorKind::EmptyDataset, "no rankable gold steps");
  report.mrr = mean_reciprocal_rank(ranks);
  return report;
}

std::string_view to_string(DistSetting s) {
  switch (s) {
    case DistSetting::Random: return "random";
    case DistSetting::Partial: return "partial";
    case DistSetting::Gold: return "gold";
    case DistSetting::Model: return "model";
    case DistSetting::GoldToModel: return "gold_to_model";
  }
  return "?";
}

double DistributionReport::mean(DistSetting s) const {
  auto it = values.find(s);
  if (it == values.end()) return std::numeric_limits<double>::quiet_NaN();
  return mean_of(it->second);
}

DistributionReport distribution_report(std::span<const ProofInstance> instances, const Encoder& encoder,
                                       const StepModel* step_model, const MrrOptions& options) {
  DistributionReport report;
  report.has_model = step_model != nullptr;
  for (DistSetting s : kDistSettings) {
    if (report.has_model || (s != DistSetting::Model && s != DistSetting::GoldToModel)) report.values[s];
  }
  auto encode = [&](const std::string& text) {
    try {
      return encoder.encode(text);
    } catch (const Error& e) {
      throw Error(ErrorKind::EncodingFailure, "text '" + text + "': " + e.what());
    }
  };
  std::uint64_t counter = 0;
  for (const auto& instance : instances) {
    for (const auto& ex : step_examples(instance)) {
      const std::uint64_t example_seed = mix(options.seed ^ mix(counter++));
      std::vector<Vector> pool;
      pool.reserve(ex.pool.size());
      for (const auto& t : ex.pool) pool.push_back(encode(t));
      const Vector deduction = encode(ex.deduction);
      const Vector gold_sum = vec_sum(pool[ex.gold.first], pool[ex.gold.second]);
      report.values[DistSetting::Gold].push_back(cosine(gold_sum, deduction));
      if (ex.pool.size() >= 3) {
        const PairSets sets = build_pair_sets(ex.pool.size(), ex.gold.first, ex.gold.second);
        for (const auto& [i, j] : sets.partial)
          report.values[DistSetting::Partial].push_back(cosine(vec_sum(pool[i], pool[j]), deduction));
        const auto cands = candidate_pairs(sets, ex.pool.size(), options, example_seed);
        for (std::size_t c = 1 + sets.partial.size(); c < cands.size(); ++c) {
          const auto [i, j] = cands[c];
          report.values[DistSetting::Random].push_back(cosine(vec_sum(pool[i], pool[j]), deduction));
        }
      }
      if (step_model) {
        const auto gens = step_model->generate(ex.pool[ex.gold.first], ex.pool[ex.gold.second], 1, example_seed);
        if (!gens.empty()) {
          const Vector generated = encode(gens.front());
          report.values[DistSetting::Model].push_back(cosine(gold_sum, generated));
          report.values[DistSetting::GoldToModel].push_back(cosine(deduction, generated));
        }
      }
    }
  }
  return report;
}

ExtrinsicReport extrinsic(std::span<const ProofInstance> instances, const ComponentFactory& factory,
                          const SearchConfig& config, std::size_t jobs) {
  if (instances.empty()) throw Error(ErrorKind::EmptyDataset, "no instances to search");
  config.check();
  ExtrinsicReport report;
  report.instances.resize(instances.size());
  const auto n = static_cast<std::int64_t>(instances.size());
  const int threads = jobs == 0 ? 0 : static_cast<int>(jobs);
  auto run_one = [&](std::size_t i) {
    auto& row = report.instances[i];
    row.instance_id = instances[i].id;
    try {
      const SearchComponents c = factory(instances[i]);
      if (!c.heuristic || !c.step_model || !c.entailment)
        throw Error(ErrorKind::InvalidArgument, "search components are incomplete");
      const SearchResult r =
          run_search(instances[i], *c.heuristic, *c.step_model, *c.entailment, config, c.agreement_encoder.get());
      row.termination = r.termination;
      row.steps = r.steps_taken.size();
      row.uncounted_pops = r.uncounted_pops.size();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };
  if (threads == 1) {
    for (std::int64_t i = 0; i < n; ++i) run_one(static_cast<std::size_t>(i));
  } else if (threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) run_one(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) run_one(static_cast<std::size_t>(i));
  }
  double steps = 0.0;
  for (const auto& row : report.instances) {
    if (!row.termination) {
      ++report.failed;
    } else if (*row.termination == Termination::Proved) {
      ++report.solved;
      steps += static_cast<double>(row.steps);
    }
  }
  report.solved_fraction = static_cast<double>(report.solved) / static_cast<double>(instances.size());
  report.mean_steps = report.solved ? steps / static_cast<double>(report.solved) : 0.0;
  return report;
}

std::string_view to_string(SsrcCategory c) {
  switch (c) {
    case SsrcCategory::Analogy: return "Analogy";
    case SsrcCategory::CategoricalSyllogism: return "Categorical Syllogism";
    case SsrcCategory::CausalReasoning: return "Causal Reasoning";
    case SsrcCategory::Classification: return "Classification";
    case SsrcCategory::Comparison: return "Comparison";
    case SsrcCategory::Composition: return "Composition";
    case SsrcCategory::Division: return "Division";
    case SsrcCategory::ModusPonens: return "Modus Ponens";
    case SsrcCategory::ModusTollens: return "Modus Tollens";
    case SsrcCategory::Definition: return "Definition";
    case SsrcCategory::TemporalLogic: return "Temporal Logic";
    case SsrcCategory::PropositionalLogic: return "Propositional Logic";
    case SsrcCategory::QuantificationalLogic: return "Quantificational Logic";
    case SsrcCategory::SpatialRelationship: return "Spatial Relationship";
  }
  return "?";
}

std::string_view to_string(Perturbation p) {
  switch (p) {
    case Perturbation::Negation: return "Negation";
    case Perturbation::FalsePremise: return "False Premise";
    case Perturbation::IrrelevantFact: return "Irrelevant Fact";
    case Perturbation::IncorrectQuantifier: return "Incorrect Quantifier";
  }
  return "?";
}

SsrcCategory parse_category(std::string_view label) {
  static const std::unordered_map<std::string, SsrcCategory> table = [] {
    std::unordered_map<std::string, SsrcCategory> t;
    for (std::size_t i = 0; i < kSsrcCategoryCount; ++i) {
      const auto c = static_cast<SsrcCategory>(i);
      t.emplace(compact_label(to_string(c)), c);
    }
    t.emplace("spatialreasoning", SsrcCategory::SpatialRelationship);
    t.emplace("spatial", SsrcCategory::SpatialRelationship);
    t.emplace("causal", SsrcCategory::CausalReasoning);
    t.emplace("syllogism", SsrcCategory::CategoricalSyllogism);
    t.emplace("temporalreasoning", SsrcCategory::TemporalLogic);
    return t;
  }();
  auto it = table.find(compact_label(label));
  if (it == table.end()) throw Error(ErrorKind::UnknownCategory, "unknown reasoning category '" + std::string(label) + "'");
  return it->second;
}

Perturbation parse_perturbation(std::string_view label) {
  static const std::unordered_map<std::string, Perturbation> table = {
      {"negation", Perturbation::Negation},
      {"negated", Perturbation::Negation},
      {"falsepremise", Perturbation::FalsePremise},
      {"false", Perturbation::FalsePremise},
      {"irrelevantfact", Perturbation::IrrelevantFact},
      {"irrelevant", Perturbation::IrrelevantFact},
      {"incorrectquantifier", Perturbation::IncorrectQuantifier},
      {"quantifier", Perturbation::IncorrectQuantifier},
  };
  auto it = table.find(compact_label(label));
  if (it == table.end())
    throw Error(ErrorKind::UnknownPerturbation, "unknown perturbation '" + std::string(label) + "'");
  return it->second;
}

std::vector<PairText> ssrc_candidate_pairs(const SsrcExample& example) {
  if (example.variants[0].empty() && example.variants[1].empty())
    throw Error(ErrorKind::MissingVariants, "SSRC example '" + example.id + "' has no perturbed premises");
  std::array<std::vector<std::string>, 2> slots;
  for (std::size_t s = 0; s < 2; ++s) {
    slots[s].push_back(example.premises[s]);
    slots[s].insert(slots[s].end(), example.variants[s].begin(), example.variants[s].end());
  }
  std::vector<PairText> pairs;
  for (const auto& l : slots[0]) {
    for (const auto& r : slots[1]) pairs.push_back({l, r});
  }
  return pairs;
}

SsrcReport ssrc_breakdown(std::span<const SsrcExample> examples, const Heuristic& heuristic) {
  if (examples.empty()) throw Error(ErrorKind::EmptyDataset, "no SSRC examples");
  SsrcReport report;
  report.heuristic = heuristic.name();
  std::map<std::pair<SsrcCategory, std::optional<Perturbation>>, std::vector<double>> cell_values;
  for (const auto& ex : examples) {
    const auto pairs = ssrc_candidate_pairs(ex);
    const auto scores = heuristic.score_pairs(pairs, ex.conclusion);
    if (scores.size() != pairs.size())
      throw Error(ErrorKind::InvalidArgument, heuristic.name() + " returned the wrong number of scores");
    for (double s : scores) {
      if (!std::isfinite(s))
        throw Error(ErrorKind::NonFinite, heuristic.name() + " produced a non-finite score in '" + ex.id + "'");
    }
    SsrcRow row{ex.id, ex.category, ex.perturbation, pairs.size(), pessimistic_rank(scores, 0)};
    cell_values[{ex.category, ex.perturbation}].push_back(1.0 / static_cast<double>(row.rank));
    report.rows.push_back(std::move(row));
  }
  std::map<SsrcCategory, std::vector<double>> by_cat;
  std::map<Perturbation, std::vector<double>> by_pert;
  for (const auto& [key, vals] : cell_values) {
    const double m = mean_of(vals);
    report.cells[key] = m;
    by_cat[key.first].push_back(m);
    if (key.second) by_pert[*key.second].push_back(m);
  }
  for (const auto& [c, vals] : by_cat) report.per_category[c] = mean_of(vals);
  for (const auto& [p, vals] : by_pert) report.per_perturbation[p] = mean_of(vals);
  report.overall = ssrc_overall_from_categories(report);
  return report;
}

double ssrc_overall_from_categories(const SsrcReport& report) {
  if (report.per_category.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (const auto& [c, v] : report.per_category) total += v;
  return total / static_cast<double>(report.per_category.size());
}

void write_mrr_csv(std::ostream& os, const MrrReport& report) {
  os << "instance,step,candidates,rank,reciprocal,sampled\n";
  for (const auto& e : report.examples) {
    os << e.instance_id << ',' << e.step << ',' << e.candidates << ',' << e.rank << ','
       << fmt(1.0 / static_cast<double>(e.rank)) << ',' << (e.sampled ? 1 : 0) << '\n';
  }
}

void write_mrr_json(std::ostream& os, const MrrReport& report, const MrrOptions& options) {
  ordered_json j;
  j["protocol"] = "mrr";
  j["heuristic"] = report.heuristic;
  j["conditioning"] = std::string(to_string(report.conditioning));
  j["mrr"] = report.mrr;
  j["examples"] = report.examples.size();
  j["skipped_small_pools"] = report.skipped_small_pools;
  j["exhaustive_limit"] = options.exhaustive_limit;
  j["sample_size"] = options.sample_size;
  j["seed"] = options.seed;
  j["ranks"] = ordered_json::array();
  for (const auto& e : report.examples) j["ranks"].push_back(e.rank);
  os << j.dump(2) << '\n';
}

void write_distribution_csv(std::ostream& os, const DistributionReport& report) {
  os << "setting,count,mean\n";
  for (const auto& [s, vals] : report.values) os << to_string(s) << ',' << vals.size() << ',' << fmt(mean_of(vals)) << '\n';
}

void write_distribution_json(std::ostream& os, const DistributionReport& report) {
  ordered_json j;
  j["protocol"] = "distribution";
  j["has_model"] = report.has_model;
  j["settings"] = ordered_json::object();
  for (const auto& [s, vals] : report.values) {
    j["settings"][std::string(to_string(s))] = {{"count", vals.size()}, {"mean", json_number(mean_of(vals))}};
  }
  os << j.dump(2) << '\n';
}

void write_histogram_json(std::ostream& os, const DistributionReport& report) {
  ordered_json j = ordered_json::object();
  for (const auto& [s, vals] : report.values) j[std::string(to_string(s))] = vals;
  os << j.dump() << '\n';
}

void write_extrinsic_csv(std::ostream& os, const ExtrinsicReport& report) {
  os << "instance,termination,steps,uncounted_pops,error\n";
  for (const auto& r : report.instances) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << r.instance_id << ',' << (r.termination ? std::string(to_string(*r.termination)) : "error") << ','
       << r.steps << ',' << r.uncounted_pops << ',' << err << '\n';
  }
}

void write_extrinsic_json(std::ostream& os, const ExtrinsicReport& report) {
  ordered_json j;
  j["protocol"] = "extrinsic";
  j["instances"] = report.instances.size();
  j["solved"] = report.solved;
  j["failed"] = report.failed;
  j["solved_fraction"] = report.solved_fraction;
  j["mean_steps"] = report.mean_steps;
  j["per_instance"] = ordered_json::array();
  for (const auto& r : report.instances) {
    ordered_json row;
    row["id"] = r.instance_id;
    row["termination"] = r.termination ? ordered_json(std::string(to_string(*r.termination))) : ordered_json(nullptr);
    row["steps"] = r.steps;
    if (!r.error.empty()) row["error"] = r.error;
    j["per_instance"].push_back(std::move(row));
  }
  os << j.dump(2) << '\n';
}

void write_ssrc_csv(std::ostream& os, const SsrcReport& report) {
  os << "id,category,perturbation,candidates,rank,reciprocal\n";
  for (const auto& r : report.rows) {
    os << r.id << ',' << to_string(r.category) << ','
       << (r.perturbation ? std::string(to_string(*r.perturbation)) : "none") << ',' << r.candidates << ',' << r.rank
       << ',' << fmt(1.0 / static_cast<double>(r.rank)) << '\n';
  }
}

void write_ssrc_json(std::ostream& os, const SsrcReport& report) {
  ordered_json j;
  j["protocol"] = "ssrc";
  j["heuristic"] = report.heuristic;
  j["examples"] = report.rows.size();
  j["overall"] = report.overall;
  j["per_category"] = ordered_json::object();
  for (const auto& [c, v] : report.per_category) j["per_category"][std::string(to_string(c))] = v;
  j["per_perturbation"] = ordered_json::object();
  for (const auto& [p, v] : report.per_perturbation) j["per_perturbation"][std::string(to_string(p))] = v;
  j["cells"] = ordered_json::array();
  for (const auto& [key, v] : report.cells) {
    j["cells"].push_back({{"category", std::string(to_string(key.first))},
                          {"perturbation", key.second ? std::string(to_string(*key.second)) : "none"},
                          {"mrr", v}});
  }
  os << j.dump(2) << '\n';
}

}  // namespace dap
