#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "dap/evaluation.hpp"
#include "dap/synthetic.hpp"
#include "oracles.hpp"

using namespace dap;

namespace {

class ConstantHeuristic final : public Heuristic {
 public:
  std::string name() const override { return "constant"; }
  std::vector<double> score_pairs(std::span<const PairText> pairs, std::string_view) const override {
    return std::vector<double>(pairs.size(), 0.5);
  }
};

ProofInstance two_step_instance() {
  ProofInstance inst;
  inst.id = "two";
  inst.premises = {{"p1", "x", Origin::GeneralFact}, {"p2", "y", Origin::GeneralFact}, {"p3", "z", Origin::GeneralFact}};
  inst.goal = {"goal", "xyz", Origin::Goal};
  inst.gold_tree = GoldTree{{{"p1", "p2", {"i1", "xy", Origin::Intermediate}}, {"p3", "i1", {"goal", "xyz", Origin::Goal}}}, "goal"};
  return inst;
}

std::size_t choose2(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

TEST(PairSets, SmallPools) {
  const auto three = build_pair_sets(3, 0, 1);
  EXPECT_EQ(three.gold, (IndexPair{0, 1}));
  EXPECT_EQ(three.partial, (std::vector<IndexPair>{{0, 2}, {1, 2}}));
  EXPECT_TRUE(three.random.empty());
  const auto four = build_pair_sets(4, 1, 0);
  EXPECT_EQ(four.gold, (IndexPair{0, 1}));
  EXPECT_EQ(four.partial.size(), 4u);
  EXPECT_EQ(four.random, (std::vector<IndexPair>{{2, 3}}));
  try {
    build_pair_sets(2, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewPremises);
  }
  EXPECT_THROW(build_pair_sets(4, 2, 2), Error);
  EXPECT_THROW(build_pair_sets(4, 0, 4), Error);
}

TEST(PairSets, PartitionProperty) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 15;
    const std::size_t a = rng() % n;
    std::size_t b = rng() % n;
    if (a == b) b = (a + 1) % n;
    const auto s = build_pair_sets(n, a, b);
    std::set<IndexPair> all{s.gold};
    for (const auto& p : s.partial) {
      EXPECT_NE(p.first == s.gold.first || p.first == s.gold.second, p.second == s.gold.first || p.second == s.gold.second);
      all.insert(p);
    }
    for (const auto& p : s.random) {
      EXPECT_FALSE(p.first == a || p.first == b || p.second == a || p.second == b);
      all.insert(p);
    }
    EXPECT_EQ(all.size(), choose2(n));
    EXPECT_EQ(1 + s.partial.size() + s.random.size(), choose2(n));
    EXPECT_EQ(s.partial.size(), 2 * (n - 2));
  }
}

TEST(Mrr, ReciprocalMeanAndPessimisticTies) {
  const std::vector<std::size_t> ranks{1, 2, 4};
  EXPECT_NEAR(mean_reciprocal_rank(ranks), (1 + 0.5 + 0.25) / 3, 1e-15);
  EXPECT_NEAR(mean_reciprocal_rank(ranks), oracle::mrr(ranks), 1e-15);
  const std::vector<double> s{0.3, 0.9, 0.3, 0.1};
  EXPECT_EQ(pessimistic_rank(s, 0), 3u);
  EXPECT_EQ(pessimistic_rank(s, 1), 1u);
  EXPECT_EQ(pessimistic_rank(s, 3), 4u);
  const std::vector<double> same(7, 1.0);
  EXPECT_EQ(pessimistic_rank(same, 0), 7u);
}

TEST(Mrr, ConstantHeuristicRanksLast) {
  ProofInstance inst;
  inst.id = "c";
  for (int i = 0; i < 4; ++i) inst.premises.push_back({"p" + std::to_string(i), "fact " + std::to_string(i), Origin::GeneralFact});
  inst.goal = {"goal", "g", Origin::Goal};
  inst.gold_tree = GoldTree{{{"p0", "p1", {"goal", "g", Origin::Goal}}}, "goal"};
  const std::vector<ProofInstance> data{inst};
  const auto r = mrr(data, ConstantHeuristic{}, Conditioning::Goal);
  ASSERT_EQ(r.examples.size(), 1u);
  EXPECT_EQ(r.examples[0].candidates, 6u);
  EXPECT_NEAR(r.mrr, 1.0 / 6, 1e-15);
}

TEST(Mrr, StepExamplesGrowThePool) {
  const auto ex = step_examples(two_step_instance());
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].pool.size(), 3u);
  EXPECT_EQ(ex[0].gold, (IndexPair{0, 1}));
  EXPECT_EQ(ex[0].deduction, "xy");
  EXPECT_EQ(ex[1].pool, (std::vector<std::string>{"x", "y", "z", "xy"}));
  EXPECT_EQ(ex[1].gold, (IndexPair{2, 3}));
  EXPECT_EQ(ex[1].goal, "xyz");
  ProofInstance bare = two_step_instance();
  bare.gold_tree.reset();
  EXPECT_THROW(step_examples(bare), Error);
}

TEST(Mrr, SmallPoolsAreSkipped) {
  ProofInstance inst;
  inst.id = "tiny";
  inst.premises = {{"p1", "a", Origin::GeneralFact}, {"p2", "b", Origin::GeneralFact}};
  inst.goal = {"goal", "ab", Origin::Goal};
  inst.gold_tree = GoldTree{{{"p1", "p2", {"goal", "ab", Origin::Goal}}}, "goal"};
  std::vector<ProofInstance> data{inst};
  try {
    mrr(data, ConstantHeuristic{}, Conditioning::Deduction);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDataset);
  }
  data.push_back(two_step_instance());
  const auto r = mrr(data, ConstantHeuristic{}, Conditioning::Deduction);
  EXPECT_EQ(r.skipped_small_pools, 1u);
  EXPECT_EQ(r.examples.size(), 2u);
  EXPECT_NEAR(r.mrr, (1.0 / 3 + 1.0 / 6) / 2, 1e-15);
}

TEST(Mrr, SamplingAboveTheLimit) {
  const auto sets = build_pair_sets(50, 3, 7);
  const MrrOptions opt;
  const auto c = candidate_pairs(sets, 50, opt, 99);
  ASSERT_EQ(c.size(), 1 + 96 + 500u);
  EXPECT_EQ(c[0], sets.gold);
  EXPECT_EQ(std::set<IndexPair>(c.begin(), c.end()).size(), c.size());
  EXPECT_EQ(candidate_pairs(sets, 50, opt, 99), c);
  EXPECT_NE(candidate_pairs(sets, 50, opt, 100), c);
  const auto small = build_pair_sets(40, 0, 1);
  EXPECT_EQ(candidate_pairs(small, 40, opt, 1).size(), choose2(40));
}

TEST(Mrr, AdditiveSyntheticIsPerfect) {
  const auto r = synthetic::check_additive_mrr(5, 50);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Conditioning, Parse) {
  EXPECT_EQ(parse_conditioning("goal"), Conditioning::Goal);
  EXPECT_EQ(parse_conditioning("deduction"), Conditioning::Deduction);
  EXPECT_THROW(parse_conditioning("both"), Error);
}

TEST(Distribution, GoldBeatsPartialBeatsRandom) {
  std::mt19937_64 rng(17);
  std::vector<ProofInstance> data;
  for (int i = 0; i < 100; ++i) data.push_back(synthetic::additive_instance(rng, 16, 8, "d" + std::to_string(i)));
  const auto enc = synthetic::concept_encoder(16);
  const auto r = distribution_report(data, *enc);
  EXPECT_FALSE(r.has_model);
  EXPECT_EQ(r.values.count(DistSetting::Model), 0u);
  EXPECT_NEAR(r.mean(DistSetting::Gold), 1.0, 1e-12);
  EXPECT_GT(r.mean(DistSetting::Gold), r.mean(DistSetting::Partial));
  EXPECT_GT(r.mean(DistSetting::Partial), r.mean(DistSetting::Random));
  EXPECT_EQ(r.values.at(DistSetting::Gold).size(), 100u);
  EXPECT_EQ(r.values.at(DistSetting::Partial).size(), 100u * 12);
  EXPECT_TRUE(std::isnan(DistributionReport{}.mean(DistSetting::Gold)));

  std::ostringstream csv, hist;
  write_distribution_csv(csv, r);
  write_histogram_json(hist, r);
  EXPECT_NE(csv.str().find("gold"), std::string::npos);
  EXPECT_FALSE(hist.str().empty());
}

TEST(Extrinsic, OracleComponentsSolveEverything) {
  std::mt19937_64 rng(4);
  std::vector<ProofInstance> data;
  for (int i = 0; i < 20; ++i) data.push_back(synthetic::gold_tree_instance(rng, 1 + i % 4, 3, "e" + std::to_string(i)));
  const ComponentFactory factory = [](const ProofInstance& inst) {
    SearchComponents c;
    c.heuristic = OracleHeuristic::from_gold(inst);
    c.step_model = OracleStepModel::from_gold(inst);
    c.entailment = std::make_shared<OracleEntailment>();
    return c;
  };
  const auto r = extrinsic(data, factory, SearchConfig{}, 2);
  EXPECT_EQ(r.solved, 20u);
  EXPECT_EQ(r.failed, 0u);
  EXPECT_EQ(r.solved_fraction, 1.0);
  EXPECT_NEAR(r.mean_steps, (1 + 2 + 3 + 4) / 4.0, 1e-12);
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(r.instances[i].instance_id, data[i].id);
  try {
    extrinsic({}, factory, SearchConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDataset);
  }
}

TEST(Extrinsic, FailuresAreRecordedNotThrown) {
  std::mt19937_64 rng(5);
  const std::vector<ProofInstance> data{synthetic::gold_tree_instance(rng, 2, 0, "f")};
  const ComponentFactory factory = [](const ProofInstance&) {
    SearchComponents c;
    c.heuristic = std::make_shared<AdditiveHeuristic>(std::make_shared<SyntheticAdditiveEncoder>(std::vector<std::string>{"q"}));
    c.step_model = std::make_shared<OracleStepModel>();
    c.entailment = std::make_shared<OracleEntailment>();
    return c;
  };
  const auto r = extrinsic(data, factory, SearchConfig{});
  EXPECT_EQ(r.failed, 1u);
  EXPECT_FALSE(r.instances[0].termination);
  EXPECT_FALSE(r.instances[0].error.empty());
}

TEST(Ssrc, CategoriesParseAndRoundTrip) {
  for (std::size_t i = 0; i < kSsrcCategoryCount; ++i) {
    const auto c = static_cast<SsrcCategory>(i);
    EXPECT_EQ(parse_category(to_string(c)), c);
  }
  EXPECT_EQ(parse_category("modus-ponens"), SsrcCategory::ModusPonens);
  try {
    parse_category("Telepathy");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownCategory);
  }
  for (std::size_t i = 0; i < kPerturbationCount; ++i) {
    const auto p = static_cast<Perturbation>(i);
    EXPECT_EQ(parse_perturbation(to_string(p)), p);
  }
  EXPECT_THROW(parse_perturbation("sarcasm"), Error);
}

TEST(Ssrc, CandidateCrossProduct) {
  SsrcExample ex{"s", SsrcCategory::Analogy, Perturbation::Negation, {"a", "b"}, "c", {{{"a2"}, {"b2"}}}};
  auto pairs = ssrc_candidate_pairs(ex);
  ASSERT_EQ(pairs.size(), 4u);
  EXPECT_EQ(pairs[0].left, "a");
  EXPECT_EQ(pairs[0].right, "b");
  ex.variants = {{{"a2", "a3", "a4"}, {"b2", "b3", "b4"}}};
  EXPECT_EQ(ssrc_candidate_pairs(ex).size(), 16u);
  ex.variants = {{{}, {"b2"}}};
  EXPECT_EQ(ssrc_candidate_pairs(ex).size(), 2u);
  ex.variants = {};
  try {
    ssrc_candidate_pairs(ex);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingVariants);
  }
}

TEST(Ssrc, AggregationRecomputes) {
  // Constant scores: every example ranks last, so its reciprocal rank is 1 / |candidates|.
  std::vector<SsrcExample> ex;
  const auto add = [&](std::string id, SsrcCategory c, std::optional<Perturbation> p, std::size_t v) {
    SsrcExample e{std::move(id), c, p, {"a", "b"}, "c", {}};
    for (std::size_t i = 0; i < v; ++i) e.variants[0].push_back("v" + std::to_string(i));
    ex.push_back(e);
  };
  add("1", SsrcCategory::Analogy, std::nullopt, 1);           // 1/2
  add("2", SsrcCategory::Analogy, Perturbation::Negation, 3);  // 1/4
  add("3", SsrcCategory::Analogy, Perturbation::Negation, 1);  // 1/2
  add("4", SsrcCategory::Division, Perturbation::Negation, 4); // 1/5
  add("5", SsrcCategory::Division, Perturbation::FalsePremise, 9);
  const auto r = ssrc_breakdown(ex, ConstantHeuristic{});
  const double analogy_neg = (0.25 + 0.5) / 2;
  EXPECT_NEAR(r.cells.at({SsrcCategory::Analogy, std::nullopt}), 0.5, 1e-15);
  EXPECT_NEAR(r.cells.at({SsrcCategory::Analogy, Perturbation::Negation}), analogy_neg, 1e-15);
  EXPECT_NEAR(r.per_category.at(SsrcCategory::Analogy), (0.5 + analogy_neg) / 2, 1e-15);
  EXPECT_NEAR(r.per_category.at(SsrcCategory::Division), (0.2 + 0.1) / 2, 1e-15);
  EXPECT_NEAR(r.per_perturbation.at(Perturbation::Negation), (analogy_neg + 0.2) / 2, 1e-15);
  EXPECT_NEAR(r.per_perturbation.at(Perturbation::FalsePremise), 0.1, 1e-15);
  EXPECT_NEAR(r.overall, ((0.5 + analogy_neg) / 2 + 0.15) / 2, 1e-15);
  EXPECT_EQ(r.overall, ssrc_overall_from_categories(r));
  EXPECT_THROW(ssrc_breakdown({}, ConstantHeuristic{}), Error);

  std::ostringstream os;
  write_ssrc_json(os, r);
  EXPECT_NE(os.str().find("Division"), std::string::npos);
}
