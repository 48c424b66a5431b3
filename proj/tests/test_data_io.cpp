#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dap/data_io.hpp"
#include "dap/synthetic.hpp"

using namespace dap;

namespace {

std::vector<ProofInstance> parse(const std::string& text, GoldMode mode = GoldMode::Strict) {
  std::istringstream is(text);
  return read_instances(is, "test", mode);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::Io;
}

const char* kMinimal =
    R"({"id":"m1","premises":{"p1":"all birds fly","p2":"a robin is a bird"},"goal":"a robin flies",)"
    R"("steps":[["p1","p2","goal"]],"root":"goal"})";

}  // namespace

TEST(Instances, MinimalRecord) {
  const auto v = parse(std::string(kMinimal) + "\n\n");
  ASSERT_EQ(v.size(), 1u);
  const auto& i = v[0];
  EXPECT_EQ(i.id, "m1");
  ASSERT_EQ(i.premises.size(), 2u);
  EXPECT_EQ(i.premises[0].id, "p1");
  EXPECT_EQ(i.goal.id, "goal");
  ASSERT_TRUE(i.gold_tree);
  EXPECT_EQ(i.gold_tree->steps[0].conclusion.text, "a robin flies");
  EXPECT_EQ(i.gold_tree->root_id, "goal");
}

TEST(Instances, DefectsStrictAndLenient) {
  const std::string dangling =
      R"({"id":"d","premises":{"p1":"x","p2":"y"},"goal":"z","steps":[["p1","p9","goal"]],"root":"goal"})";
  EXPECT_EQ(kind_of([&] { parse(dangling); }), ErrorKind::DanglingReference);
  const auto lenient = parse(dangling, GoldMode::Lenient);
  ASSERT_EQ(lenient.size(), 1u);
  EXPECT_FALSE(lenient[0].gold_tree);
  EXPECT_EQ(lenient[0].premises.size(), 2u);

  EXPECT_EQ(kind_of([] { parse("{not json"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse(R"({"id":"x","goal":"g"})"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { load_instances("/nonexistent/file.jsonl"); }), ErrorKind::Io);
}

TEST(Instances, RoundTripGeneratedTrees) {
  std::mt19937_64 rng(6);
  std::vector<ProofInstance> original;
  for (int i = 0; i < 30; ++i) original.push_back(synthetic::gold_tree_instance(rng, 1 + i % 5, i % 3, "r" + std::to_string(i)));
  original[0].premises[0].origin = Origin::InstanceFact;
  std::stringstream ss;
  write_instances(ss, original);
  const auto back = read_instances(ss);
  EXPECT_EQ(back, original);
}

TEST(EntailmentBank, Adapter) {
  nlohmann::json rec;
  rec["id"] = "eb1";
  rec["hypothesis"] = "the sun heats the earth";
  rec["meta"]["triples"] = {{"sent1", "the sun is a star"}, {"sent2", "stars emit heat"}, {"sent3", "the earth orbits the sun"}};
  rec["meta"]["intermediate_conclusions"] = {{"int1", "the sun emits heat"}};
  rec["meta"]["step_proof"] = "sent1 & sent2 -> int1: the sun emits heat; int1 & sent3 -> hypothesis;";
  std::istringstream is(rec.dump() + "\n");
  const auto v = read_entailment_bank(is);
  ASSERT_EQ(v.size(), 1u);
  ASSERT_TRUE(v[0].gold_tree);
  EXPECT_EQ(v[0].premises.size(), 3u);
  EXPECT_EQ(v[0].gold_tree->steps.size(), 2u);
  EXPECT_EQ(v[0].gold_tree->root_id, "goal");
  EXPECT_EQ(v[0].gold_tree->steps[1].conclusion.text, "the sun heats the earth");

  rec["meta"]["step_proof"] = "sent1 & sent2 & sent3 -> hypothesis;";
  std::istringstream nary(rec.dump());
  const auto w = read_entailment_bank(nary);
  EXPECT_FALSE(w[0].gold_tree);
}

TEST(Ssrc, ReadWriteRoundTrip) {
  const std::string text =
      R"({"id":"s1","category":"Modus Ponens","perturbation":"Negation","premises":["if p then q","p"],)"
      R"("conclusion":"q","variants":[["if p then not q"],["not p"]]})"
      "\n"
      R"({"id":"s2","category":"analogy","perturbation":"none","premises":["a","b"],"conclusion":"c","variants":[[],["d"]]})";
  std::istringstream is(text);
  const auto v = read_ssrc(is);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].category, SsrcCategory::ModusPonens);
  EXPECT_EQ(v[0].perturbation, Perturbation::Negation);
  EXPECT_FALSE(v[1].perturbation);
  EXPECT_EQ(ssrc_candidate_pairs(v[0]).size(), 4u);
  std::stringstream ss;
  write_ssrc(ss, v);
  const auto back = read_ssrc(ss);
  EXPECT_EQ(back[1].variants[1], (std::vector<std::string>{"d"}));
  EXPECT_EQ(back[0].premises, v[0].premises);

  std::istringstream bad(R"({"id":"x","category":"Telepathy","premises":["a","b"],"conclusion":"c"})");
  EXPECT_EQ(kind_of([&] { read_ssrc(bad); }), ErrorKind::UnknownCategory);
}

TEST(Corpus, T3ToT2) {
  std::istringstream is(
      "{\"id\":\"f1\",\"text\":\"plants need sunlight\"}\n{\"id\":\"f2\",\"text\":\"the sun is a star\"}\n"
      "{\"id\":\"f3\",\"text\":\"a star emits light\"}\n");
  const auto corpus = read_corpus(is);
  ASSERT_EQ(corpus.size(), 3u);
  std::istringstream plain("one fact\ntwo fact\n");
  EXPECT_EQ(read_corpus(plain)[1].id, "c1");

  const auto index = index_corpus(corpus);
  const std::vector<Statement> facts{{"x1", "the sun is a star", Origin::InstanceFact},
                                     {"x2", "my plant is on the sill", Origin::InstanceFact}};
  const auto all = t3_to_t2("the sun is a star that emits light", index, corpus, 10, facts);
  EXPECT_EQ(all.size(), 4u);  // every corpus fact plus one new instance fact
  const auto top1 = t3_to_t2("the sun is a star", index, corpus, 1, facts);
  ASSERT_LE(top1.size(), 1 + facts.size());
  EXPECT_EQ(top1[0].text, "the sun is a star");
  EXPECT_EQ(top1.back().text, "my plant is on the sill");
  EXPECT_EQ(top1.back().origin, Origin::InstanceFact);
  EXPECT_EQ(kind_of([&] { t3_to_t2("x", Bm25Index{}, corpus, 2); }), ErrorKind::IndexNotBuilt);
}

TEST(Triplets, OnePerGoldStep) {
  std::mt19937_64 rng(9);
  std::vector<ProofInstance> data;
  for (int i = 0; i < 5; ++i) data.push_back(synthetic::additive_instance(rng, 10, 5, "a" + std::to_string(i)));
  const auto enc = synthetic::concept_encoder(10);
  auto groups = extract_triplets(data, *enc);
  ASSERT_EQ(groups.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    ASSERT_EQ(groups[i].triplets.size(), 1u);
    const auto& t = groups[i].triplets[0];
    EXPECT_EQ(t.tree_id, data[i].id);
    EXPECT_EQ(vec_sum(t.e_a, t.e_b), t.e_d);
    EXPECT_EQ(t.e_a, enc->encode(t.text_a));
  }
  data[2].gold_tree.reset();
  EXPECT_EQ(kind_of([&] { extract_triplets(data, *enc); }), ErrorKind::NoGoldTree);
  std::vector<std::string> skipped;
  EXPECT_EQ(extract_triplets(data, *enc, false, &skipped).size(), 4u);
  EXPECT_EQ(skipped, (std::vector<std::string>{"a2"}));
}

TEST(Manifest, WritesHashAndFields) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  const auto dir = std::filesystem::temp_directory_path() / "dap_manifest_test";
  std::filesystem::remove_all(dir);
  RunManifest m{"eval-mrr", "heuristic=bm25\n", 7, {{"dataset", "x.jsonl"}}, {{"report", "mrr.json"}}};
  write_manifest(dir, m);
  std::ifstream is(dir / "manifest.json");
  const auto j = nlohmann::json::parse(is);
  EXPECT_EQ(j.at("command"), "eval-mrr");
  EXPECT_EQ(j.at("seed"), 7);
  EXPECT_EQ(j.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_EQ(j.at("outputs").at("report"), "mrr.json");
  EXPECT_TRUE(j.contains("timestamp"));
}
