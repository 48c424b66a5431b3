#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "dap/bm25.hpp"
#include "oracles.hpp"

using namespace dap;

namespace {

const std::vector<std::string> kDocs = {"the cat sat on the mat", "the dog sat", "cats and dogs are pets"};

}  // namespace

TEST(Tokenize, LowercaseSplitOnNonAlnum) {
  EXPECT_EQ(tokenize("The cat's MAT, 2x-large!"), (TokenStream{"the", "cat", "s", "mat", "2x", "large"}));
  EXPECT_TRUE(tokenize(" .,; ").empty());
}

TEST(Bm25, IdfPinned) {
  const auto index = Bm25Index::from_documents(kDocs);
  // N=3, df=1: ln(2.5/1.5 + 1)
  EXPECT_NEAR(index.idf("mat"), 0.9808292530117262, 1e-15);
  // N=3, df=2: ln(1.5/2.5 + 1)
  EXPECT_NEAR(index.idf("sat"), 0.4700036292457356, 1e-15);
  EXPECT_EQ(index.df("the"), 2u);
  EXPECT_EQ(index.tf("the", 0), 2u);
  EXPECT_DOUBLE_EQ(index.avgdl(), 14.0 / 3.0);
}

TEST(Bm25, MatchesDirectFormula) {
  const auto index = Bm25Index::from_documents(kDocs);
  for (const std::string q : {"cat sat mat", "the the dog", "pets", "unknown words only", "sat"}) {
    for (std::size_t d = 0; d < kDocs.size(); ++d) {
      EXPECT_NEAR(index.score(tokenize(q), d), oracle::bm25(kDocs, q, d), 1e-9) << q << " doc " << d;
    }
  }
}

TEST(Bm25, ErrorsAndEdges) {
  Bm25Index index;
  index.add_document("a b");
  try {
    index.score(tokenize("a"), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IndexNotBuilt);
  }
  index.build();
  try {
    index.score(tokenize("a"), 7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownDoc);
  }
  EXPECT_THROW(index.top_k(tokenize("a"), 0), Error);
  EXPECT_THROW(Bm25Index().build(), Error);
  EXPECT_EQ(index.score({}, 0), 0.0);
}

TEST(Bm25, TopKMatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> ndocs(1, 50), len(1, 12), word(0, 9);
    std::vector<std::string> docs(static_cast<std::size_t>(ndocs(rng)));
    for (auto& d : docs) {
      for (int k = len(rng); k > 0; --k) d += "t" + std::to_string(word(rng)) + " ";
    }
    const auto index = Bm25Index::from_documents(docs);
    const TokenStream q = tokenize("t" + std::to_string(word(rng)) + " t" + std::to_string(word(rng)));
    std::vector<ScoredDoc> brute;
    for (std::size_t d = 0; d < docs.size(); ++d) brute.push_back({d, index.score(q, d)});
    std::sort(brute.begin(), brute.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
      return a.score != b.score ? a.score > b.score : a.doc < b.doc;
    });
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, docs.size() + 3)(rng);
    const auto top = index.top_k(q, k);
    ASSERT_EQ(top.size(), std::min(k, docs.size()));
    for (std::size_t i = 0; i < top.size(); ++i) {
      EXPECT_EQ(top[i].doc, brute[i].doc);
      EXPECT_EQ(top[i].score, brute[i].score);
    }
  }
}

TEST(Bm25, SnapshotRoundTrip) {
  const auto index = Bm25Index::from_documents(kDocs, {1.5, 0.5});
  std::stringstream ss;
  index.save(ss);
  const auto back = Bm25Index::load(ss);
  EXPECT_EQ(back.params(), index.params());
  EXPECT_EQ(back.size(), index.size());
  const auto q = tokenize("cat dogs the");
  EXPECT_EQ(back.score_all(q), index.score_all(q));
}

TEST(Bm25, ScoresNonNegativeAndMonotoneInTf) {
  const std::vector<std::string> docs = {"x y", "x x y", "z"};
  const auto index = Bm25Index::from_documents(docs);
  const auto s = index.score_all(tokenize("x"));
  for (double v : s) EXPECT_GE(v, 0.0);
  EXPECT_GT(s[1], s[0]);
  EXPECT_EQ(s[2], 0.0);
}
