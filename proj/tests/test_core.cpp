#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <queue>

#include "dap/core.hpp"

using namespace dap;

TEST(Vector, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(Vector(std::vector<double>{}), Error);
  try {
    Vector v{1.0, std::numeric_limits<double>::quiet_NaN()};
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
  }
  EXPECT_THROW((Vector{1.0, std::numeric_limits<double>::infinity()}), Error);
}

TEST(Cosine, HandComputedValues) {
  // (1,2).(2,1) = 4, |.| = sqrt5 each -> 0.8
  EXPECT_NEAR(cosine(Vector{1, 2}, Vector{2, 1}), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(cosine(Vector{3, 0}, Vector{0, 5}), 0.0);
  EXPECT_DOUBLE_EQ(cosine(Vector{1, 1}, Vector{-2, -2}), -1.0);
}

TEST(Cosine, ErrorsAndClamp) {
  try {
    cosine(Vector{0, 0}, Vector{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVector);
  }
  try {
    cosine(Vector{1, 0}, Vector{1, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  const Vector v{0.1, 0.7, 1e-3, 3.3};
  const double c = cosine(v, v);
  EXPECT_LE(c, 1.0);
  EXPECT_GE(c, 1.0 - 1e-15);
}

TEST(Cosine, ScaleInvariantAndSymmetric) {
  const Vector u{0.3, -1.2, 2.0}, v{1.5, 0.2, -0.7};
  EXPECT_NEAR(cosine(u, v), cosine(v, u), 1e-15);
  EXPECT_NEAR(cosine(scaled(u, 7.5), v), cosine(u, v), 1e-14);
  EXPECT_EQ(vec_sum(u, v), (Vector{1.8, -1.0, 1.3}));
}

TEST(NormalizeText, CanonicalForm) {
  EXPECT_EQ(normalize_text("  The Sun  is   a STAR. "), "the sun is a star");
  EXPECT_EQ(normalize_text("a b"), normalize_text("A\tb."));
  EXPECT_EQ(normalize_text("   "), "");
  EXPECT_EQ(normalize_text("ends.."), "ends.");
}

TEST(NodeRef, CanonicalPairAndOrdering) {
  const auto p = canonical_pair(NodeRef::intermediate(0), NodeRef::premise(4));
  EXPECT_EQ(p.first, NodeRef::premise(4));
  EXPECT_EQ(p.second, NodeRef::intermediate(0));
  EXPECT_EQ(to_string(NodeRef::premise(3)), "P3");
  EXPECT_EQ(to_string(NodeRef::intermediate(0)), "I0");
  try {
    canonical_pair(NodeRef::premise(1), NodeRef::premise(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SelfPair);
  }
}

TEST(FringeOrder, HighestScoreThenEarliest) {
  std::priority_queue<CandidateStep, std::vector<CandidateStep>, FringeOrder> q;
  q.push({NodeRef::premise(0), NodeRef::premise(1), 0.5, 0});
  q.push({NodeRef::premise(0), NodeRef::premise(2), 0.9, 1});
  q.push({NodeRef::premise(1), NodeRef::premise(2), 0.9, 2});
  EXPECT_EQ(q.top().seq, 1u);
  q.pop();
  EXPECT_EQ(q.top().seq, 2u);
  q.pop();
  EXPECT_EQ(q.top().seq, 0u);
}

namespace {
ProofInstance two_step() {
  ProofInstance inst;
  inst.id = "x";
  inst.premises = {{"p1", "a", Origin::GeneralFact}, {"p2", "b", Origin::GeneralFact}, {"p3", "c", Origin::GeneralFact}};
  inst.goal = {"goal", "abc", Origin::Goal};
  inst.gold_tree = GoldTree{{{"p1", "p2", {"i1", "ab", Origin::Intermediate}}, {"i1", "p3", {"i2", "abc", Origin::Intermediate}}}, "i2"};
  return inst;
}
}  // namespace

TEST(Validate, AcceptsWellFormedTree) {
  const auto inst = two_step();
  EXPECT_NO_THROW(validate(inst));
  EXPECT_EQ(inst.text_of("i1"), "ab");
  EXPECT_EQ(inst.premise_index("p3"), 2u);
  EXPECT_FALSE(inst.premise_index("i1"));
}

TEST(Validate, Defects) {
  auto kind_of = [](const ProofInstance& inst) {
    try {
      validate(inst);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;  // sentinel: no error
  };
  auto dangling = two_step();
  dangling.gold_tree->steps[1].right_id = "p9";
  EXPECT_EQ(kind_of(dangling), ErrorKind::DanglingReference);

  auto forward_ref = two_step();
  std::swap(forward_ref.gold_tree->steps[0], forward_ref.gold_tree->steps[1]);
  EXPECT_EQ(kind_of(forward_ref), ErrorKind::DanglingReference);

  auto one = two_step();
  one.premises.resize(1);
  one.gold_tree.reset();
  EXPECT_EQ(kind_of(one), ErrorKind::TooFewPremises);

  auto dup = two_step();
  dup.premises[2].id = "p1";
  EXPECT_EQ(kind_of(dup), ErrorKind::InvalidArgument);

  auto reused = two_step();
  reused.gold_tree->steps.push_back({"i1", "p2", {"i3", "abb", Origin::Intermediate}});
  EXPECT_EQ(kind_of(reused), ErrorKind::InvalidArgument);
}
