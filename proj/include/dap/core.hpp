#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dap/error.hpp"

namespace dap {

// Dense embedding. Entries are finite and the dimension is at least one.
// Stored raw; normalization happens only inside cosine().
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::vector<double> values);
  Vector(std::initializer_list<double> values);

  static Vector zeros(std::size_t dim);

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& raw() const noexcept { return values_; }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> values_;
};

double dot(const Vector& u, const Vector& v);
double norm(const Vector& v);

// u.v / (|u||v|). Throws DimensionMismatch or ZeroVector.
double cosine(const Vector& u, const Vector& v);

Vector vec_sum(const Vector& u, const Vector& v);
Vector scaled(const Vector& v, double alpha);

enum class Origin { GeneralFact, InstanceFact, Intermediate, Goal };

std::string_view to_string(Origin origin);

struct Statement {
  std::string id;
  std::string text;
  Origin origin = Origin::GeneralFact;

  bool operator==(const Statement&) const = default;
};

// Lowercase, trim, collapse internal whitespace, strip one trailing period.
// Used as the identity key for caching, dedup and oracle lookups.
std::string normalize_text(std::string_view text);

struct NodeRef {
  enum class Kind : std::uint8_t { Premise = 0, Intermediate = 1 };

  Kind kind = Kind::Premise;
  std::size_t index = 0;

  static constexpr NodeRef premise(std::size_t i) { return {Kind::Premise, i}; }
  static constexpr NodeRef intermediate(std::size_t i) { return {Kind::Intermediate, i}; }

  bool is_premise() const noexcept { return kind == Kind::Premise; }

  // Premises order before intermediates, then by index.
  auto operator<=>(const NodeRef&) const = default;
};

std::string to_string(NodeRef ref);

// Throws SelfPair when a == b.
std::pair<NodeRef, NodeRef> canonical_pair(NodeRef a, NodeRef b);

struct CandidateStep {
  NodeRef left;
  NodeRef right;
  double score = 0.0;
  std::uint64_t seq = 0;
};

// Max-heap ordering for the fringe: higher score first, then lower seq.
struct FringeOrder {
  bool operator()(const CandidateStep& a, const CandidateStep& b) const noexcept {
    if (a.score != b.score) return a.score < b.score;
    return a.seq > b.seq;
  }
};

struct GoldStep {
  std::string left_id;
  std::string right_id;
  Statement conclusion;

  bool operator==(const GoldStep&) const = default;
};

struct GoldTree {
  std::vector<GoldStep> steps;
  std::string root_id;

  bool operator==(const GoldTree&) const = default;
};

struct ProofInstance {
  std::string id;
  std::vector<Statement> premises;
  Statement goal;
  std::optional<GoldTree> gold_tree;

  bool operator==(const ProofInstance&) const = default;

  std::optional<std::size_t> premise_index(std::string_view id) const;
  // Text of a premise or gold-step conclusion by id.
  std::optional<std::string> text_of(std::string_view id) const;
};

// Checks premise count, unique ids, nonempty texts and that every gold step
// cites a premise or an earlier conclusion (DanglingReference otherwise).
void validate(const ProofInstance& instance);

struct Intermediate {
  Statement statement;
  std::pair<NodeRef, NodeRef> parents;
  std::optional<Vector> embedding;
  double agreement = 1.0;
  double branch_agreement_mean = 1.0;
};

}  // namespace dap
