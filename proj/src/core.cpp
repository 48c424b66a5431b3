#include "dap/core.hpp"

#include <cctype>
#include <cmath>
#include <unordered_set>

namespace dap {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SelfPair: return "SelfPair";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::RemoteFailure: return "RemoteFailure";
    case ErrorKind::UnknownConcept: return "UnknownConcept";
    case ErrorKind::IndexNotBuilt: return "IndexNotBuilt";
    case ErrorKind::UnknownDoc: return "UnknownDoc";
    case ErrorKind::UnknownTripleStrict: return "UnknownTripleStrict";
    case ErrorKind::EncodingFailure: return "EncodingFailure";
    case ErrorKind::StepModelFailure: return "StepModelFailure";
    case ErrorKind::EntailmentFailure: return "EntailmentFailure";
    case ErrorKind::NodeNotFound: return "NodeNotFound";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::NoTriplets: return "NoTriplets";
    case ErrorKind::TooFewPremises: return "TooFewPremises";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::MissingVariants: return "MissingVariants";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::NoGoldTree: return "NoGoldTree";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::UnknownPerturbation: return "UnknownPerturbation";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorKind::InvalidArgument, "vector dimension must be positive");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      throw Error(ErrorKind::NonFinite, "entry " + std::to_string(i) + " is not finite");
  }
}

Vector::Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

Vector Vector::zeros(std::size_t dim) { return Vector(std::vector<double>(dim, 0.0)); }

namespace {

void require_same_dim(const Vector& u, const Vector& v) {
  if (u.dim() != v.dim())
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
}

}  // namespace

double dot(const Vector& u, const Vector& v) {
  require_same_dim(u, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) acc += u[i] * v[i];
  return acc;
}

double norm(const Vector& v) {
  double acc = 0.0;
  for (double x : v.values()) acc += x * x;
  return std::sqrt(acc);
}

double cosine(const Vector& u, const Vector& v) {
  require_same_dim(u, v);
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorKind::ZeroVector, "cosine of a zero vector");
  double c = dot(u, v) / (nu * nv);
  // rounding can push |c| a hair past 1
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

Vector vec_sum(const Vector& u, const Vector& v) {
  require_same_dim(u, v);
  std::vector<double> out(u.dim());
  for (std::size_t i = 0; i < u.dim(); ++i) out[i] = u[i] + v[i];
  return Vector(std::move(out));
}

Vector scaled(const Vector& v, double alpha) {
  std::vector<double> out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = alpha * v[i];
  return Vector(std::move(out));
}

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::GeneralFact: return "general";
    case Origin::InstanceFact: return "instance";
    case Origin::Intermediate: return "intermediate";
    case Origin::Goal: return "goal";
  }
  return "general";
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  if (!out.empty() && out.back() == '.') {
    out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  return out;
}

std::string to_string(NodeRef ref) {
  return (ref.is_premise() ? "P" : "I") + std::to_string(ref.index);
}

std::pair<NodeRef, NodeRef> canonical_pair(NodeRef a, NodeRef b) {
  if (a == b) throw Error(ErrorKind::SelfPair, "pair of " + to_string(a) + " with itself");
  if (b < a) std::swap(a, b);
  return {a, b};
}

std::optional<std::size_t> ProofInstance::premise_index(std::string_view pid) const {
  for (std::size_t i = 0; i < premises.size(); ++i) {
    if (premises[i].id == pid) return i;
  }
  return std::nullopt;
}

std::optional<std::string> ProofInstance::text_of(std::string_view sid) const {
  if (auto i = premise_index(sid)) return premises[*i].text;
  if (gold_tree) {
    for (const auto& step : gold_tree->steps) {
      if (step.conclusion.id == sid) return step.conclusion.text;
    }
  }
  return std::nullopt;
}

void validate(const ProofInstance& instance) {
  const std::string where = "instance '" + instance.id + "': ";
  if (instance.premises.size() < 2)
    throw Error(ErrorKind::TooFewPremises, where + "needs at least 2 premises");
  if (normalize_text(instance.goal.text).empty())
    throw Error(ErrorKind::InvalidArgument, where + "goal text is empty");

  std::unordered_set<std::string> ids;
  for (const auto& p : instance.premises) {
    if (normalize_text(p.text).empty())
      throw Error(ErrorKind::InvalidArgument, where + "premise '" + p.id + "' has empty text");
    if (!ids.insert(p.id).second)
      throw Error(ErrorKind::InvalidArgument, where + "duplicate id '" + p.id + "'");
  }
  if (!instance.gold_tree) return;

  // Each conclusion may be consumed at most once, which keeps the gold proof a tree.
  std::unordered_set<std::string> consumed;
  for (std::size_t s = 0; s < instance.gold_tree->steps.size(); ++s) {
    const auto& step = instance.gold_tree->steps[s];
    for (const auto* child : {&step.left_id, &step.right_id}) {
      if (!ids.contains(*child))
        throw Error(ErrorKind::DanglingReference,
                    where + "step " + std::to_string(s) + " cites unknown id '" + *child + "'");
    }
    if (step.left_id == step.right_id)
      throw Error(ErrorKind::SelfPair, where + "step " + std::to_string(s) + " pairs a node with itself");
    for (const auto* child : {&step.left_id, &step.right_id}) {
      if (!instance.premise_index(*child) && !consumed.insert(*child).second)
        throw Error(ErrorKind::InvalidArgument,
                    where + "intermediate '" + *child + "' is used by more than one step");
    }
    if (!ids.insert(step.conclusion.id).second)
      throw Error(ErrorKind::InvalidArgument,
                  where + "duplicate conclusion id '" + step.conclusion.id + "'");
  }
  if (!instance.gold_tree->root_id.empty() && !ids.contains(instance.gold_tree->root_id))
    throw Error(ErrorKind::DanglingReference, where + "root id '" + instance.gold_tree->root_id + "' is unknown");
}

}  // namespace dap
