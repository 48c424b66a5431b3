#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dap {

enum class ErrorKind {
  DimensionMismatch,
  ZeroVector,
  NonFinite,
  SelfPair,
  InvalidArgument,
  MissingEmbedding,
  RemoteFailure,
  UnknownConcept,
  IndexNotBuilt,
  UnknownDoc,
  UnknownTripleStrict,
  EncodingFailure,
  StepModelFailure,
  EntailmentFailure,
  NodeNotFound,
  EmptyBatch,
  NoTriplets,
  TooFewPremises,
  EmptyDataset,
  MissingVariants,
  ParseError,
  DanglingReference,
  NoGoldTree,
  UnknownCategory,
  UnknownPerturbation,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dap
