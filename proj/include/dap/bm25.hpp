#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dap/error.hpp"

namespace dap {

using TokenStream = std::vector<std::string>;

// Lowercase; split on every non-alphanumeric byte; drop empties.
// No stemming and no stopword removal.
TokenStream tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  bool operator==(const Bm25Params&) const = default;
};

struct ScoredDoc {
  std::size_t doc = 0;
  double score = 0.0;
};

// Okapi BM25 over an in-memory corpus with the non-negative "plus one" idf:
//   idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1)
// Documents are appended, then build() freezes the collection statistics.
// After build the index is read-only and safe to query from many threads.
class Bm25Index {
 public:
  explicit Bm25Index(Bm25Params params = {});

  static Bm25Index from_documents(std::span<const std::string> docs, Bm25Params params = {});

  std::size_t add_document(std::string_view text);
  std::size_t add_tokens(const TokenStream& tokens);
  void build();

  bool built() const noexcept { return built_; }
  const Bm25Params& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return doc_len_.size(); }
  std::size_t doc_length(std::size_t doc) const;
  double avgdl() const;
  std::size_t vocabulary_size() const noexcept { return terms_.size(); }

  std::size_t df(std::string_view term) const;
  double idf(std::string_view term) const;
  // tf of `term` in `doc`; 0 when absent.
  std::size_t tf(std::string_view term, std::size_t doc) const;

  // Each query occurrence contributes one summand, so repeated query terms
  // count once per occurrence.
  double score(const TokenStream& query, std::size_t doc) const;

  // Scores of every document, in doc-id order. The parallel version splits
  // documents across OpenMP threads; both evaluate each document with the
  // same operation order, so the results are bitwise identical.
  std::vector<double> score_all(const TokenStream& query) const;
  std::vector<double> score_all_serial(const TokenStream& query) const;

  // Descending score, ties by ascending doc id, length min(k, N).
  std::vector<ScoredDoc> top_k(const TokenStream& query, std::size_t k) const;

  void save(std::ostream& os) const;
  static Bm25Index load(std::istream& is);
  void save(const std::string& path) const;
  static Bm25Index load(const std::string& path);

 private:
  struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;
  };
  struct TermFreq {
    std::uint32_t term;
    std::uint32_t tf;
  };
  struct QueryTerm {
    std::int64_t term;  // -1 when out of vocabulary
    double idf;
  };

  void require_built() const;
  std::int64_t term_id(std::string_view term) const;
  std::vector<QueryTerm> resolve(const TokenStream& query) const;
  double score_resolved(const std::vector<QueryTerm>& query, std::size_t doc) const;
  double idf_from_df(std::size_t df) const;

  Bm25Params params_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<std::string> terms_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<std::vector<TermFreq>> forward_;
  std::vector<std::size_t> doc_len_;
  double avgdl_ = 0.0;
  bool built_ = false;
};

}  // namespace dap
