#include "dap/bm25.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace dap {

namespace {

constexpr const char* kIndexMagic = "dap-bm25-index";
constexpr int kIndexVersion = 1;

}  // namespace

TokenStream tokenize(std::string_view text) {
  TokenStream out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Bm25Index::Bm25Index(Bm25Params params) : params_(params) {
  if (!(params_.k1 >= 0.0) || !(params_.b >= 0.0 && params_.b <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "BM25 requires k1 >= 0 and b in [0,1]");
}

Bm25Index Bm25Index::from_documents(std::span<const std::string> docs, Bm25Params params) {
  Bm25Index index(params);
  for (const auto& d : docs) index.add_document(d);
  index.build();
  return index;
}

std::size_t Bm25Index::add_document(std::string_view text) { return add_tokens(tokenize(text)); }

std::size_t Bm25Index::add_tokens(const TokenStream& tokens) {
  built_ = false;
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& tok : tokens) {
    if (tok.empty()) continue;
    auto [it, inserted] = term_ids_.try_emplace(tok, static_cast<std::uint32_t>(terms_.size()));
    if (inserted) {
      terms_.push_back(tok);
      postings_.emplace_back();
    }
    ++counts[it->second];
  }
  const auto doc = static_cast<std::uint32_t>(doc_len_.size());
  std::vector<TermFreq> fwd;
  fwd.reserve(counts.size());
  std::size_t len = 0;
  for (auto [term, tf] : counts) {
    fwd.push_back({term, tf});
    postings_[term].push_back({doc, tf});  // doc ids grow, so postings stay sorted
    len += tf;
  }
  forward_.push_back(std::move(fwd));
  doc_len_.push_back(len);
  return doc;
}

void Bm25Index::build() {
  if (doc_len_.empty()) throw Error(ErrorKind::InvalidArgument, "cannot build a BM25 index with no documents");
  double total = 0.0;
  for (auto len : doc_len_) total += static_cast<double>(len);
  avgdl_ = total / static_cast<double>(doc_len_.size());
  built_ = true;
}

void Bm25Index::require_built() const {
  if (!built_) throw Error(ErrorKind::IndexNotBuilt, "BM25 index has not been built");
}

std::size_t Bm25Index::doc_length(std::size_t doc) const {
  if (doc >= doc_len_.size()) throw Error(ErrorKind::UnknownDoc, "doc " + std::to_string(doc));
  return doc_len_[doc];
}

double Bm25Index::avgdl() const {
  require_built();
  return avgdl_;
}

std::int64_t Bm25Index::term_id(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  return it == term_ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::size_t Bm25Index::df(std::string_view term) const {
  const auto id = term_id(term);
  return id < 0 ? 0 : postings_[static_cast<std::size_t>(id)].size();
}

double Bm25Index::idf_from_df(std::size_t df) const {
  const double n = static_cast<double>(doc_len_.size());
  const double d = static_cast<double>(df);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

double Bm25Index::idf(std::string_view term) const {
  require_built();
  return idf_from_df(df(term));
}

std::size_t Bm25Index::tf(std::string_view term, std::size_t doc) const {
  if (doc >= forward_.size()) throw Error(ErrorKind::UnknownDoc, "doc " + std::to_string(doc));
  const auto id = term_id(term);
  if (id < 0) return 0;
  const auto& fwd = forward_[doc];
  auto it = std::lower_bound(fwd.begin(), fwd.end(), static_cast<std::uint32_t>(id),
                             [](const TermFreq& tf, std::uint32_t t) { return tf.term < t; });
  return (it != fwd.end() && it->term == id) ? it->tf : 0;
}

std::vector<Bm25Index::QueryTerm> Bm25Index::resolve(const TokenStream& query) const {
  std::vector<QueryTerm> out;
  out.reserve(query.size());
  for (const auto& tok : query) {
    const auto id = term_id(tok);
    out.push_back({id, id < 0 ? 0.0 : idf_from_df(postings_[static_cast<std::size_t>(id)].size())});
  }
  return out;
}

double Bm25Index::score_resolved(const std::vector<QueryTerm>& query, std::size_t doc) const {
  const auto& fwd = forward_[doc];
  const double norm = 1.0 - params_.b + params_.b * static_cast<double>(doc_len_[doc]) / avgdl_;
  double total = 0.0;
  for (const auto& q : query) {
    if (q.term < 0) continue;
    auto it = std::lower_bound(fwd.begin(), fwd.end(), static_cast<std::uint32_t>(q.term),
                               [](const TermFreq& tf, std::uint32_t t) { return tf.term < t; });
    if (it == fwd.end() || it->term != q.term) continue;
    const double tf = it->tf;
    total += q.idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
  }
  return total;
}

double Bm25Index::score(const TokenStream& query, std::size_t doc) const {
  require_built();
  if (doc >= doc_len_.size()) throw Error(ErrorKind::UnknownDoc, "doc " + std::to_string(doc));
  return score_resolved(resolve(query), doc);
}

std::vector<double> Bm25Index::score_all_serial(const TokenStream& query) const {
  require_built();
  const auto resolved = resolve(query);
  std::vector<double> out(doc_len_.size());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = score_resolved(resolved, d);
  return out;
}

std::vector<double> Bm25Index::score_all(const TokenStream& query) const {
  require_built();
  const auto resolved = resolve(query);
  const auto n = static_cast<std::int64_t>(doc_len_.size());
  std::vector<double> out(doc_len_.size());
#pragma omp parallel for schedule(static) if (n > 2048)
  for (std::int64_t d = 0; d < n; ++d) out[d] = score_resolved(resolved, static_cast<std::size_t>(d));
  return out;
}

std::vector<ScoredDoc> Bm25Index::top_k(const TokenStream& query, std::size_t k) const {
  require_built();
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "top_k requires k >= 1");
  const auto scores = score_all(query);
  std::vector<ScoredDoc> ranked(scores.size());
  for (std::size_t d = 0; d < scores.size(); ++d) ranked[d] = {d, scores[d]};
  const std::size_t keep = std::min(k, ranked.size());
  auto better = [](const ScoredDoc& a, const ScoredDoc& b) {
    return a.score != b.score ? a.score > b.score : a.doc < b.doc;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
  ranked.resize(keep);
  return ranked;
}

// Format: header line, "params k1 b", "docs N", then one line per document:
// "<length> <distinct_terms> term:tf ...". Postings are rebuilt on load.
void Bm25Index::save(std::ostream& os) const {
  os << kIndexMagic << ' ' << kIndexVersion << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "params " << params_.k1 << ' ' << params_.b << '\n';
  os << "docs " << doc_len_.size() << '\n';
  for (std::size_t d = 0; d < forward_.size(); ++d) {
    os << doc_len_[d] << ' ' << forward_[d].size();
    for (const auto& tf : forward_[d]) os << ' ' << terms_[tf.term] << ':' << tf.tf;
    os << '\n';
  }
}

Bm25Index Bm25Index::load(std::istream& is) {
  auto fail = [](const std::string& why) -> Bm25Index {
    throw Error(ErrorKind::ParseError, "BM25 snapshot: " + why);
  };
  std::string magic, key;
  int version = 0;
  if (!(is >> magic >> version) || magic != kIndexMagic) return fail("bad header");
  if (version != kIndexVersion) return fail("unsupported version " + std::to_string(version));
  Bm25Params params;
  if (!(is >> key >> params.k1 >> params.b) || key != "params") return fail("bad params line");
  std::size_t n = 0;
  if (!(is >> key >> n) || key != "docs") return fail("bad docs line");
  Bm25Index index(params);
  for (std::size_t d = 0; d < n; ++d) {
    std::size_t len = 0, distinct = 0;
    if (!(is >> len >> distinct)) return fail("truncated at doc " + std::to_string(d));
    TokenStream tokens;
    std::size_t total = 0;
    for (std::size_t t = 0; t < distinct; ++t) {
      std::string entry;
      if (!(is >> entry)) return fail("truncated postings at doc " + std::to_string(d));
      const auto colon = entry.rfind(':');
      if (colon == std::string::npos || colon == 0) return fail("bad entry '" + entry + "'");
      const std::size_t tf = std::stoul(entry.substr(colon + 1));
      tokens.insert(tokens.end(), tf, entry.substr(0, colon));
      total += tf;
    }
    if (total != len) return fail("length mismatch at doc " + std::to_string(d));
    index.add_tokens(tokens);
  }
  if (n > 0) index.build();
  return index;
}

void Bm25Index::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  save(os);
}

Bm25Index Bm25Index::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
  return load(is);
}

}  // namespace dap
