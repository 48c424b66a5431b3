#include "dap/encoders.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>

#include <json.hpp>

#include "dap/bm25.hpp"

namespace dap {

using nlohmann::json;

namespace {

void require_text(std::string_view text) {
  if (normalize_text(text).empty()) throw Error(ErrorKind::InvalidArgument, "cannot encode empty text");
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Vector vector_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw Error(ErrorKind::ParseError, where + ": vector must be a nonempty array");
  std::vector<double> values;
  values.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) throw Error(ErrorKind::ParseError, where + ": vector entries must be numbers");
    values.push_back(x.get<double>());
  }
  try {
    return Vector(std::move(values));
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, where + ": " + e.what());
  }
}

}  // namespace

std::vector<Vector> Encoder::encode_batch(std::span<const std::string> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(encode(texts[i]));
    } catch (const Error& e) {
      throw BatchItemError(i, e);
    }
  }
  return out;
}

std::vector<EmbeddingRecord> read_embedding_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read embedding file " + path);
  std::vector<EmbeddingRecord> records;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    auto rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) throw Error(ErrorKind::ParseError, where + ": not a JSON object");
    if (!rec.contains("text") || !rec["text"].is_string())
      throw Error(ErrorKind::ParseError, where + ": missing string field 'text'");
    if (!rec.contains("vector")) throw Error(ErrorKind::ParseError, where + ": missing field 'vector'");
    Vector v = vector_from_json(rec["vector"], where);
    if (dim == 0) dim = v.dim();
    if (v.dim() != dim)
      throw Error(ErrorKind::ParseError, where + ": dimension " + std::to_string(v.dim()) +
                                             " differs from first record's " + std::to_string(dim));
    records.push_back({normalize_text(rec["text"].get<std::string>()), std::move(v)});
  }
  return records;
}

void write_embedding_records(std::ostream& os, std::span<const std::string> texts, std::span<const Vector> vectors) {
  if (texts.size() != vectors.size())
    throw Error(ErrorKind::InvalidArgument, "texts and vectors differ in length");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    json rec;
    rec["text"] = texts[i];
    rec["vector"] = vectors[i].raw();
    os << rec.dump() << '\n';
  }
}

FileLookupEncoder::FileLookupEncoder(std::vector<EmbeddingRecord> records, Mode mode) : mode_(mode) {
  for (auto& rec : records) {
    if (dim_ == 0) dim_ = rec.vector.dim();
    if (rec.vector.dim() != dim_)
      throw Error(ErrorKind::DimensionMismatch, "embedding records of mixed dimension");
    auto [it, inserted] = table_.try_emplace(rec.key, rec.vector);
    if (!inserted && !(it->second == rec.vector))
      throw Error(ErrorKind::ParseError, "conflicting vectors for key '" + rec.key + "'");
  }
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "embedding table is empty");
}

std::shared_ptr<FileLookupEncoder> FileLookupEncoder::from_file(const std::string& path, Mode mode) {
  return std::make_shared<FileLookupEncoder>(read_embedding_file(path), mode);
}

bool FileLookupEncoder::contains(std::string_view text) const { return table_.contains(normalize_text(text)); }

Vector FileLookupEncoder::encode(std::string_view text) const {
  require_text(text);
  const std::string key = normalize_text(text);
  if (auto it = table_.find(key); it != table_.end()) return it->second;
  if (mode_ == Mode::Strict) throw Error(ErrorKind::MissingEmbedding, "no embedding for '" + key + "'");
  ++fallbacks_;
  return hashed_vector(key, dim_);
}

std::string FileLookupEncoder::describe() const {
  return std::string("file-lookup(") + (mode_ == Mode::Strict ? "strict" : "passthrough") +
         ", dim=" + std::to_string(dim_) + ", records=" + std::to_string(table_.size()) + ")";
}

Vector hashed_vector(std::string_view normalized_key, std::size_t dim) {
  std::mt19937_64 rng(fnv1a(normalized_key));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = gauss(rng);
  return Vector(std::move(v));
}

SyntheticAdditiveEncoder::SyntheticAdditiveEncoder(std::vector<std::string> lexicon) : lexicon_(std::move(lexicon)) {
  if (lexicon_.empty()) throw Error(ErrorKind::InvalidArgument, "synthetic lexicon is empty");
  for (std::size_t i = 0; i < lexicon_.size(); ++i) {
    if (!axis_.try_emplace(lexicon_[i], i).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate lexicon token '" + lexicon_[i] + "'");
  }
}

std::shared_ptr<SyntheticAdditiveEncoder> SyntheticAdditiveEncoder::from_texts(std::span<const std::string> texts) {
  std::set<std::string> tokens;
  for (const auto& t : texts) {
    for (auto& tok : tokenize(t)) tokens.insert(std::move(tok));
  }
  return std::make_shared<SyntheticAdditiveEncoder>(std::vector<std::string>(tokens.begin(), tokens.end()));
}

Vector SyntheticAdditiveEncoder::synthetic_encode(const std::set<std::string>& concepts) const {
  std::vector<double> v(lexicon_.size(), 0.0);
  for (const auto& c : concepts) {
    auto it = axis_.find(c);
    if (it == axis_.end()) throw Error(ErrorKind::UnknownConcept, "'" + c + "' is not in the lexicon");
    v[it->second] += 1.0;
  }
  return Vector(std::move(v));
}

Vector SyntheticAdditiveEncoder::encode(std::string_view text) const {
  require_text(text);
  auto tokens = tokenize(text);
  return synthetic_encode(std::set<std::string>(tokens.begin(), tokens.end()));
}

std::string SyntheticAdditiveEncoder::describe() const {
  return "synthetic-additive(dim=" + std::to_string(lexicon_.size()) + ")";
}

RemoteEncoder::RemoteEncoder(RemoteConfig config, std::size_t batch_size)
    : endpoint_(std::move(config)), batch_size_(std::max<std::size_t>(1, batch_size)) {}

Vector RemoteEncoder::encode(std::string_view text) const {
  const std::string t(text);
  return encode_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<Vector> RemoteEncoder::encode_batch(std::span<const std::string> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const std::size_t end = std::min(texts.size(), start + batch_size_);
    json body;
    body["texts"] = json::array();
    for (std::size_t i = start; i < end; ++i) {
      try {
        require_text(texts[i]);
      } catch (const Error& e) {
        throw BatchItemError(i, e);
      }
      body["texts"].push_back(texts[i]);
    }
    const json resp = endpoint_.post(body);
    if (!resp.contains("vectors") || !resp["vectors"].is_array() || resp["vectors"].size() != end - start)
      throw Error(ErrorKind::RemoteFailure, endpoint_.config().url + ": response must carry one vector per text");
    for (std::size_t i = start; i < end; ++i) {
      Vector v = [&] {
        try {
          return vector_from_json(resp["vectors"][i - start], endpoint_.config().url);
        } catch (const Error& e) {
          throw Error(ErrorKind::RemoteFailure, e.what());
        }
      }();
      std::size_t expected = 0;
      dim_.compare_exchange_strong(expected, v.dim());
      if (v.dim() != dim_.load())
        throw Error(ErrorKind::RemoteFailure, endpoint_.config().url + ": inconsistent vector dimension");
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::string RemoteEncoder::describe() const { return "remote(" + endpoint_.config().url + ")"; }

ProjectedEncoder::ProjectedEncoder(EncoderPtr inner, ProjectionHead head)
    : inner_(std::move(inner)), head_(std::move(head)) {
  if (!inner_) throw Error(ErrorKind::InvalidArgument, "projected encoder needs an inner encoder");
  if (inner_->dim() != 0 && inner_->dim() != head_.dim())
    throw Error(ErrorKind::DimensionMismatch, "head dim " + std::to_string(head_.dim()) + " vs encoder dim " +
                                                  std::to_string(inner_->dim()));
}

Vector ProjectedEncoder::encode(std::string_view text) const { return head_.forward(inner_->encode(text)); }

std::vector<Vector> ProjectedEncoder::encode_batch(std::span<const std::string> texts) const {
  auto base = inner_->encode_batch(texts);
  for (auto& v : base) v = head_.forward(v);
  return base;
}

std::string ProjectedEncoder::describe() const { return "projected(" + inner_->describe() + ")"; }

CachingEncoder::CachingEncoder(EncoderPtr inner, bool enabled) : inner_(std::move(inner)), enabled_(enabled) {
  if (!inner_) throw Error(ErrorKind::InvalidArgument, "caching encoder needs an inner encoder");
}

std::size_t CachingEncoder::size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

Vector CachingEncoder::encode(std::string_view text) const {
  if (!enabled_) return inner_->encode(text);
  std::string key = normalize_text(text);
  {
    std::shared_lock lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  ++misses_;
  Vector v = inner_->encode(text);
  std::unique_lock lock(mu_);
  return cache_.try_emplace(std::move(key), std::move(v)).first->second;
}

std::vector<Vector> CachingEncoder::encode_batch(std::span<const std::string> texts) const {
  if (!enabled_) return inner_->encode_batch(texts);
  std::vector<std::string> keys(texts.size());
  std::vector<std::optional<Vector>> found(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> missing_origin;
  std::unordered_map<std::string, std::size_t> missing_slot;
  {
    std::shared_lock lock(mu_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      keys[i] = normalize_text(texts[i]);
      if (auto it = cache_.find(keys[i]); it != cache_.end()) {
        found[i] = it->second;
        ++hits_;
      } else if (missing_slot.try_emplace(keys[i], missing.size()).second) {
        missing.push_back(texts[i]);
        missing_origin.push_back(i);
        ++misses_;
      } else {
        ++hits_;
      }
    }
  }
  if (!missing.empty()) {
    std::vector<Vector> fresh;
    try {
      fresh = inner_->encode_batch(missing);
    } catch (const BatchItemError& e) {
      throw BatchItemError(missing_origin.at(e.index()), Error(e.kind(), e.what()));
    }
    std::unique_lock lock(mu_);
    for (std::size_t m = 0; m < missing.size(); ++m) {
      cache_.try_emplace(normalize_text(missing[m]), fresh[m]);
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (!found[i]) found[i] = fresh[missing_slot.at(keys[i])];
    }
  }
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (auto& v : found) out.push_back(std::move(*v));
  return out;
}

std::string CachingEncoder::describe() const { return "cached(" + inner_->describe() + ")"; }

}  // namespace dap
