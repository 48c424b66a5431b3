#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dap/core.hpp"
#include "dap/projection_head.hpp"
#include "dap/remote.hpp"

namespace dap {

// Raised by encode_batch for the first failing item; keeps the item's kind.
class BatchItemError : public Error {
 public:
  BatchItemError(std::size_t index, const Error& cause)
      : Error(cause.kind(), "batch item " + std::to_string(index) + ": " + cause.what()), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Sentence encoder E. Implementations are safe to call concurrently.
class Encoder {
 public:
  virtual ~Encoder() = default;

  // 0 when the dimension is not yet known (remote backends before first call).
  virtual std::size_t dim() const = 0;
  virtual Vector encode(std::string_view text) const = 0;
  // Order-preserving; the default forwards to encode() item by item.
  virtual std::vector<Vector> encode_batch(std::span<const std::string> texts) const;
  virtual std::string describe() const = 0;
};

using EncoderPtr = std::shared_ptr<const Encoder>;

struct EmbeddingRecord {
  std::string key;  // normalize_text(text)
  Vector vector;
};

// Newline-delimited {"text": ..., "vector": [...]} records.
std::vector<EmbeddingRecord> read_embedding_file(const std::string& path);
void write_embedding_records(std::ostream& os, std::span<const std::string> texts, std::span<const Vector> vectors);

class FileLookupEncoder final : public Encoder {
 public:
  enum class Mode { Strict, Passthrough };

  FileLookupEncoder(std::vector<EmbeddingRecord> records, Mode mode = Mode::Strict);
  static std::shared_ptr<FileLookupEncoder> from_file(const std::string& path, Mode mode = Mode::Strict);

  std::size_t dim() const override { return dim_; }
  Vector encode(std::string_view text) const override;
  std::string describe() const override;

  std::size_t size() const noexcept { return table_.size(); }
  bool contains(std::string_view text) const;
  std::size_t fallbacks() const noexcept { return fallbacks_.load(); }

 private:
  std::unordered_map<std::string, Vector> table_;
  std::size_t dim_ = 0;
  Mode mode_;
  mutable std::atomic<std::size_t> fallbacks_{0};
};

// Deterministic pseudo-random vector keyed by the normalized text; the
// passthrough fallback for keys missing from an embedding file.
Vector hashed_vector(std::string_view normalized_key, std::size_t dim);

// Each lexicon token owns one basis axis; a text encodes to the sum of the
// axes of its (deduplicated) tokens, so E(A u B) = E(A) + E(B) for disjoint
// concept sets.
class SyntheticAdditiveEncoder final : public Encoder {
 public:
  explicit SyntheticAdditiveEncoder(std::vector<std::string> lexicon);
  // Lexicon = sorted distinct tokens of the texts.
  static std::shared_ptr<SyntheticAdditiveEncoder> from_texts(std::span<const std::string> texts);

  std::size_t dim() const override { return lexicon_.size(); }
  Vector encode(std::string_view text) const override;
  std::string describe() const override;

  Vector synthetic_encode(const std::set<std::string>& concepts) const;
  const std::vector<std::string>& lexicon() const noexcept { return lexicon_; }

 private:
  std::vector<std::string> lexicon_;
  std::unordered_map<std::string, std::size_t> axis_;
};

// Client for the remote embedding service:
//   POST {"texts": [...]} -> {"vectors": [[...], ...]}
class RemoteEncoder final : public Encoder {
 public:
  explicit RemoteEncoder(RemoteConfig config, std::size_t batch_size = 64);

  std::size_t dim() const override { return dim_.load(); }
  Vector encode(std::string_view text) const override;
  std::vector<Vector> encode_batch(std::span<const std::string> texts) const override;
  std::string describe() const override;

 private:
  JsonEndpoint endpoint_;
  std::size_t batch_size_;
  mutable std::atomic<std::size_t> dim_{0};
};

// Inner encoder followed by a trained projection head.
class ProjectedEncoder final : public Encoder {
 public:
  ProjectedEncoder(EncoderPtr inner, ProjectionHead head);

  std::size_t dim() const override { return head_.dim(); }
  Vector encode(std::string_view text) const override;
  std::vector<Vector> encode_batch(std::span<const std::string> texts) const override;
  std::string describe() const override;

  const ProjectionHead& head() const noexcept { return head_; }
  const EncoderPtr& inner() const noexcept { return inner_; }

 private:
  EncoderPtr inner_;
  ProjectionHead head_;
};

// Memoizes an encoder by normalized text. Internally synchronized.
class CachingEncoder final : public Encoder {
 public:
  explicit CachingEncoder(EncoderPtr inner, bool enabled = true);

  std::size_t dim() const override { return inner_->dim(); }
  Vector encode(std::string_view text) const override;
  std::vector<Vector> encode_batch(std::span<const std::string> texts) const override;
  std::string describe() const override;

  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }
  std::size_t size() const;
  // Warms the cache, e.g. with the initial premise pool.
  void prime(std::span<const std::string> texts) const { (void)encode_batch(texts); }

 private:
  EncoderPtr inner_;
  bool enabled_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, Vector> cache_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

}  // namespace dap
