#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vinci::retrieval {

struct EmbeddingRecord {
  std::uint64_t id = 0;
  std::vector<float> vector;
  std::string uri;
  std::string caption;
};

struct ScoredId {
  std::uint64_t id = 0;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

/// Total order used for ranking: higher cosine first, lower id on ties.
inline bool ranks_before(const ScoredId& a, const ScoredId& b) {
  return a.score != b.score ? a.score > b.score : a.id < b.id;
}

/// Exact (flat) cosine index over unit-normalized vectors. Immutable once
/// built, so any number of threads may query it concurrently.
class VectorIndex {
 public:
  struct Entry {
    std::uint64_t id = 0;
    std::string uri;
    std::string caption;
  };

  static constexpr std::size_t kDefaultK = 3;

  /// Throws EmptyInput, DimensionMismatch, ZeroVector, DuplicateId, NonFinite.
  static VectorIndex build(std::span<const EmbeddingRecord> records);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::span<const double> vector(std::size_t row) const {
    return {vectors_.data() + row * dim_, dim_};
  }
  const Entry* find(std::uint64_t id) const;

  /// The min(k, size()) best records by cosine similarity with `query`,
  /// ordered by ranks_before. Throws DimensionMismatch / ZeroVector.
  std::vector<ScoredId> top_k(std::span<const float> query, std::size_t k = kDefaultK) const;

  /// 1-based position of `id` in the full ranking for `query`.
  std::size_t rank_of(std::span<const float> query, std::uint64_t id) const;

  /// "VIDX" | version u8 | dim u32 | count u32 | (id u64 | dim x f32)*, all LE,
  /// plus a JSON sidecar at `path` + ".json" mapping id -> {uri, caption}.
  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);
  static std::filesystem::path sidecar_path(const std::filesystem::path& path);

 private:
  VectorIndex() = default;
  std::vector<double> normalized_query(std::span<const float> query) const;
  std::vector<ScoredId> score_all(std::span<const float> query) const;

  std::size_t dim_ = 0;
  std::vector<Entry> entries_;   // sorted by id
  std::vector<double> vectors_;  // row-major, unit norm
};

/// JSON-lines {"id", "vector": [...], "uri", "caption"}.
std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records);

}  // namespace vinci::retrieval
