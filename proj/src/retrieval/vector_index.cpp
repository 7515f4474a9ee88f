#include "vinci/retrieval/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"

namespace vinci::retrieval {

namespace {

constexpr std::uint8_t kIndexVersion = 1;

double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const std::string& in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(in[at + static_cast<std::size_t>(i)]);
  return v;
}

}  // namespace

VectorIndex VectorIndex::build(std::span<const EmbeddingRecord> records) {
  if (records.empty()) fail(ErrorCode::EmptyInput, "cannot build an index from zero records");
  const std::size_t dim = records.front().vector.size();
  if (dim == 0) fail(ErrorCode::DimensionMismatch, "zero-dimensional vectors");

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });

  VectorIndex index;
  index.dim_ = dim;
  index.entries_.reserve(records.size());
  index.vectors_.reserve(records.size() * dim);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = records[order[k]];
    if (k > 0 && records[order[k - 1]].id == r.id) {
      fail(ErrorCode::DuplicateId, "duplicate id " + std::to_string(r.id));
    }
    if (r.vector.size() != dim) {
      fail(ErrorCode::DimensionMismatch, "record " + std::to_string(r.id) + " has dim " +
                                             std::to_string(r.vector.size()) + ", expected " + std::to_string(dim));
    }
    for (float x : r.vector) {
      if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "record " + std::to_string(r.id) + " has a non-finite value");
    }
    const double norm = l2_norm(r.vector);
    if (norm == 0.0) fail(ErrorCode::ZeroVector, "record " + std::to_string(r.id) + " is the zero vector");
    for (float x : r.vector) index.vectors_.push_back(static_cast<double>(x) / norm);
    index.entries_.push_back({r.id, r.uri, r.caption});
  }
  return index;
}

const VectorIndex::Entry* VectorIndex::find(std::uint64_t id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Entry& e, std::uint64_t v) { return e.id < v; });
  return it != entries_.end() && it->id == id ? &*it : nullptr;
}

std::vector<double> VectorIndex::normalized_query(std::span<const float> query) const {
  if (query.size() != dim_) {
    fail(ErrorCode::DimensionMismatch,
         "query dim " + std::to_string(query.size()) + " does not match index dim " + std::to_string(dim_));
  }
  const double norm = l2_norm(query);
  if (norm == 0.0 || !std::isfinite(norm)) fail(ErrorCode::ZeroVector, "query vector has zero or non-finite norm");
  std::vector<double> q(dim_);
  for (std::size_t i = 0; i < dim_; ++i) q[i] = static_cast<double>(query[i]) / norm;
  return q;
}

std::vector<ScoredId> VectorIndex::score_all(std::span<const float> query) const {
  const auto q = normalized_query(query);
  std::vector<ScoredId> scored(entries_.size());
  for (std::size_t row = 0; row < entries_.size(); ++row) {
    const double* v = vectors_.data() + row * dim_;
    double dot = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) dot += v[i] * q[i];
    scored[row] = {entries_[row].id, std::clamp(dot, -1.0, 1.0)};
  }
  return scored;
}

std::vector<ScoredId> VectorIndex::top_k(std::span<const float> query, std::size_t k) const {
  require(k >= 1, "k must be >= 1");
  auto scored = score_all(query);
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), ranks_before);
  scored.resize(n);
  return scored;
}

std::size_t VectorIndex::rank_of(std::span<const float> query, std::uint64_t id) const {
  auto scored = score_all(query);
  auto self = std::find_if(scored.begin(), scored.end(), [&](const ScoredId& s) { return s.id == id; });
  if (self == scored.end()) fail(ErrorCode::PreconditionViolation, "id " + std::to_string(id) + " not in index");
  const ScoredId target = *self;
  return 1 + static_cast<std::size_t>(
                 std::count_if(scored.begin(), scored.end(), [&](const ScoredId& s) { return ranks_before(s, target); }));
}

std::filesystem::path VectorIndex::sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void VectorIndex::save(const std::filesystem::path& path) const {
  std::string out = "VIDX";
  out.push_back(static_cast<char>(kIndexVersion));
  put_le(out, dim_, 4);
  put_le(out, entries_.size(), 4);
  for (std::size_t row = 0; row < entries_.size(); ++row) {
    put_le(out, entries_[row].id, 8);
    for (std::size_t i = 0; i < dim_; ++i) {
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(vectors_[row * dim_ + i])), 4);
    }
  }
  write_file(path, out);

  nlohmann::json meta = nlohmann::json::object();
  for (const auto& e : entries_) meta[std::to_string(e.id)] = {{"uri", e.uri}, {"caption", e.caption}};
  write_file(sidecar_path(path), meta.dump(2) + "\n");
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  const std::string in = read_file(path);
  if (in.size() < 13 || in.compare(0, 4, "VIDX") != 0) fail(ErrorCode::SchemaViolation, "not a VIDX file");
  if (static_cast<std::uint8_t>(in[4]) != kIndexVersion) fail(ErrorCode::SchemaViolation, "unsupported VIDX version");
  const auto dim = static_cast<std::size_t>(get_le(in, 5, 4));
  const auto count = static_cast<std::size_t>(get_le(in, 9, 4));
  const std::size_t record_size = 8 + 4 * dim;
  if (dim == 0 || in.size() != 13 + count * record_size) fail(ErrorCode::SchemaViolation, "VIDX size mismatch");

  nlohmann::json meta = nlohmann::json::object();
  if (std::filesystem::exists(sidecar_path(path))) {
    try {
      meta = nlohmann::json::parse(read_file(sidecar_path(path)));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::SchemaViolation, std::string("index sidecar: ") + e.what());
    }
  }

  std::vector<EmbeddingRecord> records(count);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t at = 13 + r * record_size;
    records[r].id = get_le(in, at, 8);
    records[r].vector.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      records[r].vector[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(in, at + 8 + 4 * i, 4)));
    }
    if (auto it = meta.find(std::to_string(records[r].id)); it != meta.end()) {
      records[r].uri = it->value("uri", "");
      records[r].caption = it->value("caption", "");
    }
  }
  return build(records);
}

std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path) {
  std::vector<EmbeddingRecord> out;
  for (const auto& r : read_json_lines(path)) {
    try {
      out.push_back({r.at("id").get<std::uint64_t>(), r.at("vector").get<std::vector<float>>(),
                     r.value("uri", ""), r.value("caption", "")});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::SchemaViolation, std::string("embedding record: ") + e.what());
    }
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records) {
  std::vector<nlohmann::json> out;
  for (const auto& r : records) {
    out.push_back({{"id", r.id}, {"vector", r.vector}, {"uri", r.uri}, {"caption", r.caption}});
  }
  write_json_lines(path, out);
}

}  // namespace vinci::retrieval
