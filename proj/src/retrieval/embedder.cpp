#include "vinci/retrieval/embedder.hpp"

#include <cmath>

#include "vinci/common/error.hpp"
#include "vinci/common/text.hpp"

namespace vinci::retrieval {

HashingTextEmbedder::HashingTextEmbedder(std::size_t dim) : dim_(dim) { require(dim >= 1, "embedding dim must be >= 1"); }

std::vector<float> HashingTextEmbedder::embed_text(std::string_view query) {
  require(!text::trim(query).empty(), "query must be nonempty");
  std::vector<double> acc(dim_, 0.0);
  bool any = false;
  for (const auto& token : text::words(query)) {
    if (text::is_stop_word(token)) continue;
    const std::uint64_t h = text::fnv1a(token);
    acc[h % dim_] += (h >> 63) != 0 ? -1.0 : 1.0;
    any = true;
  }
  require(any, "query has no content words");
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  // Colliding tokens with opposite signs can cancel out completely.
  if (norm == 0.0) {
    acc[text::fnv1a(query) % dim_] = 1.0;
    norm = 1.0;
  }
  std::vector<float> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

EmbeddingRecord CaptionVideoEmbedder::embed(std::uint64_t id, std::string uri, std::string caption) {
  EmbeddingRecord r;
  r.id = id;
  r.vector = text_.embed_text(caption);
  r.uri = std::move(uri);
  r.caption = std::move(caption);
  return r;
}

std::vector<float> HttpTextEmbedder::embed_text(std::string_view query) {
  require(!text::trim(query).empty(), "query must be nonempty");
  auto reply = post_json(endpoint_, {{"text", std::string(query)}}, ErrorCode::EncoderUnavailable);
  try {
    auto v = reply.at("vector").get<std::vector<float>>();
    if (v.size() != dim_) fail(ErrorCode::DimensionMismatch, "text encoder returned wrong dimension");
    return v;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::EncoderUnavailable, std::string("malformed encoder reply: ") + e.what());
  }
}

}  // namespace vinci::retrieval
