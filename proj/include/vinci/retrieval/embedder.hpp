#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vinci/common/remote.hpp"
#include "vinci/retrieval/vector_index.hpp"

namespace vinci::retrieval {

/// Query-side text encoder.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::vector<float> embed_text(std::string_view query) = 0;
  virtual std::size_t dim() const = 0;
};

/// Signed feature hashing of lowercased word tokens, L2-normalized.
/// Stop words are skipped so "cut a tomato" and "cut tomato" collide.
class HashingTextEmbedder final : public TextEmbedder {
 public:
  static constexpr std::size_t kDefaultDim = 64;

  explicit HashingTextEmbedder(std::size_t dim = kDefaultDim);
  std::vector<float> embed_text(std::string_view query) override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
};

/// Demo-video side of the mock pair: embeds a video through its caption with
/// the same hashing as HashingTextEmbedder, so a query equal to a caption
/// scores cosine 1 against that video.
class CaptionVideoEmbedder {
 public:
  explicit CaptionVideoEmbedder(std::size_t dim = HashingTextEmbedder::kDefaultDim) : text_(dim) {}
  EmbeddingRecord embed(std::uint64_t id, std::string uri, std::string caption);

 private:
  HashingTextEmbedder text_;
};

/// Request {"text"} -> reply {"vector": [...]}.
class HttpTextEmbedder final : public TextEmbedder {
 public:
  HttpTextEmbedder(RemoteEndpoint endpoint, std::size_t dim) : endpoint_(std::move(endpoint)), dim_(dim) {}
  std::vector<float> embed_text(std::string_view query) override;
  std::size_t dim() const override { return dim_; }

 private:
  RemoteEndpoint endpoint_;
  std::size_t dim_;
};

}  // namespace vinci::retrieval
