#pragma once

// VNCI framing, shared by TCP ingest and replay files.
//
//   stream header : "VNCI" 0x01
//   chunk         : kind u8 | timestamp_us u64 LE | kind header | payload_len u32 LE | payload
//   video header  : width u32 LE, height u32 LE   (payload = width*height*3 RGB bytes)
//   audio header  : sample_rate u32 LE            (payload = i16 LE mono samples)
//   text          : no kind header                (payload = UTF-8)

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "vinci/media/types.hpp"

namespace vinci::media {

inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::uint8_t kKindVideo = 0x01;
inline constexpr std::uint8_t kKindAudio = 0x02;
inline constexpr std::uint8_t kKindText = 0x03;
inline constexpr std::size_t kStreamHeaderSize = 5;
/// Upper bound on a single payload; larger declarations are treated as corrupt.
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

struct Decoded {
  Chunk chunk;
  std::size_t consumed = 0;
};

std::vector<std::uint8_t> encode_stream_header();
/// Throws MalformedChunk unless `bytes` starts with a valid stream header.
void check_stream_header(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_chunk(const Chunk& chunk);
void append_chunk(std::vector<std::uint8_t>& out, const Chunk& chunk);

/// Decodes exactly one chunk starting at bytes[0]. Throws MalformedChunk on
/// bad kind, truncated data, inconsistent lengths, or invalid UTF-8 text.
Decoded decode_chunk(std::span<const std::uint8_t> bytes);

/// Incremental decoder for a byte stream that arrives in arbitrary pieces
/// (TCP reads). Expects the stream header first.
class StreamDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete chunk, or nullopt if more bytes are needed.
  std::optional<Chunk> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::optional<std::size_t> complete_chunk_size() const;

  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
  bool header_seen_ = false;
};

std::vector<Chunk> read_stream_file(const std::filesystem::path& path);
void write_stream_file(const std::filesystem::path& path, std::span<const Chunk> chunks);

}  // namespace vinci::media
