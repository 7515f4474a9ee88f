#include "vinci/media/wire.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"

namespace vinci::media {

Micros from_seconds(double seconds) { return static_cast<Micros>(std::llround(seconds * 1e6)); }

Micros timestamp_of(const Chunk& chunk) {
  return std::visit([](const auto& c) { return c.timestamp_us; }, chunk);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

[[noreturn]] void malformed(const std::string& why) { fail(ErrorCode::MalformedChunk, why); }

bool valid_utf8(std::span<const std::uint8_t> s) {
  std::size_t i = 0;
  while (i < s.size()) {
    std::uint8_t c = s[i];
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    // Overlong encodings, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::size_t kind_header_size(std::uint8_t kind) {
  switch (kind) {
    case kKindVideo: return 8;
    case kKindAudio: return 4;
    case kKindText: return 0;
    default: malformed("unknown kind byte " + std::to_string(kind));
  }
}

constexpr std::size_t kFixedPrefix = 1 + 8;  // kind + timestamp

}  // namespace

std::vector<std::uint8_t> encode_stream_header() { return {'V', 'N', 'C', 'I', kWireVersion}; }

void check_stream_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kStreamHeaderSize) malformed("truncated stream header");
  if (std::memcmp(bytes.data(), "VNCI", 4) != 0) malformed("bad magic");
  if (bytes[4] != kWireVersion) malformed("unsupported version " + std::to_string(bytes[4]));
}

void append_chunk(std::vector<std::uint8_t>& out, const Chunk& chunk) {
  Micros ts = timestamp_of(chunk);
  if (ts < 0) fail(ErrorCode::PreconditionViolation, "negative timestamp");
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TimedFrame>) {
          std::size_t expected = std::size_t{c.width} * c.height * 3;
          if (c.pixels.size() != expected) {
            fail(ErrorCode::PreconditionViolation, "pixel buffer does not match width*height*3");
          }
          if (expected > kMaxPayload) fail(ErrorCode::PreconditionViolation, "frame too large");
          out.push_back(kKindVideo);
          put_u64(out, static_cast<std::uint64_t>(ts));
          put_u32(out, c.width);
          put_u32(out, c.height);
          put_u32(out, static_cast<std::uint32_t>(expected));
          out.insert(out.end(), c.pixels.begin(), c.pixels.end());
        } else if constexpr (std::is_same_v<T, AudioChunk>) {
          if (c.sample_rate == 0) fail(ErrorCode::PreconditionViolation, "sample_rate must be > 0");
          if (c.samples.size() * 2 > kMaxPayload) fail(ErrorCode::PreconditionViolation, "audio too large");
          out.push_back(kKindAudio);
          put_u64(out, static_cast<std::uint64_t>(ts));
          put_u32(out, c.sample_rate);
          put_u32(out, static_cast<std::uint32_t>(c.samples.size() * 2));
          for (std::int16_t s : c.samples) {
            auto u = static_cast<std::uint16_t>(s);
            out.push_back(static_cast<std::uint8_t>(u & 0xFF));
            out.push_back(static_cast<std::uint8_t>(u >> 8));
          }
        } else {
          if (c.text.size() > kMaxPayload) fail(ErrorCode::PreconditionViolation, "text too large");
          out.push_back(kKindText);
          put_u64(out, static_cast<std::uint64_t>(ts));
          put_u32(out, static_cast<std::uint32_t>(c.text.size()));
          out.insert(out.end(), c.text.begin(), c.text.end());
        }
      },
      chunk);
}

std::vector<std::uint8_t> encode_chunk(const Chunk& chunk) {
  std::vector<std::uint8_t> out;
  append_chunk(out, chunk);
  return out;
}

Decoded decode_chunk(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFixedPrefix) malformed("truncated chunk prefix");
  const std::uint8_t kind = bytes[0];
  const std::size_t header = kind_header_size(kind);
  const std::uint64_t raw_ts = get_u64(bytes, 1);
  if (raw_ts > static_cast<std::uint64_t>(std::numeric_limits<Micros>::max())) {
    malformed("timestamp out of range");
  }
  const auto ts = static_cast<Micros>(raw_ts);
  const std::size_t len_at = kFixedPrefix + header;
  if (bytes.size() < len_at + 4) malformed("truncated chunk header");
  const std::uint32_t payload_len = get_u32(bytes, len_at);
  if (payload_len > kMaxPayload) malformed("payload length exceeds limit");
  const std::size_t payload_at = len_at + 4;
  if (bytes.size() - payload_at < payload_len) {
    malformed("truncated payload: declared " + std::to_string(payload_len) + ", have " +
              std::to_string(bytes.size() - payload_at));
  }
  auto payload = bytes.subspan(payload_at, payload_len);
  const std::size_t consumed = payload_at + payload_len;

  switch (kind) {
    case kKindVideo: {
      TimedFrame f;
      f.timestamp_us = ts;
      f.width = get_u32(bytes, kFixedPrefix);
      f.height = get_u32(bytes, kFixedPrefix + 4);
      if (std::uint64_t{f.width} * f.height * 3 != payload_len) {
        malformed("video payload length does not match width*height*3");
      }
      f.pixels.assign(payload.begin(), payload.end());
      return {std::move(f), consumed};
    }
    case kKindAudio: {
      AudioChunk a;
      a.timestamp_us = ts;
      a.sample_rate = get_u32(bytes, kFixedPrefix);
      if (a.sample_rate == 0) malformed("audio sample_rate is zero");
      if (payload_len % 2 != 0) malformed("odd audio payload length");
      a.samples.resize(payload_len / 2);
      for (std::size_t i = 0; i < a.samples.size(); ++i) {
        auto u = static_cast<std::uint16_t>(payload[2 * i] | (payload[2 * i + 1] << 8));
        a.samples[i] = static_cast<std::int16_t>(u);
      }
      return {std::move(a), consumed};
    }
    default: {
      if (!valid_utf8(payload)) malformed("text payload is not valid UTF-8");
      TextChunk t;
      t.timestamp_us = ts;
      t.text.assign(payload.begin(), payload.end());
      return {std::move(t), consumed};
    }
  }
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ >= buffer_.size() / 2) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<std::size_t> StreamDecoder::complete_chunk_size() const {
  std::span<const std::uint8_t> rest(buffer_.data() + offset_, buffer_.size() - offset_);
  if (rest.empty()) return std::nullopt;
  const std::size_t header = kind_header_size(rest[0]);
  const std::size_t len_at = kFixedPrefix + header;
  if (rest.size() < len_at + 4) return std::nullopt;
  const std::uint32_t payload_len = get_u32(rest, len_at);
  if (payload_len > kMaxPayload) malformed("payload length exceeds limit");
  const std::size_t total = len_at + 4 + payload_len;
  if (rest.size() < total) return std::nullopt;
  return total;
}

std::optional<Chunk> StreamDecoder::next() {
  if (!header_seen_) {
    if (buffered() < kStreamHeaderSize) return std::nullopt;
    check_stream_header(std::span(buffer_.data() + offset_, kStreamHeaderSize));
    offset_ += kStreamHeaderSize;
    header_seen_ = true;
  }
  auto size = complete_chunk_size();
  if (!size) return std::nullopt;
  Decoded d = decode_chunk(std::span(buffer_.data() + offset_, *size));
  offset_ += d.consumed;
  return std::move(d.chunk);
}

std::vector<Chunk> read_stream_file(const std::filesystem::path& path) {
  std::string raw = read_file(path);
  std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
  check_stream_header(bytes);
  bytes = bytes.subspan(kStreamHeaderSize);
  std::vector<Chunk> chunks;
  while (!bytes.empty()) {
    Decoded d = decode_chunk(bytes);
    bytes = bytes.subspan(d.consumed);
    chunks.push_back(std::move(d.chunk));
  }
  return chunks;
}

void write_stream_file(const std::filesystem::path& path, std::span<const Chunk> chunks) {
  std::vector<std::uint8_t> out = encode_stream_header();
  for (const auto& c : chunks) append_chunk(out, c);
  write_file(path, std::string(out.begin(), out.end()));
}

}  // namespace vinci::media
