#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "vinci/common/error.hpp"
#include "vinci/media/frame_buffer.hpp"
#include "vinci/media/wire.hpp"

using namespace vinci;
using namespace vinci::media;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::Io;
}

TimedFrame frame_at(double t, std::uint32_t w = 2, std::uint32_t h = 2) {
  TimedFrame f;
  f.timestamp_us = from_seconds(t);
  f.width = w;
  f.height = h;
  f.pixels.assign(std::size_t{w} * h * 3, 7);
  return f;
}


}  // namespace

TEST(Wire, DecodesVideoChunk) {
  std::vector<std::uint8_t> bytes = {kKindVideo, 0x40, 0x42, 0x0f, 0, 0, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 12, 0, 0, 0};
  for (int i = 0; i < 12; ++i) bytes.push_back(static_cast<std::uint8_t>(i));
  auto d = decode_chunk(bytes);
  EXPECT_EQ(d.consumed, bytes.size());
  const auto& f = std::get<TimedFrame>(d.chunk);
  EXPECT_DOUBLE_EQ(f.seconds(), 1.0);
  EXPECT_EQ(f.width, 2u);
  EXPECT_EQ(f.height, 2u);
  EXPECT_EQ(f.pixels.size(), 12u);
}

TEST(Wire, DecodesAudioDuration) {
  AudioChunk a;
  a.sample_rate = 16000;
  a.samples.assign(3200, 1);
  auto d = decode_chunk(encode_chunk(a));
  EXPECT_DOUBLE_EQ(std::get<AudioChunk>(d.chunk).duration(), 0.2);
}

TEST(Wire, TruncatedPayloadIsMalformed) {
  auto bytes = encode_chunk(frame_at(0.0));
  bytes.resize(bytes.size() - 4);
  EXPECT_EQ(code_of([&] { decode_chunk(bytes); }), ErrorCode::MalformedChunk);
}

TEST(Wire, RejectsUnknownKindAndBadLengths) {
  auto bytes = encode_chunk(TextChunk{0, "x"});
  bytes[0] = 0x09;
  EXPECT_EQ(code_of([&] { decode_chunk(bytes); }), ErrorCode::MalformedChunk);

  auto video = encode_chunk(frame_at(0.0));
  video[17] = 11;  // payload_len no longer w*h*3
  EXPECT_EQ(code_of([&] { decode_chunk(video); }), ErrorCode::MalformedChunk);

  auto text = encode_chunk(TextChunk{0, "ab"});
  text.back() = 0xff;
  EXPECT_EQ(code_of([&] { decode_chunk(text); }), ErrorCode::MalformedChunk);
}

TEST(Wire, StreamHeader) {
  EXPECT_NO_THROW(check_stream_header(encode_stream_header()));
  std::vector<std::uint8_t> bad = {'V', 'N', 'C', 'X', 1};
  EXPECT_EQ(code_of([&] { check_stream_header(bad); }), ErrorCode::MalformedChunk);
}

TEST(Wire, RoundTripsRandomChunks) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const auto c = fixtures::random_chunk(rng);
    const auto bytes = encode_chunk(c);
    const auto d = decode_chunk(bytes);
    ASSERT_EQ(d.chunk, c);
    ASSERT_EQ(d.consumed, bytes.size());
  }
}

TEST(Wire, FuzzedGarbageYieldsTypedErrors) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10000; ++i) {
    auto bytes = encode_chunk(fixtures::random_chunk(rng));
    switch (i % 3) {
      case 0:
        bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        break;
      case 1:
        bytes.resize(rng() % bytes.size());
        break;
      default:
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    }
    try {
      decode_chunk(bytes);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::MalformedChunk);
    }
  }
}

TEST(Wire, StreamDecoderHandlesArbitrarySplits) {
  std::mt19937_64 rng(13);
  std::vector<Chunk> chunks;
  auto bytes = encode_stream_header();
  for (int i = 0; i < 200; ++i) {
    chunks.push_back(fixtures::random_chunk(rng));
    append_chunk(bytes, chunks.back());
  }
  StreamDecoder decoder;
  std::vector<Chunk> out;
  std::size_t at = 0;
  while (at < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(1 + rng() % 97, bytes.size() - at);
    decoder.feed(std::span(bytes).subspan(at, n));
    at += n;
    while (auto c = decoder.next()) out.push_back(*c);
  }
  EXPECT_EQ(out, chunks);
  EXPECT_EQ(decoder.buffered(), 0u);
}

TEST(Wire, StreamFileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "vinci_wire_test.vnci";
  std::vector<Chunk> chunks = {frame_at(0.0), AudioChunk{10, 16000, {1, 2, 3}}, TextChunk{20, "hi vinci"}};
  write_stream_file(path, chunks);
  EXPECT_EQ(read_stream_file(path), chunks);
  std::filesystem::remove(path);
}

TEST(FrameBuffer, PushEvictsOutsideWindow) {
  FrameBuffer buffer(2.0);
  EXPECT_EQ(buffer.push(frame_at(0.0)), 0u);
  for (int i = 1; i <= 75; ++i) buffer.push(frame_at(i / 30.0));  // up to 2.5 s
  const auto before = buffer.frames();
  const auto dropped = buffer.push(frame_at(2.533));
  std::size_t expected = 0;
  for (const auto& f : before) expected += f->seconds() < 0.533 ? 1 : 0;
  EXPECT_EQ(dropped, expected);
  EXPECT_GE(buffer.frames().front()->seconds(), 0.533);
}

TEST(FrameBuffer, RejectsNonMonotoneFrames) {
  FrameBuffer buffer(2.0);
  buffer.push(frame_at(1.0));
  EXPECT_EQ(code_of([&] { buffer.push(frame_at(1.0)); }), ErrorCode::NonMonotoneTimestamp);
  EXPECT_EQ(code_of([&] { buffer.push(frame_at(0.5)); }), ErrorCode::NonMonotoneTimestamp);
}

TEST(FrameBuffer, WindowInvariantOnRandomStreams) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const double cap = 0.5 + (rng() % 40) / 10.0;
    FrameBuffer buffer(cap);
    Micros t = 0;
    for (int i = 0; i < 300; ++i) {
      t += 1 + static_cast<Micros>(rng() % 200000);
      TimedFrame f = frame_at(0.0, 1, 1);
      f.timestamp_us = t;
      buffer.push(f);
      ASSERT_LE(*buffer.newest_timestamp() - *buffer.oldest_timestamp(), from_seconds(cap));
    }
  }
}

TEST(Snippet, ThirtyFpsTwoSecondsIsSixtyFrames) {
  FrameBuffer buffer(30.0);
  for (int i = 0; i <= 300; ++i) buffer.push(frame_at(i / 30.0));
  const auto s = buffer.extract_snippet(2.0, 10.0);
  ASSERT_EQ(s.frames.size(), 60u);
  for (const auto& f : s.frames) {
    EXPECT_GT(f->seconds(), 8.0);
    EXPECT_LE(f->seconds(), 10.0);
  }
  EXPECT_TRUE(s.complete);
}

TEST(Snippet, ShortHistoryIsIncomplete) {
  FrameBuffer buffer(30.0);
  for (int i = 0; i <= 30; ++i) buffer.push(frame_at(i / 30.0));
  const auto s = buffer.extract_snippet(2.0, 1.0);
  EXPECT_EQ(s.frames.size(), 31u);
  EXPECT_FALSE(s.complete);
}

TEST(Snippet, EmptyBufferThrows) {
  FrameBuffer buffer(2.0);
  EXPECT_EQ(code_of([&] { buffer.extract_snippet(2.0, 1.0); }), ErrorCode::EmptyBuffer);
}

TEST(Snapshot, ScheduleRule) {
  FrameBuffer buffer(30.0);
  for (int i = 0; i <= 90; ++i) buffer.push(frame_at(i / 10.0));
  auto first = snapshot_schedule(buffer, 4.0, 0.0, 4.1);
  ASSERT_TRUE(first);
  EXPECT_NEAR(first->start, 0.1, 1e-12);
  EXPECT_NEAR(first->end, 4.1, 1e-12);
  EXPECT_FALSE(snapshot_schedule(buffer, 4.0, 0.0, 3.9));
  auto second = snapshot_schedule(buffer, 4.0, 4.1, 8.2);
  ASSERT_TRUE(second);
  EXPECT_NEAR(second->start, 4.2, 1e-12);
  EXPECT_NEAR(second->end, 8.2, 1e-12);
}

TEST(Snapshot, GridEmissionsPartitionTheStream) {
  FrameBuffer buffer(60.0);
  SnapshotScheduler scheduler(4.0);
  std::vector<Micros> seen;
  for (int i = 1; i <= 400; ++i) {
    buffer.push(frame_at(i / 10.0, 1, 1));
    if (auto s = scheduler.poll(buffer, i / 10.0)) {
      for (const auto& f : s->frames) seen.push_back(f->timestamp_us);
    }
  }
  ASSERT_EQ(seen.size(), 400u);
  for (std::size_t i = 1; i < seen.size(); ++i) ASSERT_LT(seen[i - 1], seen[i]);
}

TEST(LabelTrack, HalfOpenSpans) {
  LabelTrack track({{0.0, 4.0, "take", "cup"}, {4.0, 8.0, "put", "cup"}});
  EXPECT_EQ(track.labels_at(0.0).front().verb, "take");
  EXPECT_EQ(track.labels_at(4.0).front().verb, "put");
  EXPECT_TRUE(track.labels_at(8.0).empty());

  const auto path = std::filesystem::temp_directory_path() / "vinci_labels_test.jsonl";
  track.save(path);
  EXPECT_EQ(LabelTrack::load(path).spans(), track.spans());
  std::filesystem::remove(path);
}
