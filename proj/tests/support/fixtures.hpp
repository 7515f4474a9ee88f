#pragma once

// Random inputs and instrumented stand-ins shared by the unit tests and the
// acceptance binary.

#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "vinci/common/error.hpp"
#include "vinci/common/text.hpp"
#include "vinci/media/types.hpp"
#include "vinci/orchestrator/backends.hpp"
#include "vinci/orchestrator/messages.hpp"

namespace fixtures {

using namespace vinci;
using namespace vinci::orchestrator;

inline media::Chunk random_chunk(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<media::Micros> ts(0, media::Micros{1} << 50);
  std::uniform_int_distribution<int> byte(0, 255);
  switch (kind(rng)) {
    case 0: {
      media::TimedFrame f;
      f.timestamp_us = ts(rng);
      f.width = 1 + rng() % 9;
      f.height = 1 + rng() % 9;
      f.pixels.resize(std::size_t{f.width} * f.height * 3);
      for (auto& p : f.pixels) p = static_cast<std::uint8_t>(byte(rng));
      return f;
    }
    case 1: {
      media::AudioChunk a;
      a.timestamp_us = ts(rng);
      a.sample_rate = 1 + rng() % 48000;
      a.samples.resize(rng() % 64);
      for (auto& s : a.samples) s = static_cast<std::int16_t>(rng());
      return a;
    }
    default: {
      static const std::vector<std::string> pieces = {"a", "hi vinci", " ", "é", "日本", "🙂", "\n", "cup"};
      media::TextChunk t;
      t.timestamp_us = ts(rng);
      for (int i = rng() % 6; i > 0; --i) t.text += pieces[rng() % pieces.size()];
      return t;
    }
  }
}

inline media::TimedFrame frame_at(double t, std::uint8_t shade = 40) {
  media::TimedFrame f;
  f.timestamp_us = media::from_seconds(t);
  f.width = 4;
  f.height = 4;
  f.pixels.assign(48, shade);
  return f;
}

// Model stand-in that sleeps on the real clock and records when each call
// ran and which snippet it saw.
class RecordingModel : public model::VisionLanguageModel {
 public:
  struct Call {
    std::string instruction;
    double begin = 0, end = 0;
    double snippet_end = 0;
    double newest_frame = 0;
  };

  RecordingModel(std::shared_ptr<Clock> clock, double delay_s) : clock_(std::move(clock)), delay_s_(delay_s) {}

  model::Response respond(const model::ModelPrompt& prompt, const model::Intent& intent,
                          const model::RespondContext& context) override {
    Call c;
    c.instruction = prompt.instruction;
    c.begin = clock_->now();
    started_ = true;
    c.snippet_end = context.snippet.end;
    for (const auto& f : context.snippet.frames) c.newest_frame = std::max(c.newest_frame, f->seconds());
    std::this_thread::sleep_for(std::chrono::duration<double>(delay_s_));
    if (prompt.instruction.find("boom") != std::string::npos) fail(ErrorCode::ModelUnavailable, "model exploded");
    c.end = clock_->now();
    {
      std::lock_guard lock(mutex_);
      calls_.push_back(c);
    }
    return {"ok: " + prompt.instruction, intent, std::nullopt, {}, 0.0};
  }

  std::vector<Call> calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }
  bool started() const { return started_; }

 private:
  std::shared_ptr<Clock> clock_;
  double delay_s_;
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
  std::atomic<bool> started_{false};
};

inline Adapters adapters_with(std::shared_ptr<model::VisionLanguageModel> m) {
  auto book = std::make_shared<model::LabelCodebook>();
  Adapters a;
  a.asr = std::make_shared<speech::MockAsr>();
  a.tts = std::make_shared<speech::MockTts>();
  a.encoder = std::make_shared<model::MockVideoEncoder>(book);
  a.captioner = std::make_shared<model::MockCaptioner>();
  a.model = std::move(m);
  return a;
}


// Valid messages drawn from every payload type.
class MessageGen {
 public:
  explicit MessageGen(std::uint64_t seed) : rng_(seed) {}

  WsMessage next() {
    WsMessage m;
    m.session_id = word(1);
    m.t = real(-1e6, 1e6);
    switch (rng_() % 8) {
      case 0: m.payload = TranscriptMsg{word(0)}; break;
      case 1:
        m.payload = ResponseMsg{word(1), word(0), static_cast<model::IntentKind>(rng_() % 6), real(0, 100)};
        break;
      case 2: {
        std::vector<std::uint8_t> pcm(2 * (rng_() % 40));
        for (auto& c : pcm) c = static_cast<std::uint8_t>(rng_());
        m.payload = TtsAudioMsg{text::base64_encode(pcm), static_cast<std::uint32_t>(1 + rng_() % 96000)};
        break;
      }
      case 3: m.payload = GeneratedVideoMsg{"/clips/" + word(1), real(0, 10)}; break;
      case 4: {
        RetrievedVideosMsg r;
        for (int n = rng_() % 4; n > 0; --n) r.items.push_back({rng_(), word(1), word(0), real(-1, 1)});
        m.payload = r;
        break;
      }
      case 5: m.payload = StatusMsg{static_cast<StatusLevel>(rng_() % 3), word(0)}; break;
      case 6:
        m.payload = FrameNotifyMsg{real(0, 1e5), static_cast<std::uint32_t>(1 + rng_() % 4096),
                                   static_cast<std::uint32_t>(1 + rng_() % 4096)};
        break;
      default: m.payload = QueryMsg{"x" + word(0)}; break;
    }
    return m;
  }

 private:
  std::string word(std::size_t min_len) {
    static const std::vector<std::string> pieces = {"a", "Z", "7", " ", "\"", "\\", "\n", "é", "漢", "🙂", "/", "{"};
    std::string s;
    for (std::size_t n = min_len + rng_() % 12; n > 0; --n) s += pieces[rng_() % pieces.size()];
    return s;
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  std::mt19937_64 rng_;
};

}  // namespace fixtures
