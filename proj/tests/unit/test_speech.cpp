#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <thread>

#include <httplib.h>

#include "vinci/common/error.hpp"
#include "vinci/common/text.hpp"
#include "vinci/speech/speech.hpp"

using namespace vinci;
using namespace vinci::speech;

namespace {

speech::Transcript tr(std::string text) { return {std::move(text), 0.0, 0.0}; }

// One-route HTTP service on an ephemeral port.
class FakeService {
 public:
  explicit FakeService(httplib::Server::Handler handler) {
    server_.Post("/svc", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  RemoteEndpoint endpoint(int timeout_ms = 2000) const {
    return {"http://127.0.0.1:" + std::to_string(port_) + "/svc", "", timeout_ms};
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(MockAsr, PassesTextChunksThrough) {
  AsrRequest req;
  req.captions.push_back({3'000'000, "hi vinci what am I holding"});
  MockAsr asr;
  EXPECT_EQ(asr.transcribe(req), (Transcript{"hi vinci what am I holding", 3.0, 3.0}));
}

TEST(MockAsr, EmptyRequestIsPreconditionViolation) {
  MockAsr asr;
  try {
    asr.transcribe({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
}

TEST(HttpAsr, TimeoutBecomesAsrUnavailable) {
  FakeService slow([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    res.set_content(R"({"text":"late"})", "application/json");
  });
  AsrRequest req;
  req.audio.push_back({0, 16000, std::vector<std::int16_t>(160, 0)});
  HttpAsr asr(slow.endpoint(50));
  try {
    asr.transcribe(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AsrUnavailable);
  }
}

TEST(HttpAsr, ReadsReplyText) {
  FakeService svc([](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body["sample_rate"], 16000);
    res.set_content(R"({"text":"hi vinci hello"})", "application/json");
  });
  AsrRequest req;
  req.audio.push_back({1'000'000, 16000, std::vector<std::int16_t>(16000, 3)});
  auto t = HttpAsr(svc.endpoint()).transcribe(req);
  EXPECT_EQ(t.text, "hi vinci hello");
  EXPECT_DOUBLE_EQ(t.t0, 1.0);
  EXPECT_DOUBLE_EQ(t.t1, 2.0);
}

TEST(Wake, ReturnsQueryAfterKeyword) {
  WakeConfig cfg;
  EXPECT_EQ(detect_wake(tr("Hi Vinci, when did I enter the station"), cfg), "when did I enter the station");
  EXPECT_EQ(detect_wake(tr("I said hi to Vincent"), cfg), std::nullopt);
  EXPECT_EQ(detect_wake(tr("hi vinci"), cfg), std::nullopt);
  EXPECT_EQ(detect_wake(tr("chi vincia what"), cfg), std::nullopt);
  EXPECT_EQ(detect_wake(tr("ok hi vinci. hi vinci, again"), cfg), "hi vinci, again");
}

TEST(Wake, DisabledGateIsPreconditionViolation) {
  try {
    detect_wake(tr("hi vinci what"), WakeConfig{"hi vinci", false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
}

TEST(Wake, CaseInvariant) {
  std::mt19937_64 rng(3);
  const std::string base = "well Hi VINCI, show me a video of the cup";
  WakeConfig cfg;
  const auto expected = detect_wake(tr(base), cfg);
  ASSERT_TRUE(expected);
  for (int i = 0; i < 500; ++i) {
    std::string s = base;
    for (auto& c : s) c = (rng() & 1) ? static_cast<char>(std::toupper(c)) : static_cast<char>(std::tolower(c));
    auto got = detect_wake(tr(s), cfg);
    ASSERT_TRUE(got);
    EXPECT_EQ(text::to_lower(*got), text::to_lower(*expected));
  }
}

TEST(Wake, NoKeywordNoQuery) {
  std::mt19937_64 rng(4);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz ,.!?HIVNC";
  WakeConfig cfg;
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    for (int n = rng() % 40; n > 0; --n) s += alphabet[rng() % alphabet.size()];
    // Only strings that do not contain the words in order are eligible.
    const auto words = text::words(s);
    bool has = false;
    for (std::size_t k = 0; k + 1 < words.size(); ++k) has = has || (words[k] == "hi" && words[k + 1] == "vinci");
    if (has) continue;
    ASSERT_EQ(detect_wake(tr(s), cfg), std::nullopt) << s;
  }
}

TEST(MockTts, DurationFollowsWordCount) {
  MockTts tts;
  EXPECT_EQ(tts.synthesize("one two three four five six seven eight nine ten").samples.size(), 9600u);
  EXPECT_EQ(tts.synthesize("ok").samples.size(), 960u);
  EXPECT_EQ(tts.synthesize("ok").sample_rate, 16000u);
  EXPECT_EQ(tts.synthesize("a b c"), tts.synthesize("x  y\tz"));
  try {
    tts.synthesize("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
}

TEST(MockTts, IsA440HzTone) {
  const auto a = MockTts().synthesize("hello");
  int crossings = 0;
  for (std::size_t i = 1; i < a.samples.size(); ++i) {
    crossings += (a.samples[i - 1] < 0) != (a.samples[i] < 0) ? 1 : 0;
  }
  // 0.06 s of 440 Hz has about 2 * 26.4 sign changes.
  EXPECT_NEAR(crossings, 53, 2);
}

TEST(Pcm, BytesRoundTrip) {
  std::vector<std::int16_t> s = {0, 1, -1, 32767, -32768};
  EXPECT_EQ(pcm_samples(pcm_bytes(s)), s);
}
