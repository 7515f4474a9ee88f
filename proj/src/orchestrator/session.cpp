#include "vinci/orchestrator/session.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "vinci/common/error.hpp"
#include "vinci/model/intent.hpp"
#include "vinci/speech/speech.hpp"

namespace vinci::orchestrator {

SerialExecutor::SerialExecutor() : thread_([this] { run(); }) {}

SerialExecutor::~SerialExecutor() { stop(); }

bool SerialExecutor::post(std::function<void()> task) {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return false;
    tasks_.push_back(std::move(task));
  }
  wake_.notify_one();
  return true;
}

void SerialExecutor::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [this] { return tasks_.empty() && !busy_; });
}

void SerialExecutor::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_one();
  if (thread_.joinable()) thread_.join();
}

void SerialExecutor::run() {
  std::unique_lock lock(mutex_);
  for (;;) {
    wake_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
    if (tasks_.empty()) break;  // stopping and drained
    auto task = std::move(tasks_.front());
    tasks_.pop_front();
    busy_ = true;
    lock.unlock();
    try {
      task();
    } catch (const std::exception& e) {
      spdlog::error("background task failed: {}", e.what());
    }
    lock.lock();
    busy_ = false;
    if (tasks_.empty()) idle_.notify_all();
  }
  idle_.notify_all();
}

Session::Session(std::string id, Config config, Adapters adapters, std::shared_ptr<Clock> clock)
    : id_(std::move(id)),
      config_(std::move(config)),
      adapters_(std::move(adapters)),
      clock_(std::move(clock)),
      started_at_(clock_ ? clock_->now() : 0.0),
      lexicon_(text::VerbLexicon::builtin()),
      wake_{config_.wake_keyword, config_.wake_enabled},
      buffer_(config_.buffer_s),
      bank_(config_.memory_capacity),
      scheduler_(config_.snapshot_interval_s) {
  require(!id_.empty(), "session id must be nonempty");
  require(clock_ != nullptr, "session needs a clock");
  require(adapters_.asr && adapters_.tts && adapters_.encoder && adapters_.captioner && adapters_.model,
          "session needs asr, tts, encoder, captioner and model adapters");
  processor_ = std::thread([this] { process_loop(); });
}

Session::~Session() { close(); }

double Session::session_time() const { return clock_->now() - started_at_; }

void Session::publish(Payload payload) {
  WsMessage message{id_, session_time(), std::move(payload)};
  // Delivered under the lock so every subscriber sees history order.
  std::lock_guard lock(subscriber_mutex_);
  for (auto& [token, subscriber] : subscribers_) subscriber(message);
  history_.push_back(std::move(message));
  if (history_.size() > kHistoryLimit) history_.pop_front();
}

void Session::status(StatusLevel level, std::string detail) {
  if (level == StatusLevel::Error) {
    spdlog::warn("session {}: {}", id_, detail);
  } else {
    spdlog::info("session {}: {}", id_, detail);
  }
  publish(StatusMsg{level, std::move(detail)});
}

void Session::ingest(media::Chunk chunk) {
  if (closed()) fail(ErrorCode::SessionClosed, "session " + id_ + " is closed");
  if (auto* frame = std::get_if<media::TimedFrame>(&chunk)) {
    const double t = media::to_seconds(frame->timestamp_us);
    const auto width = frame->width;
    const auto height = frame->height;
    buffer_.push(std::move(*frame));
    if (auto snippet = scheduler_.poll(buffer_, t)) {
      pump_.post([this, s = std::move(*snippet)] { pump(s); });
    }
    if (!last_notify_ || t - *last_notify_ >= 1.0 / config_.frame_notify_hz) {
      last_notify_ = t;
      publish(FrameNotifyMsg{t, width, height});
    }
  } else if (auto* audio = std::get_if<media::AudioChunk>(&chunk)) {
    pending_speech_.audio.push_back(std::move(*audio));
    double seconds = 0.0;
    for (const auto& a : pending_speech_.audio) seconds += a.duration();
    if (seconds >= config_.asr_segment_s) flush_speech();
  } else {
    pending_speech_.captions.push_back(std::get<media::TextChunk>(std::move(chunk)));
    flush_speech();
  }
}

void Session::flush_speech() {
  if (pending_speech_.audio.empty() && pending_speech_.captions.empty()) return;
  speech_.post([this, request = std::move(pending_speech_)] { hear(request); });
  pending_speech_ = {};
}

void Session::pump(media::VideoSnippet snippet) {
  try {
    auto caption = adapters_.captioner->caption(snippet);
    bank_.store(memory::MemoryEntry::make(std::move(caption), snippet.midpoint(), lexicon_));
  } catch (const std::exception& e) {
    spdlog::warn("session {}: snapshot at {:.1f}s skipped: {}", id_, snippet.end, e.what());
  }
}

void Session::hear(speech::AsrRequest request) {
  speech::Transcript transcript;
  try {
    transcript = adapters_.asr->transcribe(request);
  } catch (const std::exception& e) {
    status(StatusLevel::Warning, std::string("speech recognition failed: ") + e.what());
    return;
  }
  if (text::trim(transcript.text).empty()) return;
  publish(TranscriptMsg{transcript.text});
  std::optional<std::string> query;
  if (wake_.enabled) {
    query = speech::detect_wake(transcript, wake_);
  } else {
    query = std::string(text::trim(transcript.text));
  }
  if (!query) return;
  try {
    enqueue_query(std::move(*query), transcript.t1);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SessionClosed) throw;
  }
}

std::optional<QueryTicket> Session::enqueue_query(std::string text, double now) {
  require(!text::trim(text).empty(), "query text must be nonempty");
  if (closed()) fail(ErrorCode::SessionClosed, "session " + id_ + " is closed");
  media::VideoSnippet snippet;
  try {
    snippet = buffer_.extract_snippet(config_.snippet_s, now);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyBuffer) throw;
    status(StatusLevel::Warning, "query dropped: no video in the last " + std::to_string(config_.snippet_s) + "s");
    return std::nullopt;
  }
  QueryTicket ticket;
  {
    std::lock_guard lock(queue_mutex_);
    if (closed_) fail(ErrorCode::SessionClosed, "session " + id_ + " is closed");
    if (queue_.size() >= config_.queue_depth) {
      // fall through to the status below, outside the lock
      ticket.position = SIZE_MAX;
    } else {
      ticket.query_id = "q" + std::to_string(next_query_++);
      ticket.position = queue_.size() + (in_flight_ ? 1 : 0);
      queue_.push_back({ticket.query_id, std::move(text), clock_->now(), now, std::move(snippet)});
    }
  }
  if (ticket.position == SIZE_MAX) {
    status(StatusLevel::Warning, "query dropped: queue is full");
    return std::nullopt;
  }
  queue_wake_.notify_one();
  return ticket;
}

std::optional<QueryTicket> Session::submit_typed_query(std::string text) {
  auto newest = buffer_.newest_timestamp();
  if (!newest) {
    status(StatusLevel::Warning, "query dropped: no video received yet");
    return std::nullopt;
  }
  return enqueue_query(std::move(text), media::to_seconds(*newest));
}

void Session::process_loop() {
  std::unique_lock lock(queue_mutex_);
  for (;;) {
    queue_wake_.wait(lock, [this] { return closed_ || !queue_.empty(); });
    if (closed_) break;
    auto envelope = std::move(queue_.front());
    queue_.pop_front();
    in_flight_ = envelope.query_id;
    lock.unlock();
    process(std::move(envelope));
    lock.lock();
    in_flight_.reset();
    queue_idle_.notify_all();
  }
}

void Session::process(QueryEnvelope envelope) {
  QueryRecord record;
  record.query_id = envelope.query_id;
  record.text = envelope.text;
  record.arrival = envelope.arrival;
  record.stream_t = envelope.stream_t;
  model::Response response;
  try {
    const auto intent = model::classify_intent(envelope.text, lexicon_);
    record.intent = intent.kind;
    auto tokens = std::make_shared<const model::VisualTokens>(adapters_.encoder->encode_video(envelope.snippet));
    const auto prompt = model::assemble_prompt(std::move(tokens), bank_.render_context(), envelope.text);
    const model::RespondContext context{bank_, envelope.snippet, envelope.stream_t};
    response = adapters_.model->respond(prompt, intent, context);
    const std::string subject = intent.free_text.empty() ? envelope.text : intent.free_text;
    if (response.intent.kind == model::IntentKind::Predict && !response.generated && adapters_.predictor) {
      response.generated = adapters_.predictor->predict(envelope.snippet, subject);
    }
    if (response.intent.kind == model::IntentKind::Retrieve && response.retrieved.empty() && adapters_.retriever) {
      response.retrieved = adapters_.retriever->retrieve(subject, model::MockVisionLanguageModel::kRetrieveK);
    }
    record.intent = response.intent.kind;
    record.latency_s = std::max(0.0, clock_->now() - envelope.arrival);
    record.ok = true;
    record.response = response.text;
    record.generated = response.generated;
    record.retrieved = response.retrieved;
    publish(ResponseMsg{record.query_id, response.text, record.intent, record.latency_s});
  } catch (const std::exception& e) {
    record.ok = false;
    record.error = e.what();
    status(StatusLevel::Error, "query " + record.query_id + " failed: " + e.what());
  }

  if (record.ok) {
    try {
      auto audio = adapters_.tts->synthesize(response.text);
      publish(TtsAudioMsg{text::base64_encode(speech::pcm_bytes(audio.samples)), audio.sample_rate});
    } catch (const std::exception& e) {
      status(StatusLevel::Warning, "speech synthesis failed for " + record.query_id + ": " + e.what());
    }
    if (response.generated) publish(GeneratedVideoMsg{response.generated->uri, response.generated->duration_s});
    if (!response.retrieved.empty()) publish(RetrievedVideosMsg{response.retrieved});
  }

  std::lock_guard lock(queue_mutex_);
  records_.push_back(std::move(record));
}

void Session::wait_idle() {
  pump_.wait_idle();
  speech_.wait_idle();
  std::unique_lock lock(queue_mutex_);
  queue_idle_.wait(lock, [this] { return closed_ || (queue_.empty() && !in_flight_); });
}

bool Session::closed() const {
  std::lock_guard lock(queue_mutex_);
  return closed_;
}

void Session::close() {
  {
    std::lock_guard lock(queue_mutex_);
    if (closed_) return;
    closed_ = true;
  }
  queue_wake_.notify_all();
  queue_idle_.notify_all();
  speech_.stop();
  pump_.stop();
  if (processor_.joinable()) processor_.join();

  std::deque<QueryEnvelope> orphans;
  {
    std::lock_guard lock(queue_mutex_);
    orphans.swap(queue_);
  }
  for (auto& envelope : orphans) {
    QueryRecord record;
    record.query_id = envelope.query_id;
    record.text = envelope.text;
    record.arrival = envelope.arrival;
    record.stream_t = envelope.stream_t;
    record.error = "session closed";
    status(StatusLevel::Error, "query " + record.query_id + " failed: session closed");
    std::lock_guard lock(queue_mutex_);
    records_.push_back(std::move(record));
  }
}

std::size_t Session::subscribe(Subscriber subscriber) {
  std::lock_guard lock(subscriber_mutex_);
  const auto token = next_token_++;
  subscribers_.emplace(token, std::move(subscriber));
  return token;
}

void Session::unsubscribe(std::size_t token) {
  std::lock_guard lock(subscriber_mutex_);
  subscribers_.erase(token);
}

SessionStats Session::stats() const {
  SessionStats s;
  {
    std::lock_guard lock(queue_mutex_);
    double sum = 0.0;
    for (const auto& r : records_) {
      if (!r.ok) continue;
      ++s.queries;
      sum += r.latency_s;
    }
    if (s.queries > 0) {
      s.latency_mean_s = sum / static_cast<double>(s.queries);
      double sq = 0.0;
      for (const auto& r : records_) {
        if (r.ok) sq += (r.latency_s - s.latency_mean_s) * (r.latency_s - s.latency_mean_s);
      }
      s.latency_std_s = std::sqrt(sq / static_cast<double>(s.queries));
    }
  }
  s.memory_len = bank_.size();
  return s;
}

std::vector<QueryRecord> Session::records() const {
  std::lock_guard lock(queue_mutex_);
  return records_;
}

std::vector<WsMessage> Session::history() const {
  std::lock_guard lock(subscriber_mutex_);
  return {history_.begin(), history_.end()};
}

}  // namespace vinci::orchestrator
