#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vinci/common/text.hpp"
#include "vinci/media/frame_buffer.hpp"
#include "vinci/memory/memory_bank.hpp"
#include "vinci/orchestrator/backends.hpp"
#include "vinci/orchestrator/clock.hpp"
#include "vinci/orchestrator/config.hpp"
#include "vinci/orchestrator/messages.hpp"

namespace vinci::orchestrator {

/// Single-thread task runner with an idle barrier.
class SerialExecutor {
 public:
  SerialExecutor();
  ~SerialExecutor();
  SerialExecutor(const SerialExecutor&) = delete;
  SerialExecutor& operator=(const SerialExecutor&) = delete;

  /// Returns false once stopped.
  bool post(std::function<void()> task);
  void wait_idle();
  /// Runs whatever is queued, then joins.
  void stop();

 private:
  void run();

  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::deque<std::function<void()>> tasks_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread thread_;
};

struct QueryTicket {
  std::string query_id;
  std::size_t position = 0;  // 0 = runs next
};

struct QueryEnvelope {
  std::string query_id;
  std::string text;
  double arrival = 0.0;   // clock seconds
  double stream_t = 0.0;  // stream seconds the snippet ends at
  media::VideoSnippet snippet;
};

/// Outcome of one query, kept for stats and replay reports.
struct QueryRecord {
  std::string query_id;
  std::string text;
  double arrival = 0.0;
  double stream_t = 0.0;
  bool ok = false;
  model::IntentKind intent = model::IntentKind::Chat;
  std::string response;
  std::string error;
  double latency_s = 0.0;
  std::optional<model::GeneratedClipRef> generated;
  std::vector<model::RetrievedVideo> retrieved;
};

struct SessionStats {
  double latency_mean_s = 0.0;
  double latency_std_s = 0.0;  // population
  std::size_t queries = 0;     // answered successfully
  std::size_t memory_len = 0;
};

/// One stream's worth of state: frame buffer, memory bank, and the
/// sequential query queue. Three workers run beside the ingest caller:
/// the memory pump (captioning), the speech path (ASR + wake) and the
/// query processor. Only one respond() is ever in flight.
class Session {
 public:
  using Subscriber = std::function<void(const WsMessage&)>;

  Session(std::string id, Config config, Adapters adapters, std::shared_ptr<Clock> clock);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  const Config& config() const { return config_; }

  /// Ingest path; call from one thread. Frames must be strictly increasing
  /// in time (NonMonotoneTimestamp otherwise).
  void ingest(media::Chunk chunk);
  /// Sends any buffered audio to ASR now.
  void flush_speech();

  /// Captures the snippet ending at stream time `now` and queues the query.
  /// Rejections (no frames, queue full) publish a status and return nullopt.
  /// Throws SessionClosed after close().
  std::optional<QueryTicket> enqueue_query(std::string text, double now);
  /// Typed query from the console: answered against the newest frame.
  std::optional<QueryTicket> submit_typed_query(std::string text);

  /// Blocks until every worker is idle and no query is waiting.
  void wait_idle();
  /// Stops the workers; queued queries end with an error status.
  void close();
  bool closed() const;

  /// Publishes a status message to every subscriber.
  void status(StatusLevel level, std::string detail);

  /// Subscribers run on the publishing worker while a lock is held; they
  /// must not call back into the session.
  std::size_t subscribe(Subscriber subscriber);
  void unsubscribe(std::size_t token);

  SessionStats stats() const;
  std::vector<QueryRecord> records() const;
  /// The most recent messages published (bounded).
  std::vector<WsMessage> history() const;

  const memory::MemoryBank& bank() const { return bank_; }
  const media::FrameBuffer& buffer() const { return buffer_; }
  double session_time() const;

  static constexpr std::size_t kHistoryLimit = 4096;

 private:
  void publish(Payload payload);
  void pump(media::VideoSnippet snippet);
  void hear(speech::AsrRequest request);
  void process_loop();
  void process(QueryEnvelope envelope);

  const std::string id_;
  const Config config_;
  Adapters adapters_;
  std::shared_ptr<Clock> clock_;
  const double started_at_;
  const text::VerbLexicon& lexicon_;
  speech::WakeConfig wake_;

  media::FrameBuffer buffer_;
  memory::MemoryBank bank_;
  media::SnapshotScheduler scheduler_;
  std::optional<double> last_notify_;
  speech::AsrRequest pending_speech_;

  mutable std::mutex queue_mutex_;
  std::condition_variable queue_wake_;
  std::condition_variable queue_idle_;
  std::deque<QueryEnvelope> queue_;
  std::optional<std::string> in_flight_;
  std::uint64_t next_query_ = 1;
  bool closed_ = false;
  std::vector<QueryRecord> records_;

  mutable std::mutex subscriber_mutex_;
  std::map<std::size_t, Subscriber> subscribers_;
  std::size_t next_token_ = 1;
  std::deque<WsMessage> history_;

  SerialExecutor pump_;
  SerialExecutor speech_;
  std::thread processor_;
};

}  // namespace vinci::orchestrator
