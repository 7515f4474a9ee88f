#pragma once

#include <chrono>
#include <mutex>

namespace vinci::orchestrator {

/// Seconds on a monotone timeline. Sessions read latency and adapter cost
/// through this so replays can run on simulated time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  virtual void sleep_for(double seconds) = 0;
};

class SteadyClock final : public Clock {
 public:
  SteadyClock() : origin_(std::chrono::steady_clock::now()) {}
  double now() const override;
  void sleep_for(double seconds) override;

 private:
  std::chrono::steady_clock::time_point origin_;
};

/// Time only moves when told to: sleep_for advances it, advance_to jumps
/// forward (never back).
class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(double start = 0.0) : now_(start) {}
  double now() const override;
  void sleep_for(double seconds) override;
  void advance_to(double t);

 private:
  mutable std::mutex mutex_;
  double now_;
};

}  // namespace vinci::orchestrator
