#include "vinci/orchestrator/clock.hpp"

#include <algorithm>
#include <thread>

namespace vinci::orchestrator {

double SteadyClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
}

void SteadyClock::sleep_for(double seconds) {
  if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

double VirtualClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

void VirtualClock::sleep_for(double seconds) {
  std::lock_guard lock(mutex_);
  if (seconds > 0.0) now_ += seconds;
}

void VirtualClock::advance_to(double t) {
  std::lock_guard lock(mutex_);
  now_ = std::max(now_, t);
}

}  // namespace vinci::orchestrator
