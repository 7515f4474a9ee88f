#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <vector>

#include "vinci/memory/memory_bank.hpp"

namespace vinci::eval {

/// Levenshtein distance: fewest insertions, deletions and substitutions
/// turning `pred` into `gt`, with exact element equality.
template <typename Seq>
std::size_t edit_distance(const Seq& pred, const Seq& gt) {
  const std::size_t n = std::size(pred);
  const std::size_t m = std::size(gt);
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  auto pi = std::begin(pred);
  for (std::size_t i = 1; i <= n; ++i, ++pi) {
    cur[0] = i;
    auto gj = std::begin(gt);
    for (std::size_t j = 1; j <= m; ++j, ++gj) {
      const std::size_t sub = prev[j - 1] + (*pi == *gj ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

/// Repeated events: count minus distinct count.
template <typename Seq>
std::size_t count_duplicates(const Seq& events) {
  std::set<std::decay_t<decltype(*std::begin(events))>> distinct(std::begin(events), std::end(events));
  return std::size(events) - distinct.size();
}

/// Closed interval [t0, t1] in seconds.
struct Interval {
  double t0 = 0.0;
  double t1 = 0.0;

  bool contains(double t) const { return t0 <= t && t <= t1; }
  bool operator==(const Interval&) const = default;
};

/// A grounding trial succeeds iff every ground-truth interval holds at least
/// one reported time and every reported time falls inside some interval.
bool grounding_score(std::span<const double> hits, std::span<const Interval> gt);
bool grounding_score(std::span<const memory::GroundingHit> hits, std::span<const Interval> gt);

/// Mean and population standard deviation; zeros for an empty input.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

}  // namespace vinci::eval
