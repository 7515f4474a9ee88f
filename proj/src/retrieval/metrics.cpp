#include "vinci/retrieval/metrics.hpp"

#include <algorithm>
#include <vector>

#include "vinci/common/error.hpp"

namespace vinci::retrieval {

RetrievalMetrics eval_retrieval(std::span<const std::size_t> ranks) {
  if (ranks.empty()) fail(ErrorCode::EmptyInput, "no ranks to evaluate");
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  require(sorted.front() >= 1, "ranks are 1-based");

  const auto n = static_cast<double>(sorted.size());
  auto recall_at = [&](std::size_t k) {
    auto hits = std::upper_bound(sorted.begin(), sorted.end(), k) - sorted.begin();
    return 100.0 * static_cast<double>(hits) / n;
  };
  double sum = 0.0;
  for (std::size_t r : sorted) sum += static_cast<double>(r);

  RetrievalMetrics m;
  m.queries = sorted.size();
  m.r_at_1 = recall_at(1);
  m.r_at_5 = recall_at(5);
  m.r_at_10 = recall_at(10);
  m.mean_rank = sum / n;
  const std::size_t mid = sorted.size() / 2;
  m.median_rank = sorted.size() % 2 == 1
                      ? static_cast<double>(sorted[mid])
                      : 0.5 * (static_cast<double>(sorted[mid - 1]) + static_cast<double>(sorted[mid]));
  return m;
}

}  // namespace vinci::retrieval
