#pragma once

#include <cstddef>
#include <span>

namespace vinci::retrieval {

struct RetrievalMetrics {
  double r_at_1 = 0.0;  // percent
  double r_at_5 = 0.0;
  double r_at_10 = 0.0;
  double mean_rank = 0.0;
  double median_rank = 0.0;
  std::size_t queries = 0;
};

/// Recall@{1,5,10}, mean and median of 1-based ranks of the correct item.
/// Even counts take the mean of the middle pair. Throws EmptyInput on no
/// ranks and PreconditionViolation on a rank of 0.
RetrievalMetrics eval_retrieval(std::span<const std::size_t> ranks);

}  // namespace vinci::retrieval
