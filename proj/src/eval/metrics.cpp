#include "vinci/eval/metrics.hpp"

#include <cmath>

namespace vinci::eval {

bool grounding_score(std::span<const double> hits, std::span<const Interval> gt) {
  for (double t : hits) {
    if (std::none_of(gt.begin(), gt.end(), [t](const Interval& iv) { return iv.contains(t); })) return false;
  }
  for (const auto& iv : gt) {
    if (std::none_of(hits.begin(), hits.end(), [&iv](double t) { return iv.contains(t); })) return false;
  }
  return true;
}

bool grounding_score(std::span<const memory::GroundingHit> hits, std::span<const Interval> gt) {
  std::vector<double> times;
  times.reserve(hits.size());
  for (const auto& h : hits) times.push_back(h.timestamp);
  return grounding_score(std::span<const double>(times), gt);
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

}  // namespace vinci::eval
