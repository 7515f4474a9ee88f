#pragma once

// Reference implementations the tests compare the library against. They are
// deliberately naive and share no code with src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vinci/eval/scenario.hpp"
#include "vinci/generation/quality.hpp"
#include "vinci/retrieval/vector_index.hpp"

namespace oracle {

// Full (n+1) x (m+1) Levenshtein table.
template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    }
  }
  return d[a.size()][b.size()];
}

inline std::vector<char> chars(const std::string& s) { return {s.begin(), s.end()}; }

// Cosine of every record against the query, sorted score-descending then
// id-ascending.
inline std::vector<vinci::retrieval::ScoredId> exhaustive_ranking(
    const std::vector<vinci::retrieval::EmbeddingRecord>& records, const std::vector<float>& query) {
  auto norm = [](const std::vector<float>& v) {
    long double s = 0;
    for (float x : v) s += static_cast<long double>(x) * x;
    return std::sqrt(static_cast<double>(s));
  };
  const double qn = norm(query);
  std::vector<vinci::retrieval::ScoredId> out;
  for (const auto& r : records) {
    const double rn = norm(r.vector);
    double dot = 0.0;
    for (std::size_t i = 0; i < query.size(); ++i) dot += (r.vector[i] / rn) * (query[i] / qn);
    out.push_back({r.id, dot});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return out;
}

// SSIM straight from the definition: for every valid 11x11 window build the
// 2-D Gaussian weights, the weighted moments, and the SSIM expression.
inline double ssim_direct(const vinci::generation::LumaFrame& a, const vinci::generation::LumaFrame& b) {
  constexpr int kW = 11;
  constexpr double kSigma = 1.5;
  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  double weights[kW][kW];
  double total = 0.0;
  for (int i = 0; i < kW; ++i) {
    for (int j = 0; j < kW; ++j) {
      const double di = i - kW / 2;
      const double dj = j - kW / 2;
      weights[i][j] = std::exp(-(di * di + dj * dj) / (2 * kSigma * kSigma));
      total += weights[i][j];
    }
  }
  double sum = 0.0;
  std::size_t windows = 0;
  for (std::size_t y = 0; y + kW <= a.height; ++y) {
    for (std::size_t x = 0; x + kW <= a.width; ++x) {
      double ma = 0, mb = 0;
      for (int i = 0; i < kW; ++i) {
        for (int j = 0; j < kW; ++j) {
          const double w = weights[i][j] / total;
          ma += w * a.at(x + j, y + i);
          mb += w * b.at(x + j, y + i);
        }
      }
      double va = 0, vb = 0, cov = 0;
      for (int i = 0; i < kW; ++i) {
        for (int j = 0; j < kW; ++j) {
          const double w = weights[i][j] / total;
          const double da = a.at(x + j, y + i) - ma;
          const double db = b.at(x + j, y + i) - mb;
          va += w * da * da;
          vb += w * db * db;
          cov += w * da * db;
        }
      }
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return sum / static_cast<double>(windows);
}

// Probability-flow ODE end point for data ~ N(mean, spread^2 I). In the
// rescaled variable x = z / sqrt(abar) the flow is dx/dsigma = (x - mean) sigma / (spread^2 + sigma^2),
// whose solution scales (x - mean) by sqrt(spread^2 + sigma^2); at sigma = 0
// that leaves spread / sqrt(spread^2 + sigma_T^2).
inline std::vector<double> gaussian_flow_endpoint(std::span<const double> z_T, std::span<const double> mean,
                                                  double spread, double abar_T) {
  const double sigma_T = std::sqrt((1.0 - abar_T) / abar_T);
  const double scale = spread / std::hypot(spread, sigma_T);
  std::vector<double> out(z_T.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mean[i] + (z_T[i] / std::sqrt(abar_T) - mean[i]) * scale;
  return out;
}

inline vinci::generation::LumaFrame random_luma(std::size_t w, std::size_t h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  vinci::generation::LumaFrame f{w, h, std::vector<double>(w * h)};
  for (auto& v : f.values) v = std::round(u(rng));
  return f;
}

// Grounding outcome of the grid scenario when the bank only keeps the last
// `capacity` snapshots. Snapshots fire every slot_s seconds and are stamped
// at the middle of their window, so the retained stamps are known in closed
// form; a trial succeeds iff every ground-truth interval still holds one.
struct EvictionExpectation {
  std::size_t memory_len = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double accuracy() const { return trials == 0 ? 0.0 : 100.0 * successes / trials; }
};

inline EvictionExpectation grid_under_eviction(const vinci::eval::GridScenario& grid, double slot_s,
                                               std::size_t capacity) {
  const auto snapshots = static_cast<std::size_t>(std::llround(grid.end / slot_s));
  std::vector<double> stamps;
  for (std::size_t k = 1; k <= snapshots; ++k) stamps.push_back(slot_s * k - slot_s / 2);
  if (stamps.size() > capacity) stamps.erase(stamps.begin(), stamps.end() - capacity);

  EvictionExpectation out;
  out.memory_len = stamps.size();
  for (const auto& e : grid.script.events) {
    if (e.kind != vinci::eval::ScriptEvent::Kind::Query || e.expect.intent != vinci::model::IntentKind::Ground) {
      continue;
    }
    ++out.trials;
    bool ok = !e.expect.intervals.empty();
    for (const auto& iv : e.expect.intervals) {
      ok = ok && std::any_of(stamps.begin(), stamps.end(), [&](double s) { return iv.t0 <= s && s <= iv.t1; });
    }
    out.successes += ok ? 1 : 0;
  }
  return out;
}

}  // namespace oracle
