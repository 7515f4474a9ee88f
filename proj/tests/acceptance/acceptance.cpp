// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vinci/eval/metrics.hpp"
#include "vinci/eval/scenario.hpp"
#include "vinci/generation/diffusion.hpp"
#include "vinci/generation/quality.hpp"
#include "vinci/media/frame_buffer.hpp"
#include "vinci/media/wire.hpp"
#include "vinci/memory/memory_bank.hpp"
#include "vinci/orchestrator/session.hpp"
#include "vinci/retrieval/metrics.hpp"
#include "vinci/retrieval/vector_index.hpp"

using namespace vinci;

namespace {

// Collects the first few broken expectations of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ << (notes_.tellp() > 0 ? "; " : "") << what;
  }
  void note(const std::string& s) { info_ << (info_.tellp() > 0 ? ", " : "") << s; }
  bool ok() const { return failures_ == 0; }
  std::string detail() const { return ok() ? info_.str() : notes_.str(); }

 private:
  int failures_ = 0;
  std::ostringstream notes_, info_;
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void memory_fifo(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  for (int seq = 0; seq < 10000; ++seq) {
    const std::size_t cap = 1 + rng() % 16;
    memory::MemoryBank bank(cap);
    std::vector<memory::MemoryEntry> all;
    double t = 0.0;
    for (int n = rng() % 40; n > 0; --n) {
      t += 0.5 + (rng() % 100) / 10.0;
      all.push_back(memory::MemoryEntry::make("take item" + std::to_string(rng() % 7), t));
      bank.store(all.back());
    }
    const std::size_t keep = std::min(cap, all.size());
    const std::vector<memory::MemoryEntry> tail(all.end() - static_cast<std::ptrdiff_t>(keep), all.end());
    c.expect(bank.entries() == tail, "sequence " + std::to_string(seq) + " differs from the oracle suffix");
  }
  const double s = since(t0);
  c.expect(s < 5.0, "runtime " + fmt("%.2f s", s));
  c.note("10000 sequences");
  c.note(fmt("%.2f s", s));
}

void retrieval_oracle(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::normal_distribution<float> n;
  auto vec = [&](std::size_t d) {
    std::vector<float> v(d);
    for (auto& x : v) x = n(rng);
    return v;
  };
  std::size_t ties = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t count = 1 + rng() % 500, d = 1 + rng() % 128;
    std::vector<retrieval::EmbeddingRecord> rs;
    for (std::size_t i = 0; i < count; ++i) {
      rs.push_back({rng() % 1'000'000'000ull * 1000 + i, vec(d)});
      if (i > 0 && rng() % 10 == 0) {
        rs.back().vector = rs[rng() % i].vector;
        ++ties;
      }
    }
    const auto idx = retrieval::VectorIndex::build(rs);
    const auto q = vec(d);
    const auto want = oracle::exhaustive_ranking(rs, q);
    for (std::size_t k : {1u, 3u, 10u}) {
      const auto got = idx.top_k(q, k);
      bool same = got.size() == std::min(k, count);
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].id == want[i].id && std::abs(got[i].score - want[i].score) < 1e-9;
      }
      c.expect(same, "trial " + std::to_string(trial) + " k=" + std::to_string(k));
    }
  }
  const double s = since(t0);
  c.expect(s < 10.0, "runtime " + fmt("%.2f s", s));
  c.note("200 indexes");
  c.note(std::to_string(ties) + " duplicated vectors");
  c.note(fmt("%.2f s", s));
}

void retrieval_metrics(Check& c) {
  const auto m = retrieval::eval_retrieval(std::vector<std::size_t>{1, 3, 12});
  c.expect(std::abs(m.r_at_1 - 33.3) <= 0.1, "R@1 " + fmt("%.3f", m.r_at_1));
  c.expect(std::abs(m.r_at_5 - 66.7) <= 0.1, "R@5 " + fmt("%.3f", m.r_at_5));
  c.expect(std::abs(m.mean_rank - 5.33) <= 0.01, "MeanR " + fmt("%.4f", m.mean_rank));
  c.expect(m.median_rank == 3.0, "MedianR " + fmt("%.2f", m.median_rank));
  std::mt19937_64 rng(1003);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::size_t> ranks(1 + rng() % 50);
    for (auto& r : ranks) r = 1 + rng() % 30;
    const auto r = retrieval::eval_retrieval(ranks);
    c.expect(r.r_at_1 <= r.r_at_5 && r.r_at_5 <= r.r_at_10, "recall not monotone on set " + std::to_string(i));
  }
  c.note("R@1=" + fmt("%.1f", m.r_at_1) + " R@5=" + fmt("%.1f", m.r_at_5) + " MeanR=" + fmt("%.2f", m.mean_rank) +
         " MedianR=" + fmt("%g", m.median_rank));
}

void diffusion(Check& c) {
  using namespace generation;
  const auto schedule = make_schedule();
  std::mt19937_64 rng(1004);

  // inversion
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto z0 = gaussian_noise(1 + rng() % 4, 1 + rng() % 6, 1 + rng() % 6, 1 + rng() % 4, rng());
    const auto eps = gaussian_noise(z0.frames(), z0.height(), z0.width(), z0.channels(), rng());
    const int t = 1 + static_cast<int>(rng() % 1000);
    const auto back = predict_x0(corrupt(z0, t, eps, schedule), eps, t, schedule);
    for (std::size_t i = 0; i < z0.size(); ++i) worst = std::max(worst, std::abs(back.data()[i] - z0.data()[i]));
  }
  c.expect(worst <= 1e-9, "inversion error " + fmt("%.3g", worst));

  // loss
  struct Fixed : Denoiser {
    Tensor4 eps;
    double offset;
    Fixed(Tensor4 e, double o) : eps(std::move(e)), offset(o) {}
    Tensor4 predict_noise(const Tensor4&, std::string_view, int) override {
      Tensor4 out = eps;
      for (double& v : out.data()) v += offset;
      return out;
    }
  };
  const auto z0 = gaussian_noise(3, 4, 4, 2, 1);
  const auto eps = gaussian_noise(3, 4, 4, 2, 2);
  const auto cond = assemble_condition(corrupt(z0, 500, eps, schedule), z0.frame(0));
  Fixed exact(eps, 0.0), shifted(eps, 0.1);
  const double l0 = eps_loss(exact, cond, "open the lid", 500, eps);
  const double l1 = eps_loss(shifted, cond, "open the lid", 500, eps);
  c.expect(l0 == 0.0, "exact-noise loss " + fmt("%.3g", l0));
  c.expect(std::abs(l1 - 0.01) <= 1e-9, "offset loss " + fmt("%.12f", l1));

  // gradient
  auto model = LinearDenoiser::random(3, 9, 0.3);
  const auto gz0 = gaussian_noise(2, 3, 3, 3, 3);
  const auto geps = gaussian_noise(2, 3, 3, 3, 4);
  const auto gcond = assemble_condition(corrupt(gz0, 300, geps, schedule), gz0.frame(0));
  const auto g = model.loss_gradient(gcond, "stir", geps);
  auto rel_error = [&](std::vector<double>& params, const std::vector<double>& analytic) {
    double diff = 0, norm = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double keep = params[i];
      params[i] = keep + 1e-6;
      const double up = eps_loss(model, gcond, "stir", 300, geps);
      params[i] = keep - 1e-6;
      const double down = eps_loss(model, gcond, "stir", 300, geps);
      params[i] = keep;
      const double fd = (up - down) / 2e-6;
      diff += (fd - analytic[i]) * (fd - analytic[i]);
      norm += analytic[i] * analytic[i];
    }
    return std::sqrt(diff / norm);
  };
  const double gw = rel_error(model.weights(), g.weights);
  const double gb = rel_error(model.bias(), g.bias);
  c.expect(gw < 1e-5 && gb < 1e-5, "gradient relative error " + fmt("%.3g", std::max(gw, gb)));

  // DDIM against the closed-form ODE end point
  const auto mean = gaussian_noise(4, 4, 4, 3, 5);
  const double spread = 0.3;
  GaussianOracleDenoiser den(mean, spread, schedule);
  const auto zT = gaussian_noise(4, 4, 4, 3, 6);
  const auto target = oracle::gaussian_flow_endpoint(zT.data(), mean.data(), spread, schedule.alpha_bar(schedule.steps()));
  std::string errs;
  double prev = INFINITY;
  for (int steps : {1, 5, 10, 50}) {
    const auto out = ddim_from(den, zT, mean.frame(0), "", schedule, steps);
    double e = 0;
    for (std::size_t i = 0; i < target.size(); ++i) e += (out.data()[i] - target[i]) * (out.data()[i] - target[i]);
    e = std::sqrt(e);
    c.expect(e < prev, "error did not shrink at " + std::to_string(steps) + " steps");
    prev = e;
    errs += (errs.empty() ? "" : "/") + fmt("%.2e", e);
  }

  // determinism
  IdentityVae vae;
  const auto vmean = gaussian_noise(16, 4, 4, 3, 7);
  GaussianOracleDenoiser vden(vmean, 0.1, schedule);
  SampleOptions opts;
  opts.seed = 42;
  const auto a = ddim_sample(vden, vae, vmean.frame(0), "open the umbrella", schedule, opts);
  const auto b = ddim_sample(vden, vae, vmean.frame(0), "open the umbrella", schedule, opts);
  c.expect(a.latent == b.latent && a.decoded == b.decoded, "same seed gave different samples");

  c.note("inversion " + fmt("%.1e", worst));
  c.note("loss " + fmt("%g", l0) + "/" + fmt("%.10f", l1));
  c.note("grad rel " + fmt("%.1e", std::max(gw, gb)));
  c.note("DDIM err " + errs);
}

void video_metrics(Check& c) {
  using generation::LumaFrame;
  auto flat = [](std::size_t w, std::size_t h, double v) { return LumaFrame{w, h, std::vector<double>(w * h, v)}; };
  const std::vector<LumaFrame> black = {flat(40, 25, 0)}, white = {flat(40, 25, 255)};
  auto one = black;
  one[0].values[17] = 255;
  const double p0 = generation::psnr(black, white);
  const double p30 = generation::psnr(black, one);
  c.expect(p0 == 0.0, "psnr(0, 255) = " + fmt("%.17g", p0));
  c.expect(std::abs(p30 - 30.0) <= 1e-6, "psnr at MSE 255^2/1000 = " + fmt("%.12f", p30));

  std::mt19937_64 rng(1005);
  const std::vector<LumaFrame> a = {oracle::random_luma(32, 24, rng)};
  const double self = generation::ssim(a, a);
  c.expect(std::abs(self - 1.0) <= 1e-9, "ssim(a, a) = " + fmt("%.12f", self));
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t w = 11 + rng() % 30, h = 11 + rng() % 30;
    auto x = oracle::random_luma(w, h, rng);
    auto y = x;
    for (auto& v : y.values) v = std::clamp(v + static_cast<double>(rng() % 61) - 30.0, 0.0, 255.0);
    if (i % 5 == 0) y = oracle::random_luma(w, h, rng);
    worst = std::max(worst, std::abs(generation::ssim_frame(x, y) - oracle::ssim_direct(x, y)));
  }
  c.expect(worst <= 1e-6, "ssim vs direct formula " + fmt("%.3g", worst));
  c.note("psnr " + fmt("%g", p0) + "/" + fmt("%.9f", p30) + " dB");
  c.note("ssim(a,a)-1 " + fmt("%.1e", self - 1.0));
  c.note("ssim oracle diff " + fmt("%.1e", worst));
}

void summarization_metrics(Check& c) {
  const std::string k = "kitten", s = "sitting";
  const auto d = eval::edit_distance(k, s);
  const auto want = oracle::levenshtein(oracle::chars(k), oracle::chars(s));
  c.expect(d == want && d == 3, "edit_distance(kitten, sitting) = " + std::to_string(d));
  std::mt19937_64 rng(1006);
  auto seq = [&] {
    std::vector<int> v(rng() % 12);
    for (auto& x : v) x = static_cast<int>(rng() % 4);
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = seq(), b = seq(), x = seq();
    const auto ab = eval::edit_distance(a, b);
    c.expect(ab == oracle::levenshtein(a, b), "differs from DP oracle");
    c.expect(eval::edit_distance(a, a) == 0 && (ab == 0) == (a == b), "identity");
    c.expect(ab == eval::edit_distance(b, a), "symmetry");
    c.expect(eval::edit_distance(a, x) <= ab + eval::edit_distance(b, x), "triangle inequality");
  }
  const auto dup = eval::count_duplicates(std::vector<std::string>{"a", "b", "a", "c", "b"});
  c.expect(dup == 2, "count_duplicates = " + std::to_string(dup));
  c.note("kitten/sitting=" + std::to_string(d));
  c.note("1000 triples");
  c.note("duplicates=" + std::to_string(dup));
}

void end_to_end(Check& c) {
  const auto grid = eval::make_grid_scenario();
  const auto t0 = Clock::now();
  orchestrator::Config cfg;
  cfg.clip_dir = std::filesystem::temp_directory_path() / "vinci-clips-acceptance";
  const auto report = eval::run_scenario(grid.chunks, grid.script, cfg);
  const double wall = since(t0);
  const double acc = report.grounding_accuracy().value_or(-1.0);
  c.expect(acc == 100.0, "grounding accuracy " + fmt("%.1f%%", acc));
  std::size_t worst_ed = 0, worst_dup = 0, summaries = 0, answered = 0;
  for (const auto& q : report.queries) {
    answered += q.answered;
    if (q.edit_distance) {
      ++summaries;
      worst_ed = std::max(worst_ed, *q.edit_distance);
      worst_dup = std::max(worst_dup, *q.duplicates);
    }
  }
  c.expect(summaries > 0 && worst_ed == 0, "summary edit distance " + std::to_string(worst_ed));
  c.expect(worst_dup == 0, "summary duplicates " + std::to_string(worst_dup));
  c.expect(answered == report.queries.size(), std::to_string(report.queries.size() - answered) + " unanswered");
  c.expect(wall < 30.0, "runtime " + fmt("%.2f s", wall));
  c.note("grounding " + fmt("%.0f%%", acc) + " over " + std::to_string(report.grounding_trials));
  c.note("edit distance " + std::to_string(worst_ed));
  c.note("duplicates " + std::to_string(worst_dup));
  c.note(fmt("%.0f s stream", grid.end) + " in " + fmt("%.2f s", wall));
}

void queue_serialization(Check& c) {
  using namespace orchestrator;
  auto clock = std::make_shared<SteadyClock>();
  auto model = std::make_shared<fixtures::RecordingModel>(clock, 0.2);
  {
    Session s("acc-queue", Config{}, fixtures::adapters_with(model), clock);
    for (int i = 1; i <= 20; ++i) s.ingest(fixtures::frame_at(0.1 * i));
    std::vector<std::string> ids;
    for (int i = 0; i < 5; ++i) {
      auto ticket = s.enqueue_query("query " + std::to_string(i), 2.0);
      c.expect(ticket.has_value(), "query " + std::to_string(i) + " rejected");
      if (ticket) ids.push_back(ticket->query_id);
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    s.wait_idle();
    const auto calls = model->calls();
    c.expect(calls.size() == 5, std::to_string(calls.size()) + " model calls");
    for (std::size_t i = 0; i < calls.size(); ++i) {
      c.expect(calls[i].instruction == "query " + std::to_string(i), "call " + std::to_string(i) + " out of order");
      if (i > 0) c.expect(calls[i - 1].end <= calls[i].begin, "respond() intervals overlap");
    }
    std::vector<std::string> answered;
    for (const auto& m : s.history()) {
      if (auto* r = std::get_if<ResponseMsg>(&m.payload)) answered.push_back(r->query_id);
    }
    c.expect(answered == ids, "responses out of order");
  }

  Session fast("acc-latency", Config{}, make_adapters(Config{}, clock), clock);
  for (int i = 1; i <= 20; ++i) fast.ingest(fixtures::frame_at(0.1 * i));
  for (int i = 0; i < 20; ++i) {
    fast.enqueue_query("what is this", 2.0);
    fast.wait_idle();
  }
  const auto stats = fast.stats();
  c.expect(stats.queries == 20, std::to_string(stats.queries) + " chat answers");
  c.expect(stats.latency_mean_s < 0.05, "chat latency mean " + fmt("%.4f s", stats.latency_mean_s));
  c.note("5 queries serialized");
  c.note("chat latency " + fmt("%.2f ms", stats.latency_mean_s * 1e3));
}

void wire_round_trips(Check& c) {
  std::mt19937_64 rng(1007);
  for (int i = 0; i < 10000; ++i) {
    const auto chunk = fixtures::random_chunk(rng);
    const auto bytes = media::encode_chunk(chunk);
    const auto back = media::decode_chunk(bytes);
    c.expect(back.chunk == chunk && back.consumed == bytes.size(), "VNCI round trip " + std::to_string(i));
  }
  fixtures::MessageGen gen(1008);
  for (int i = 0; i < 10000; ++i) {
    const auto m = gen.next();
    c.expect(orchestrator::ws_decode(orchestrator::ws_encode(m)) == m, "WS round trip " + std::to_string(i));
  }

  std::size_t rejected = 0, cases = 0;
  auto typed = [&](auto&& f, ErrorCode want) {
    ++cases;
    try {
      f();
    } catch (const Error& e) {
      ++rejected;
      return e.code() == want;
    } catch (...) {
      return false;
    }
    return true;  // mutation happened to stay valid
  };
  for (int i = 0; i < 10000; ++i) {
    auto bytes = media::encode_chunk(fixtures::random_chunk(rng));
    switch (i % 3) {
      case 0: bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255); break;
      case 1: bytes.resize(rng() % bytes.size()); break;
      default:
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    }
    c.expect(typed([&] { media::decode_chunk(bytes); }, ErrorCode::MalformedChunk), "VNCI fuzz untyped error");
  }
  for (int i = 0; i < 10000; ++i) {
    std::string frame = orchestrator::ws_encode(gen.next());
    switch (i % 3) {
      case 0: frame.resize(rng() % frame.size()); break;
      case 1: frame[rng() % frame.size()] = static_cast<char>(rng()); break;
      default:
        for (auto& ch : frame) ch = static_cast<char>(rng());
    }
    c.expect(typed([&] { orchestrator::ws_decode(frame); }, ErrorCode::SchemaViolation), "WS fuzz untyped error");
  }
  c.note("20000 valid round trips");
  c.note(std::to_string(rejected) + "/" + std::to_string(cases) + " fuzz cases rejected with typed errors");
}

void snippet_contract(Check& c) {
  media::FrameBuffer buffer(30.0);
  for (int i = 0; i <= 300; ++i) {
    media::TimedFrame f;
    f.timestamp_us = media::from_seconds(i / 30.0);
    f.width = f.height = 2;
    f.pixels.assign(12, 1);
    buffer.push(std::move(f));
  }
  for (double end : {10.0, 7.5, 4.0 + 1.0 / 60}) {
    const auto s = buffer.extract_snippet(2.0, end);
    c.expect(s.frames.size() == 60, std::to_string(s.frames.size()) + " frames ending at " + fmt("%g", end));
    for (const auto& f : s.frames) {
      c.expect(f->seconds() > end - 2.0 && f->seconds() <= end, "frame outside (end-2, end]");
    }
  }
  c.note("60 frames in (end-2, end] at 30 fps");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"memory-fifo", memory_fifo},
      {"retrieval-oracle", retrieval_oracle},
      {"retrieval-metrics", retrieval_metrics},
      {"diffusion", diffusion},
      {"video-metrics", video_metrics},
      {"summarization-metrics", summarization_metrics},
      {"end-to-end-scenario", end_to_end},
      {"queue-serialization", queue_serialization},
      {"wire-round-trips", wire_round_trips},
      {"snippet-contract", snippet_contract},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("threw: ") + e.what());
    }
    failed += c.ok() ? 0 : 1;
    std::printf("%s %-22s %s\n", c.ok() ? "PASS" : "FAIL", name, c.detail().c_str());
    std::fflush(stdout);
  }
  return failed;
}
