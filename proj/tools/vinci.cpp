// vinci: serve, replay and offline evaluation front-end.

#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"
#include "vinci/eval/scenario.hpp"
#include "vinci/generation/clip_io.hpp"
#include "vinci/generation/quality.hpp"
#include "vinci/media/wire.hpp"
#include "vinci/orchestrator/backends.hpp"
#include "vinci/orchestrator/server.hpp"
#include "vinci/retrieval/embedder.hpp"
#include "vinci/retrieval/metrics.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace vinci;

namespace {

void emit(const json& report, const std::string& path) {
  if (path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    write_file(path, report.dump(2) + "\n");
    spdlog::info("wrote {}", path);
  }
}

orchestrator::Config config_or_default(const std::string& path) {
  return path.empty() ? orchestrator::Config{} : orchestrator::load_config(path);
}

// Accepts a bare array of ranks or {"ranks": [...]}.
std::vector<std::size_t> read_ranks(const fs::path& path) {
  auto j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::SchemaViolation, path.string() + ": not JSON");
  if (j.is_object()) j = j.value("ranks", json());
  if (!j.is_array()) fail(ErrorCode::SchemaViolation, path.string() + ": expected an array of ranks");
  std::vector<std::size_t> ranks;
  for (const auto& r : j) {
    if (!r.is_number_integer() || r.get<long long>() < 1) {
      fail(ErrorCode::SchemaViolation, path.string() + ": ranks must be integers >= 1");
    }
    ranks.push_back(r.get<std::size_t>());
  }
  return ranks;
}

json retrieval_json(const retrieval::RetrievalMetrics& m) {
  return {{"report_version", eval::ScenarioReport::kVersion},
          {"queries", m.queries},
          {"r_at_1", m.r_at_1},
          {"r_at_5", m.r_at_5},
          {"r_at_10", m.r_at_10},
          {"mean_rank", m.mean_rank},
          {"median_rank", m.median_rank}};
}

json quality_json(const fs::path& a, const fs::path& b) {
  const auto fa = generation::to_luma(generation::read_video_frames(a));
  const auto fb = generation::to_luma(generation::read_video_frames(b));
  const double p = generation::psnr(fa, fb);
  return {{"frames", fa.size()},
          {"ssim", generation::ssim(fa, fb)},
          {"psnr_db", std::isinf(p) ? json("inf") : json(p)}};
}

json clip_json(const model::GeneratedClipRef& clip, const fs::path& dir) {
  const auto name = clip.uri.substr(orchestrator::DiffusionPredictor::kUriPrefix.size());
  json out = generation::read_clip_sidecar(dir / name);
  out["path"] = (dir / name).string();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vinci egocentric assistant backend"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP/WebSocket server");
  std::string serve_config;
  serve->add_option("--config", serve_config, "TOML config file")->check(CLI::ExistingFile);

  // replay
  auto* replay = app.add_subcommand("replay", "replay a recorded stream against a scenario script");
  std::string stream_path, labels_path, scenario_path, report_path, replay_config;
  replay->add_option("--stream", stream_path, "VNCI stream file")->required()->check(CLI::ExistingFile);
  replay->add_option("--labels", labels_path, "label sidecar (JSON-lines)")->check(CLI::ExistingFile);
  replay->add_option("--scenario", scenario_path, "scenario script (JSON-lines)")->required()->check(CLI::ExistingFile);
  replay->add_option("--report", report_path, "report path (default stdout)");
  replay->add_option("--config", replay_config, "TOML config file")->check(CLI::ExistingFile);

  // index
  auto* index = app.add_subcommand("index", "flat video index tools");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "build an index from embeddings JSON-lines");
  std::string emb_path, vidx_path;
  index_build->add_option("embeddings", emb_path)->required()->check(CLI::ExistingFile);
  index_build->add_option("out", vidx_path)->required();
  auto* index_query = index->add_subcommand("query", "top-k search with a text query");
  std::string query_text;
  std::size_t k = retrieval::VectorIndex::kDefaultK;
  index_query->add_option("index", vidx_path)->required()->check(CLI::ExistingFile);
  index_query->add_option("--text", query_text)->required();
  index_query->add_option("-k", k)->check(CLI::PositiveNumber);
  auto* index_eval = index->add_subcommand("eval", "R@K, MeanR and MedianR of a ranks file");
  std::string ranks_path;
  index_eval->add_option("ranks", ranks_path)->required()->check(CLI::ExistingFile);

  // gen
  auto* gen = app.add_subcommand("gen", "action prediction tools");
  gen->require_subcommand(1);
  auto* gen_sample = gen->add_subcommand("sample", "generate a clip from a first frame");
  std::string first_frame, gen_text, out_dir = ".";
  std::uint64_t seed = 0;
  int steps = 50;
  gen_sample->add_option("--first-frame", first_frame, "VNCI file; its first video chunk is used")
      ->required()
      ->check(CLI::ExistingFile);
  gen_sample->add_option("--text", gen_text)->required();
  gen_sample->add_option("--seed", seed);
  gen_sample->add_option("--steps", steps)->check(CLI::PositiveNumber);
  gen_sample->add_option("--out-dir", out_dir);
  auto* gen_metrics = gen->add_subcommand("metrics", "SSIM and PSNR between two VNCI clips");
  std::string clip_a, clip_b;
  gen_metrics->add_option("a", clip_a)->required()->check(CLI::ExistingFile);
  gen_metrics->add_option("b", clip_b)->required()->check(CLI::ExistingFile);

  // eval
  auto* evalc = app.add_subcommand("eval", "evaluation harness");
  evalc->require_subcommand(1);
  auto* eval_scenario = evalc->add_subcommand("scenario", "scripted scenario report");
  eval_scenario->add_option("--stream", stream_path)->required()->check(CLI::ExistingFile);
  eval_scenario->add_option("--labels", labels_path)->check(CLI::ExistingFile);
  eval_scenario->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  eval_scenario->add_option("--config", replay_config)->check(CLI::ExistingFile);
  eval_scenario->add_option("--report", report_path);
  auto* eval_retrieval = evalc->add_subcommand("retrieval", "retrieval metrics from ranks");
  eval_retrieval->add_option("ranks", ranks_path)->required()->check(CLI::ExistingFile);
  eval_retrieval->add_option("--report", report_path);
  auto* eval_gen = evalc->add_subcommand("gen", "video quality of a generated clip against a reference");
  eval_gen->add_option("reference", clip_a)->required()->check(CLI::ExistingFile);
  eval_gen->add_option("generated", clip_b)->required()->check(CLI::ExistingFile);
  eval_gen->add_option("--report", report_path);

  // scenario
  auto* scenario = app.add_subcommand("scenario", "scenario fixtures");
  scenario->require_subcommand(1);
  auto* scenario_make = scenario->add_subcommand("make", "write the 10x5 object/verb grid scenario");
  std::string grid_dir;
  std::uint64_t grid_seed = eval::GridOptions{}.seed;
  scenario_make->add_option("--out", grid_dir, "output directory")->required();
  scenario_make->add_option("--seed", grid_seed);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (serve->parsed()) {
      orchestrator::Server server(config_or_default(serve_config));
      server.run();
    } else if (replay->parsed() || eval_scenario->parsed()) {
      auto config = config_or_default(replay_config);
      std::optional<fs::path> labels;
      if (!labels_path.empty()) labels = labels_path;
      auto report = eval::run_scenario(stream_path, labels, eval::ScenarioScript::load(scenario_path), config);
      emit(report.to_json(), report_path);
    } else if (index_build->parsed()) {
      auto idx = retrieval::VectorIndex::build(retrieval::read_embeddings(emb_path));
      idx.save(vidx_path);
      std::cout << json{{"count", idx.size()}, {"dim", idx.dim()}, {"path", vidx_path}}.dump() << "\n";
    } else if (index_query->parsed()) {
      auto idx = retrieval::VectorIndex::load(vidx_path);
      retrieval::HashingTextEmbedder embedder(idx.dim());
      json items = json::array();
      for (const auto& hit : idx.top_k(embedder.embed_text(query_text), k)) {
        const auto* e = idx.find(hit.id);
        items.push_back({{"id", hit.id}, {"score", hit.score}, {"uri", e->uri}, {"caption", e->caption}});
      }
      std::cout << items.dump(2) << "\n";
    } else if (index_eval->parsed() || eval_retrieval->parsed()) {
      const auto ranks = read_ranks(ranks_path);
      emit(retrieval_json(retrieval::eval_retrieval(ranks)), report_path);
    } else if (gen_sample->parsed()) {
      auto frames = generation::read_video_frames(first_frame);
      if (frames.empty()) fail(ErrorCode::EmptyInput, first_frame + ": no video chunks");
      auto frame = std::make_shared<const media::TimedFrame>(std::move(frames.front()));
      media::VideoSnippet snippet{{frame}, frame->seconds(), frame->seconds(), true};
      orchestrator::DiffusionPredictor::Options options;
      options.clip_dir = out_dir;
      options.sample.seed = seed;
      options.salt_seed = false;
      options.sample.steps = steps;
      orchestrator::DiffusionPredictor predictor(options);
      std::cout << clip_json(predictor.predict(snippet, gen_text), out_dir).dump(2) << "\n";
    } else if (gen_metrics->parsed()) {
      std::cout << quality_json(clip_a, clip_b).dump() << "\n";
    } else if (eval_gen->parsed()) {
      json report = quality_json(clip_a, clip_b);
      report["report_version"] = eval::ScenarioReport::kVersion;
      emit(report, report_path);
    } else if (scenario_make->parsed()) {
      eval::GridOptions options;
      options.seed = grid_seed;
      auto grid = eval::make_grid_scenario(options);
      eval::write_grid_scenario(grid, grid_dir);
      std::cout << json{{"dir", grid_dir}, {"end_s", grid.end}, {"events", grid.script.events.size()}}.dump() << "\n";
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
