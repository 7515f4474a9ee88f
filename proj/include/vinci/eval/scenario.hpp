#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vinci/eval/metrics.hpp"
#include "vinci/media/frame_buffer.hpp"
#include "vinci/memory/memory_bank.hpp"
#include "vinci/model/gateway.hpp"
#include "vinci/model/intent.hpp"
#include "vinci/orchestrator/config.hpp"

namespace vinci::eval {

/// Ground truth attached to one scripted query. Fields left empty are not
/// checked.
struct Expectation {
  std::optional<model::IntentKind> intent;
  std::vector<Interval> intervals;                  // Ground
  std::vector<memory::ActionTokens> sequence;       // Summarize
  std::vector<std::string> steps;                   // Plan

  bool operator==(const Expectation&) const = default;
};

struct ScriptEvent {
  enum class Kind { Action, Plan, Query };

  Kind kind = Kind::Query;
  double t = 0.0;
  std::string verb, noun;           // Action
  std::vector<std::string> steps;   // Plan
  std::string text;                 // Query
  Expectation expect;               // Query

  bool operator==(const ScriptEvent&) const = default;
};

/// Time-ordered scenario script, JSON-lines:
///   {"t", "kind": "action", "verb", "noun"}
///   {"t", "kind": "plan", "steps": [...]}
///   {"t", "kind": "query", "text", "expect": {"intent", "intervals": [[t0, t1], ...],
///                                              "sequence": [["verb", "noun"], ...], "steps": [...]}}
struct ScenarioScript {
  std::vector<ScriptEvent> events;

  /// Throws SchemaViolation on malformed records or decreasing times, and
  /// ScriptMismatch when a query has no "expect".
  static ScenarioScript parse(const std::vector<nlohmann::json>& records);
  static ScenarioScript load(const std::filesystem::path& path);
  std::vector<nlohmann::json> to_json() const;
  void save(const std::filesystem::path& path) const;

  std::vector<model::PlanScript> plans() const;
  /// Label spans implied by the action events: each lasts until the next
  /// action (the last one until `end`).
  media::LabelTrack action_track(double end) const;

  bool operator==(const ScenarioScript&) const = default;
};

struct QueryOutcome {
  std::string query_id;
  double t = 0.0;
  std::string text;
  model::IntentKind intent = model::IntentKind::Chat;
  std::optional<model::IntentKind> expected_intent;
  std::string response;
  std::string error;
  double latency_s = 0.0;
  bool answered = false;
  bool success = false;
  std::vector<double> hit_times;                // Ground
  std::vector<memory::ActionTokens> sequence;   // Summarize
  std::optional<std::size_t> edit_distance;     // Summarize
  std::optional<std::size_t> duplicates;        // Summarize
};

struct ScenarioReport {
  static constexpr int kVersion = 1;

  std::vector<QueryOutcome> queries;
  std::size_t grounding_trials = 0;
  std::size_t grounding_successes = 0;
  std::size_t memory_len = 0;

  /// Percent in [0, 100]; nullopt when there were no grounding queries.
  std::optional<double> grounding_accuracy() const;
  nlohmann::json to_json() const;
};

/// Timestamps the answer text cites: every "<number>s" token.
std::vector<double> cited_times(std::string_view answer);
/// Action tokens of a summary answer, one per non-empty line; a line's
/// trailing " at <t>s" and leading "- " are dropped before parsing.
std::vector<memory::ActionTokens> summary_tokens(std::string_view answer);

struct ReplayOptions {
  std::optional<media::LabelTrack> labels;  // default: action events of the script
};

/// Replays `chunks` through a session on virtual time, speaking each scripted
/// query (prefixed with the wake keyword) at its time and scoring the answer.
ScenarioReport run_scenario(const std::vector<media::Chunk>& chunks, const ScenarioScript& script,
                            const orchestrator::Config& config, const ReplayOptions& options = {});
ScenarioReport run_scenario(const std::filesystem::path& stream, const std::optional<std::filesystem::path>& labels,
                            const ScenarioScript& script, const orchestrator::Config& config);

struct GridOptions {
  std::uint64_t seed = 7;
  double fps = 10.0;
  std::uint32_t width = 32;
  std::uint32_t height = 24;
  double slot_s = 4.0;  // actions last one or two slots
};

struct GridScenario {
  std::vector<media::Chunk> chunks;
  media::LabelTrack labels;
  ScenarioScript script;
  double end = 0.0;
};

inline const std::vector<std::string>& grid_nouns() {
  static const std::vector<std::string> n = {"pen",        "pencil", "scissors", "cup",        "umbrella",
                                             "toy",        "mouse",  "calculator", "toothbrush", "cards"};
  return n;
}
inline const std::vector<std::string>& grid_verbs() {
  static const std::vector<std::string> v = {"take", "put", "hold", "operate", "rotate"};
  return v;
}

/// Ten objects by five verbs, every pair performed once in seeded order,
/// back to back on the snapshot grid, followed by grounding, summary, plan,
/// chat, retrieval and prediction queries at the end of the stream.
GridScenario make_grid_scenario(const GridOptions& options = {});
void write_grid_scenario(const GridScenario& scenario, const std::filesystem::path& dir);

}  // namespace vinci::eval
