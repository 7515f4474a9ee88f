#include "vinci/eval/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <regex>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"
#include "vinci/common/text.hpp"
#include "vinci/media/wire.hpp"
#include "vinci/orchestrator/session.hpp"

namespace vinci::eval {

namespace {

using nlohmann::json;

[[noreturn]] void bad_record(std::size_t line, const std::string& what) {
  fail(ErrorCode::SchemaViolation, "scenario record " + std::to_string(line) + ": " + what);
}

Expectation parse_expect(const json& j, std::size_t line) {
  if (!j.is_object()) bad_record(line, "expect must be an object");
  Expectation e;
  if (auto it = j.find("intent"); it != j.end()) {
    auto kind = it->is_string() ? model::intent_from_string(it->get<std::string>()) : std::nullopt;
    if (!kind) bad_record(line, "unknown intent in expect");
    e.intent = kind;
  }
  if (auto it = j.find("intervals"); it != j.end()) {
    for (const auto& iv : *it) {
      if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
        bad_record(line, "intervals must be [t0, t1] pairs");
      }
      Interval interval{iv[0].get<double>(), iv[1].get<double>()};
      if (!(interval.t0 <= interval.t1)) bad_record(line, "interval with t0 > t1");
      e.intervals.push_back(interval);
    }
  }
  if (auto it = j.find("sequence"); it != j.end()) {
    for (const auto& tok : *it) {
      if (!tok.is_array() || tok.size() != 2 || !tok[0].is_string() || !tok[1].is_string()) {
        bad_record(line, "sequence entries must be [verb, noun]");
      }
      e.sequence.push_back({tok[0].get<std::string>(), tok[1].get<std::string>()});
    }
  }
  if (auto it = j.find("steps"); it != j.end()) e.steps = it->get<std::vector<std::string>>();
  return e;
}

json expect_json(const Expectation& e) {
  json j = json::object();
  if (e.intent) j["intent"] = std::string(model::to_string(*e.intent));
  if (!e.intervals.empty()) {
    json ivs = json::array();
    for (const auto& iv : e.intervals) ivs.push_back({iv.t0, iv.t1});
    j["intervals"] = std::move(ivs);
  }
  if (!e.sequence.empty()) {
    json seq = json::array();
    for (const auto& tok : e.sequence) seq.push_back({tok.verb, tok.noun});
    j["sequence"] = std::move(seq);
  }
  if (!e.steps.empty()) j["steps"] = e.steps;
  return j;
}

std::vector<std::string> nonempty_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    auto line = text::trim(s.substr(start, end - start));
    if (!line.empty()) out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

void score(QueryOutcome& q, const Expectation& expect) {
  if (!q.answered) return;
  bool ok = !expect.intent || *expect.intent == q.intent;
  const auto kind = expect.intent.value_or(q.intent);
  if (kind == model::IntentKind::Ground) {
    q.hit_times = cited_times(q.response);
    ok = ok && grounding_score(std::span<const double>(q.hit_times), expect.intervals);
  }
  if (kind == model::IntentKind::Summarize) {
    q.sequence = summary_tokens(q.response);
    q.edit_distance = edit_distance(q.sequence, expect.sequence);
    q.duplicates = count_duplicates(q.sequence);
    ok = ok && *q.edit_distance == 0;
  }
  if (kind == model::IntentKind::Plan && !expect.steps.empty()) {
    ok = ok && nonempty_lines(q.response) == expect.steps;
  }
  q.success = ok;
}

json latency_json(const std::vector<QueryOutcome>& queries) {
  std::map<std::string, std::vector<double>> by_intent;
  for (const auto& q : queries) {
    if (q.answered) by_intent[std::string(model::to_string(q.intent))].push_back(q.latency_s);
  }
  json out = json::object();
  for (const auto& [intent, values] : by_intent) {
    auto ms = mean_std(values);
    out[intent] = {{"mean_s", ms.mean}, {"std_s", ms.std}, {"count", values.size()}};
  }
  return out;
}

}  // namespace

ScenarioScript ScenarioScript::parse(const std::vector<json>& records) {
  ScenarioScript script;
  double last_t = -INFINITY;
  std::size_t line = 0;
  for (const auto& r : records) {
    ++line;
    if (!r.is_object()) bad_record(line, "not an object");
    ScriptEvent e;
    try {
      e.t = r.at("t").get<double>();
      const auto kind = r.at("kind").get<std::string>();
      if (kind == "action") {
        e.kind = ScriptEvent::Kind::Action;
        e.verb = r.at("verb").get<std::string>();
        e.noun = r.at("noun").get<std::string>();
      } else if (kind == "plan") {
        e.kind = ScriptEvent::Kind::Plan;
        e.steps = r.at("steps").get<std::vector<std::string>>();
      } else if (kind == "query") {
        e.kind = ScriptEvent::Kind::Query;
        e.text = r.at("text").get<std::string>();
        if (text::trim(e.text).empty()) bad_record(line, "query text is empty");
        auto it = r.find("expect");
        if (it == r.end()) fail(ErrorCode::ScriptMismatch, "query at line " + std::to_string(line) + " has no expect");
        e.expect = parse_expect(*it, line);
      } else {
        bad_record(line, "unknown kind '" + kind + "'");
      }
    } catch (const json::exception& ex) {
      bad_record(line, ex.what());
    }
    if (!std::isfinite(e.t) || e.t < 0.0) bad_record(line, "t must be finite and >= 0");
    if (e.t < last_t) bad_record(line, "times must be non-decreasing");
    last_t = e.t;
    script.events.push_back(std::move(e));
  }
  return script;
}

ScenarioScript ScenarioScript::load(const std::filesystem::path& path) { return parse(read_json_lines(path)); }

std::vector<json> ScenarioScript::to_json() const {
  std::vector<json> out;
  for (const auto& e : events) {
    switch (e.kind) {
      case ScriptEvent::Kind::Action:
        out.push_back({{"t", e.t}, {"kind", "action"}, {"verb", e.verb}, {"noun", e.noun}});
        break;
      case ScriptEvent::Kind::Plan:
        out.push_back({{"t", e.t}, {"kind", "plan"}, {"steps", e.steps}});
        break;
      case ScriptEvent::Kind::Query:
        out.push_back({{"t", e.t}, {"kind", "query"}, {"text", e.text}, {"expect", expect_json(e.expect)}});
        break;
    }
  }
  return out;
}

void ScenarioScript::save(const std::filesystem::path& path) const { write_json_lines(path, to_json()); }

std::vector<model::PlanScript> ScenarioScript::plans() const {
  std::vector<model::PlanScript> out;
  for (const auto& e : events) {
    if (e.kind == ScriptEvent::Kind::Plan) out.push_back({e.t, e.steps});
  }
  return out;
}

media::LabelTrack ScenarioScript::action_track(double end) const {
  std::vector<const ScriptEvent*> actions;
  for (const auto& e : events) {
    if (e.kind == ScriptEvent::Kind::Action) actions.push_back(&e);
  }
  std::vector<media::LabelSpan> spans;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double t1 = i + 1 < actions.size() ? actions[i + 1]->t : std::max(end, actions[i]->t);
    if (t1 > actions[i]->t) spans.push_back({actions[i]->t, t1, actions[i]->verb, actions[i]->noun});
  }
  return media::LabelTrack(std::move(spans));
}

std::optional<double> ScenarioReport::grounding_accuracy() const {
  if (grounding_trials == 0) return std::nullopt;
  return 100.0 * static_cast<double>(grounding_successes) / static_cast<double>(grounding_trials);
}

json ScenarioReport::to_json() const {
  json summaries = json::array();
  json transcript = json::array();
  std::size_t answered = 0;
  std::size_t succeeded = 0;
  for (const auto& q : queries) {
    answered += q.answered ? 1 : 0;
    succeeded += q.success ? 1 : 0;
    if (q.edit_distance) {
      summaries.push_back({{"query_id", q.query_id}, {"edit_distance", *q.edit_distance}, {"duplicates", *q.duplicates}});
    }
    json row = {{"query_id", q.query_id},
                {"t", q.t},
                {"text", q.text},
                {"intent", std::string(model::to_string(q.intent))},
                {"answered", q.answered},
                {"success", q.success},
                {"latency_s", q.latency_s},
                {"response", q.response}};
    row["expected_intent"] = q.expected_intent ? json(std::string(model::to_string(*q.expected_intent))) : json(nullptr);
    if (!q.error.empty()) row["error"] = q.error;
    transcript.push_back(std::move(row));
  }
  auto acc = grounding_accuracy();
  return {{"report_version", kVersion},
          {"queries", queries.size()},
          {"answered", answered},
          {"succeeded", succeeded},
          {"grounding_accuracy", acc ? json(*acc) : json(nullptr)},
          {"grounding", {{"trials", grounding_trials}, {"successes", grounding_successes}}},
          {"memory_len", memory_len},
          {"summarization", summaries},
          {"latency", latency_json(queries)},
          {"transcript", transcript}};
}

std::vector<double> cited_times(std::string_view answer) {
  static const std::regex kTime(R"((^|[^0-9A-Za-z_.])([0-9]+(?:\.[0-9]+)?)s(?![0-9A-Za-z_]))");
  std::vector<double> out;
  const std::string s(answer);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kTime); it != std::sregex_iterator(); ++it) {
    out.push_back(std::stod((*it)[2].str()));
  }
  return out;
}

std::vector<memory::ActionTokens> summary_tokens(std::string_view answer) {
  static const std::regex kTail(R"(\s+at\s+[0-9]+(?:\.[0-9]+)?s\s*$)");
  std::vector<memory::ActionTokens> out;
  for (auto line : nonempty_lines(answer)) {
    if (line.starts_with("- ")) line = line.substr(2);
    line = std::regex_replace(line, kTail, "");
    auto tokens = memory::parse_description(line);
    out.push_back(tokens.value_or(memory::ActionTokens{"", std::string(text::trim(line))}));
  }
  return out;
}

ScenarioReport run_scenario(const std::vector<media::Chunk>& chunks, const ScenarioScript& script,
                            const orchestrator::Config& config, const ReplayOptions& options) {
  double stream_end = 0.0;
  for (const auto& c : chunks) stream_end = std::max(stream_end, media::to_seconds(media::timestamp_of(c)));
  const auto labels = options.labels ? *options.labels : script.action_track(stream_end);

  auto clock = std::make_shared<orchestrator::VirtualClock>();
  orchestrator::Session session("replay", config, orchestrator::make_adapters(config, clock, script.plans()), clock);

  ScenarioReport report;
  std::size_t next = 0;
  auto feed_until = [&](double t) {
    for (; next < chunks.size(); ++next) {
      const double ts = media::to_seconds(media::timestamp_of(chunks[next]));
      if (ts > t) break;
      clock->advance_to(ts);
      media::Chunk chunk = chunks[next];
      if (auto* f = std::get_if<media::TimedFrame>(&chunk); f && f->labels.empty()) f->labels = labels.labels_at(ts);
      session.ingest(std::move(chunk));
    }
  };

  for (const auto& event : script.events) {
    if (event.kind != ScriptEvent::Kind::Query) continue;
    feed_until(event.t);
    session.flush_speech();
    session.wait_idle();
    clock->advance_to(event.t);

    const std::size_t before = session.records().size();
    std::string spoken = config.wake_enabled ? config.wake_keyword + ", " + event.text : event.text;
    session.ingest(media::TextChunk{media::from_seconds(event.t), std::move(spoken)});
    session.wait_idle();
    const auto records = session.records();

    QueryOutcome q;
    q.t = event.t;
    q.text = event.text;
    q.expected_intent = event.expect.intent;
    if (records.size() > before) {
      const auto& r = records[before];
      q.query_id = r.query_id;
      q.intent = r.intent;
      q.answered = r.ok;
      q.response = r.response;
      q.error = r.error;
      q.latency_s = r.latency_s;
      if (r.ok && q.intent == model::IntentKind::Predict && !r.generated) q.answered = false;
      if (r.ok && q.intent == model::IntentKind::Retrieve && r.retrieved.empty()) q.answered = false;
    } else {
      q.query_id = "rejected-" + std::to_string(report.queries.size() + 1);
      q.error = "query was not accepted";
    }
    score(q, event.expect);
    if (event.expect.intent == model::IntentKind::Ground) {
      ++report.grounding_trials;
      report.grounding_successes += q.success ? 1 : 0;
    }
    report.queries.push_back(std::move(q));
  }
  feed_until(INFINITY);
  session.flush_speech();
  session.wait_idle();
  report.memory_len = session.bank().size();
  session.close();
  return report;
}

ScenarioReport run_scenario(const std::filesystem::path& stream, const std::optional<std::filesystem::path>& labels,
                            const ScenarioScript& script, const orchestrator::Config& config) {
  ReplayOptions options;
  if (labels) options.labels = media::LabelTrack::load(*labels);
  return run_scenario(media::read_stream_file(stream), script, config, options);
}

GridScenario make_grid_scenario(const GridOptions& options) {
  require(options.fps > 0.0 && options.slot_s > 0.0, "fps and slot length must be > 0");
  require(options.width > 0 && options.height > 0, "frame size must be > 0");
  std::mt19937_64 rng(options.seed);

  std::vector<memory::ActionTokens> pairs;
  for (const auto& noun : grid_nouns()) {
    for (const auto& verb : grid_verbs()) pairs.push_back({verb, noun});
  }
  // Fisher-Yates with raw draws so the order does not depend on the standard library.
  for (std::size_t i = pairs.size() - 1; i > 0; --i) std::swap(pairs[i], pairs[rng() % (i + 1)]);

  GridScenario out;
  std::vector<media::LabelSpan> spans;
  double cursor = 0.0;
  for (const auto& p : pairs) {
    const double length = options.slot_s * static_cast<double>(1 + rng() % 2);
    spans.push_back({cursor, cursor + length, p.verb, p.noun});
    out.script.events.push_back({ScriptEvent::Kind::Action, cursor, p.verb, p.noun, {}, {}, {}});
    cursor += length;
  }
  out.end = cursor;
  out.labels = media::LabelTrack(spans);

  const std::size_t pixels = static_cast<std::size_t>(options.width) * options.height * 3;
  const auto frame_count = static_cast<std::size_t>(std::llround(out.end * options.fps));
  for (std::size_t k = 0; k <= frame_count; ++k) {
    media::TimedFrame f;
    f.timestamp_us = static_cast<media::Micros>(std::llround(static_cast<double>(k) * 1e6 / options.fps));
    f.width = options.width;
    f.height = options.height;
    f.pixels.resize(pixels);
    const auto here = out.labels.labels_at(media::to_seconds(f.timestamp_us));
    const std::uint64_t tint = here.empty() ? 0x808080 : text::fnv1a(here.front().verb + " " + here.front().noun);
    for (std::size_t i = 0; i < pixels; ++i) {
      const int base = static_cast<int>((tint >> (8 * (i % 3))) & 0xff);
      f.pixels[i] = static_cast<std::uint8_t>(std::clamp(base + static_cast<int>(rng() % 17) - 8, 0, 255));
    }
    out.chunks.emplace_back(std::move(f));
  }

  const double mid = options.slot_s * std::floor(out.end / (2.0 * options.slot_s));
  out.script.events.push_back({ScriptEvent::Kind::Plan, mid, {}, {},
                               {"clear the desk", "take the pen", "hold the cards", "put the cup"}, {}, {}});

  const double q = out.end;
  auto query = [&](std::string text, Expectation e) {
    ScriptEvent ev;
    ev.kind = ScriptEvent::Kind::Query;
    ev.t = q;
    ev.text = std::move(text);
    ev.expect = std::move(e);
    out.script.events.push_back(std::move(ev));
  };
  for (const auto& s : spans) {
    query("When did I " + s.verb + " the " + s.noun + "?", {model::IntentKind::Ground, {{s.t0, s.t1}}, {}, {}});
  }
  for (const auto& noun : grid_nouns()) {
    Expectation e{model::IntentKind::Ground, {}, {}, {}};
    for (const auto& s : spans) {
      if (s.noun == noun) e.intervals.push_back({s.t0, s.t1});
    }
    query("When did I interact with the " + noun + "?", std::move(e));
  }
  std::vector<memory::ActionTokens> last5;
  for (std::size_t i = spans.size() - std::min<std::size_t>(5, spans.size()); i < spans.size(); ++i) {
    last5.push_back({spans[i].verb, spans[i].noun});
  }
  for (int i = 0; i < 5; ++i) {
    query(i % 2 == 0 ? "Summarize what I did." : "List what I have done so far.",
          {model::IntentKind::Summarize, {}, last5, {}});
  }
  query("Can you plan my next steps?",
        {model::IntentKind::Plan, {}, {}, {"clear the desk", "take the pen", "hold the cards", "put the cup"}});
  query("What am I doing right now?", {model::IntentKind::Chat, {}, {}, {}});
  query("Show me a video of how to pour water into a cup", {model::IntentKind::Retrieve, {}, {}, {}});
  query("What will it look like if I open the umbrella?", {model::IntentKind::Predict, {}, {}, {}});
  std::stable_sort(out.script.events.begin(), out.script.events.end(),
                   [](const ScriptEvent& a, const ScriptEvent& b) { return a.t < b.t; });
  return out;
}

void write_grid_scenario(const GridScenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  media::write_stream_file(dir / "stream.vnci", scenario.chunks);
  scenario.labels.save(dir / "labels.jsonl");
  scenario.script.save(dir / "scenario.jsonl");
}

}  // namespace vinci::eval
