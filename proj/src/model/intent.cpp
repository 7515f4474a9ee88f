#include "vinci/model/intent.hpp"

#include <algorithm>
#include <array>

#include "vinci/common/error.hpp"

namespace vinci::model {

namespace {

constexpr std::array<std::pair<IntentKind, std::string_view>, 6> kNames = {{
    {IntentKind::Chat, "chat"},
    {IntentKind::Ground, "ground"},
    {IntentKind::Summarize, "summarize"},
    {IntentKind::Plan, "plan"},
    {IntentKind::Predict, "predict"},
    {IntentKind::Retrieve, "retrieve"},
}};

/// True when `first` occurs and `second` occurs somewhere after it.
bool contains_then(std::string_view hay, std::string_view first, std::string_view second) {
  auto at = hay.find(first);
  return at != std::string_view::npos && hay.find(second, at + first.size()) != std::string_view::npos;
}

bool contains(std::string_view hay, std::string_view needle) { return hay.find(needle) != std::string_view::npos; }

std::string strip_trailing_punct(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.back() == '?' || s.back() == '.' || s.back() == '!')) s.remove_suffix(1);
  return std::string(text::trim(s));
}

Intent ground_slots(std::string_view lowered, std::size_t after, const text::VerbLexicon& lexicon) {
  Intent intent;
  intent.kind = IntentKind::Ground;
  auto tokens = text::words(lowered.substr(after));
  std::size_t begin = 0;
  while (begin < tokens.size() && text::is_stop_word(tokens[begin])) ++begin;
  if (begin >= tokens.size()) return intent;
  auto match = lexicon.match(std::span(tokens).subspan(begin));
  for (std::size_t i = begin + match.consumed; i < tokens.size(); ++i) {
    if (!text::is_stop_word(tokens[i])) intent.noun = tokens[i];
  }
  if (intent.noun) {
    intent.verb = match.verb;
  } else if (match.verb) {
    // A lone content word ("when was the meeting") names the object.
    intent.noun = tokens[begin];
  }
  return intent;
}

std::string retrieval_subject(const std::string& original, std::string_view lowered) {
  for (std::string_view marker : {"how to ", "video of ", "video on ", "video about ", "video for "}) {
    if (auto at = lowered.rfind(marker); at != std::string_view::npos) {
      return strip_trailing_punct(std::string_view(original).substr(at + marker.size()));
    }
  }
  return strip_trailing_punct(original);
}

}  // namespace

std::string_view to_string(IntentKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "chat";
}

std::optional<IntentKind> intent_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

Intent classify_intent(std::string_view query, const text::VerbLexicon& lexicon) {
  const std::string original(text::trim(query));
  require(!original.empty(), "query must be nonempty");
  const std::string lowered = text::to_lower(original);

  for (std::string_view marker : {"when did", "when was"}) {
    if (auto at = lowered.find(marker); at != std::string::npos) {
      return ground_slots(lowered, at + marker.size(), lexicon);
    }
  }

  if (lowered.starts_with("summarize") || lowered.starts_with("summarise") || lowered.starts_with("list what")) {
    return {IntentKind::Summarize, std::nullopt, std::nullopt, original};
  }

  const auto tokens = text::words(lowered);
  const bool says_plan = std::any_of(tokens.begin(), tokens.end(), [](const std::string& t) {
    return t == "plan" || t == "plans" || t == "planning";
  });
  if (says_plan || contains_then(lowered, "how do i", "step")) {
    return {IntentKind::Plan, std::nullopt, std::nullopt, strip_trailing_punct(original)};
  }

  if (contains_then(lowered, "show me", "video") || contains(lowered, "find a video")) {
    return {IntentKind::Retrieve, std::nullopt, std::nullopt, retrieval_subject(original, lowered)};
  }

  if (contains(lowered, "demonstrate") || contains_then(lowered, "what will", "look like") ||
      contains(lowered, "predict")) {
    return {IntentKind::Predict, std::nullopt, std::nullopt, strip_trailing_punct(original)};
  }

  return {IntentKind::Chat, std::nullopt, std::nullopt, original};
}

}  // namespace vinci::model
