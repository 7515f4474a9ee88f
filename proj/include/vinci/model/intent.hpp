#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "vinci/common/text.hpp"

namespace vinci::model {

enum class IntentKind { Chat, Ground, Summarize, Plan, Predict, Retrieve };

std::string_view to_string(IntentKind kind);
std::optional<IntentKind> intent_from_string(std::string_view name);

struct Intent {
  IntentKind kind = IntentKind::Chat;
  std::optional<std::string> verb;  // Ground: canonical verb, nullopt = any
  std::optional<std::string> noun;  // Ground: object asked about
  std::string free_text;            // Retrieve/Predict/Plan/Chat: the subject of the request

  bool operator==(const Intent&) const = default;
};

/// Rule table, first match wins:
///   "when did" / "when was"                       -> Ground
///   starts with "summarize" / "list what"         -> Summarize
///   word "plan", or "how do i" ... "step"         -> Plan
///   "show me" ... "video", or "find a video"      -> Retrieve
///   "demonstrate", "what will" ... "look like",
///   or "predict"                                  -> Predict
///   otherwise                                     -> Chat
Intent classify_intent(std::string_view query, const text::VerbLexicon& lexicon = text::VerbLexicon::builtin());

}  // namespace vinci::model
