#include "vinci/memory/memory_bank.hpp"

#include <cmath>
#include <mutex>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"

namespace vinci::memory {

std::optional<ActionTokens> parse_description(std::string_view description,
                                              const text::VerbLexicon& lexicon) {
  auto tokens = text::words(description);
  std::size_t begin = 0;
  while (begin < tokens.size() && text::is_stop_word(tokens[begin])) ++begin;
  if (begin >= tokens.size()) return std::nullopt;

  auto match = lexicon.match(std::span(tokens).subspan(begin));
  if (!match.verb) return std::nullopt;  // wildcard verbs do not describe an action
  std::optional<std::string> noun;
  for (std::size_t i = begin + match.consumed; i < tokens.size(); ++i) {
    if (!text::is_stop_word(tokens[i])) noun = tokens[i];
  }
  if (!noun) return std::nullopt;
  return ActionTokens{*match.verb, *noun};
}

MemoryEntry MemoryEntry::make(std::string description, double timestamp, const text::VerbLexicon& lexicon) {
  MemoryEntry e;
  if (auto tokens = parse_description(description, lexicon)) {
    e.verb = tokens->verb;
    e.noun = tokens->noun;
  }
  e.description = std::move(description);
  e.timestamp = timestamp;
  return e;
}

MemoryBank::MemoryBank(std::size_t capacity) : capacity_(capacity) {
  require(capacity >= 1, "memory capacity must be >= 1");
}

MemoryBank::MemoryBank(const MemoryBank& other) : capacity_(other.capacity_) {
  std::shared_lock lock(other.mutex_);
  entries_ = other.entries_;
}

MemoryBank& MemoryBank::operator=(const MemoryBank& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  capacity_ = other.capacity_;
  entries_ = other.entries_;
  return *this;
}

std::optional<MemoryEntry> MemoryBank::store(MemoryEntry entry) {
  require(!text::trim(entry.description).empty(), "memory description must be nonempty");
  require(entry.timestamp >= 0.0 && std::isfinite(entry.timestamp), "memory timestamp must be >= 0");
  std::unique_lock lock(mutex_);
  if (!entries_.empty() && entry.timestamp <= entries_.back().timestamp) {
    fail(ErrorCode::NonMonotoneTimestamp, "memory entry at " + text::format_seconds(entry.timestamp) +
                                              "s not after " + text::format_seconds(entries_.back().timestamp) +
                                              "s");
  }
  entries_.push_back(std::move(entry));
  if (entries_.size() <= capacity_) return std::nullopt;
  MemoryEntry evicted = std::move(entries_.front());
  entries_.pop_front();
  return evicted;
}

std::size_t MemoryBank::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<MemoryEntry> MemoryBank::entries() const {
  std::shared_lock lock(mutex_);
  return {entries_.begin(), entries_.end()};
}

std::string render_context(const std::vector<MemoryEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    if (!out.empty()) out += '\n';
    out += '[';
    out += text::format_seconds(e.timestamp);
    out += "s] ";
    out += e.description;
  }
  return out;
}

std::string MemoryBank::render_context() const { return memory::render_context(entries()); }

std::vector<GroundingHit> MemoryBank::ground(const std::optional<std::string>& verb, std::string_view noun) const {
  require(!text::trim(noun).empty(), "grounding noun must be nonempty");
  const std::string want_noun = text::to_lower(text::trim(noun));
  const std::optional<std::string> want_verb =
      verb ? std::optional<std::string>(text::to_lower(*verb)) : std::nullopt;

  std::vector<GroundingHit> hits;
  std::shared_lock lock(mutex_);
  for (const auto& e : entries_) {
    bool match = false;
    if (e.noun) {
      match = *e.noun == want_noun && (!want_verb || (e.verb && *e.verb == *want_verb));
    } else {
      const std::string desc = text::to_lower(e.description);
      match = desc.find(want_noun) != std::string::npos &&
              (!want_verb || desc.find(*want_verb) != std::string::npos);
    }
    if (match) hits.push_back({e.timestamp, e.description});
  }
  return hits;
}

std::vector<MemoryEntry> MemoryBank::summarize(std::size_t max_items) const {
  require(max_items >= 1, "max_items must be >= 1");
  std::vector<MemoryEntry> collapsed;
  {
    std::shared_lock lock(mutex_);
    for (const auto& e : entries_) {
      if (!collapsed.empty() && collapsed.back().description == e.description) continue;
      collapsed.push_back(e);
    }
  }
  if (collapsed.size() > max_items) {
    collapsed.erase(collapsed.begin(), collapsed.end() - static_cast<std::ptrdiff_t>(max_items));
  }
  return collapsed;
}

void MemoryBank::dump(const std::filesystem::path& path) const {
  std::vector<nlohmann::json> out;
  for (const auto& e : entries()) out.push_back({{"t", e.timestamp}, {"desc", e.description}});
  write_json_lines(path, out);
}

MemoryBank MemoryBank::restore(const std::filesystem::path& path, std::size_t capacity) {
  MemoryBank bank(capacity);
  for (const auto& r : read_json_lines(path)) {
    try {
      bank.store(MemoryEntry::make(r.at("desc").get<std::string>(), r.at("t").get<double>()));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::SchemaViolation, std::string("memory record: ") + e.what());
    }
  }
  return bank;
}

}  // namespace vinci::memory
