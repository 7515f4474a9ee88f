#pragma once

#include <deque>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "vinci/common/text.hpp"

namespace vinci::memory {

/// Canonical (verb, noun) reading of an action description.
struct ActionTokens {
  std::string verb;
  std::string noun;

  bool operator==(const ActionTokens&) const = default;
  auto operator<=>(const ActionTokens&) const = default;
};

/// First token (after lexicon normalization) is the verb; the last remaining
/// content word is the noun. Stop words are dropped. Returns nullopt when
/// fewer than two content tokens remain.
std::optional<ActionTokens> parse_description(std::string_view description,
                                              const text::VerbLexicon& lexicon = text::VerbLexicon::builtin());

struct MemoryEntry {
  std::string description;
  double timestamp = 0.0;  // seconds since session start
  std::optional<std::string> verb;
  std::optional<std::string> noun;

  /// Builds an entry and fills verb/noun from the description.
  static MemoryEntry make(std::string description, double timestamp,
                          const text::VerbLexicon& lexicon = text::VerbLexicon::builtin());

  bool operator==(const MemoryEntry&) const = default;
};

struct GroundingHit {
  double timestamp = 0.0;
  std::string description;

  bool operator==(const GroundingHit&) const = default;
};

/// FIFO store of (description, timestamp) pairs with a fixed entry capacity.
/// Once full, every store discards the earliest entry. Single writer, many
/// readers; every read observes a whole store (never a half-applied eviction).
class MemoryBank {
 public:
  static constexpr std::size_t kDefaultCapacity = 128;

  explicit MemoryBank(std::size_t capacity = kDefaultCapacity);

  MemoryBank(const MemoryBank& other);
  MemoryBank& operator=(const MemoryBank& other);

  /// Throws NonMonotoneTimestamp unless entry is strictly newer than the last.
  std::optional<MemoryEntry> store(MemoryEntry entry);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  std::vector<MemoryEntry> entries() const;

  /// "[<t>s] <description>" per line, oldest first; "" when empty.
  std::string render_context() const;

  /// Every entry whose noun matches (and whose verb matches when given), in
  /// time order. Entries without parsed tokens match by substring.
  std::vector<GroundingHit> ground(const std::optional<std::string>& verb, std::string_view noun) const;

  /// The max_items most recent entries, oldest first, after collapsing runs
  /// of identical consecutive descriptions.
  std::vector<MemoryEntry> summarize(std::size_t max_items = 5) const;

  /// JSON-lines {"t": seconds, "desc": string}.
  void dump(const std::filesystem::path& path) const;
  static MemoryBank restore(const std::filesystem::path& path, std::size_t capacity = kDefaultCapacity);

 private:
  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  std::deque<MemoryEntry> entries_;
};

std::string render_context(const std::vector<MemoryEntry>& entries);

}  // namespace vinci::memory
