#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vinci::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

/// Lowercased word tokens; anything that is not alphanumeric or an
/// apostrophe separates tokens.
std::vector<std::string> words(std::string_view s);

std::size_t word_count(std::string_view s);

bool is_stop_word(std::string_view token);

/// "%.1f" formatting used by every human-facing timestamp ("4.0", "40.0").
std::string format_seconds(double seconds);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view encoded);

/// Maps surface verb phrases onto canonical verbs ("pick up" -> "take").
/// A canonical value of "*" marks a wildcard verb ("interact with") that
/// matches any action on the noun. Unknown verbs pass through unchanged.
class VerbLexicon {
 public:
  struct Match {
    std::optional<std::string> verb;  // nullopt for wildcard verbs
    std::size_t consumed = 0;         // tokens used by the phrase
  };

  VerbLexicon() = default;

  /// Built-in table, identical to data/verbs.tsv.
  static const VerbLexicon& builtin();

  /// Tab separated "phrase<TAB>canonical" lines, '#' comments.
  static VerbLexicon load(const std::filesystem::path& path);
  static VerbLexicon parse(std::string_view tsv);

  void add(std::string_view phrase, std::string_view canonical);

  /// Normalizes the verb phrase starting at tokens[0]. Longest phrase wins.
  Match match(std::span<const std::string> tokens) const;

  std::size_t size() const { return phrases_.size(); }

 private:
  std::map<std::vector<std::string>, std::string> phrases_;
  std::size_t longest_ = 0;
};

}  // namespace vinci::text
