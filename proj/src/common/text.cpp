#include "vinci/common/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vinci/common/error.hpp"
#include "verbs_tsv.hpp"

namespace vinci::text {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  for (unsigned char c : s) {
    // Bytes >= 0x80 belong to UTF-8 sequences and stay inside words.
    if (std::isalnum(c) || c == '\'' || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : s) {
    bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

bool is_stop_word(std::string_view token) {
  static constexpr std::array<std::string_view, 34> kStop = {
      "a",    "an",   "the",  "i",    "me",  "my",   "your", "to",   "of",
      "into", "onto", "in",   "on",   "with", "at",  "from", "for",  "and",
      "some", "this", "that", "it",   "its", "did",  "was",  "is",   "am",
      "are",  "you",  "what", "when", "do",  "does", "up"};
  return std::find(kStop.begin(), kStop.end(), token) != kStop.end();
}

std::string format_seconds(double seconds) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.1f", seconds);
  return buf.data();
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                          static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view encoded) {
  if (encoded.empty()) return {};
  if (encoded.size() % 4 != 0) fail(ErrorCode::SchemaViolation, "base64 length not a multiple of 4");
  std::vector<std::uint8_t> out(3 * encoded.size() / 4);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(encoded.data()),
                          static_cast<int>(encoded.size()));
  if (n < 0) fail(ErrorCode::SchemaViolation, "invalid base64");
  // EVP_DecodeBlock counts padding as zero bytes.
  std::size_t pad = 0;
  if (encoded.back() == '=') ++pad;
  if (encoded.size() >= 2 && encoded[encoded.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

const VerbLexicon& VerbLexicon::builtin() {
  static const VerbLexicon lexicon = parse(kBuiltinVerbsTsv);
  return lexicon;
}

VerbLexicon VerbLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open verb lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

VerbLexicon VerbLexicon::parse(std::string_view tsv) {
  VerbLexicon lexicon;
  std::size_t pos = 0;
  while (pos <= tsv.size()) {
    std::size_t eol = tsv.find('\n', pos);
    if (eol == std::string_view::npos) eol = tsv.size();
    std::string_view line = trim(tsv.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      fail(ErrorCode::SchemaViolation, "verb lexicon line without tab: " + std::string(line));
    }
    lexicon.add(trim(line.substr(0, tab)), trim(line.substr(tab + 1)));
  }
  return lexicon;
}

void VerbLexicon::add(std::string_view phrase, std::string_view canonical) {
  auto key = words(phrase);
  require(!key.empty() && !canonical.empty(), "empty verb lexicon entry");
  longest_ = std::max(longest_, key.size());
  phrases_[std::move(key)] = to_lower(canonical);
}

VerbLexicon::Match VerbLexicon::match(std::span<const std::string> tokens) const {
  if (tokens.empty()) return {std::nullopt, 0};
  for (std::size_t len = std::min(longest_, tokens.size()); len >= 1; --len) {
    std::vector<std::string> key(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(len));
    if (auto it = phrases_.find(key); it != phrases_.end()) {
      if (it->second == "*") return {std::nullopt, len};
      return {it->second, len};
    }
  }
  return {tokens.front(), 1};
}

}  // namespace vinci::text
