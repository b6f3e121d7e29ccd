#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tutor/error.hpp"

namespace tutor::wordbank {

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 14;

struct WordEntry {
  std::string word;
  int level = kMinLevel;

  bool operator==(const WordEntry&) const = default;
};

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, const std::string& what)
      : Error("word bank line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LevelOutOfRange : public Error {
 public:
  LevelOutOfRange(std::size_t line, const std::string& word, long level)
      : Error("word bank line " + std::to_string(line) + ": level " + std::to_string(level) + " for '" + word +
              "' is outside [1,14]"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConflictingDuplicate : public Error {
 public:
  ConflictingDuplicate(const std::string& word, int first, int second)
      : Error("word bank: '" + word + "' listed with levels " + std::to_string(first) + " and " +
              std::to_string(second)),
        word_(word) {}
  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

/// Immutable lemma -> level map. Safe for concurrent reads once built.
class WordBank {
 public:
  WordBank() = default;

  /// Validates and collapses entries with the same rules as load_word_bank.
  static WordBank from_entries(const std::vector<WordEntry>& entries);

  std::optional<int> lookup(std::string_view lemma) const;
  std::size_t size() const noexcept { return levels_.size(); }
  bool empty() const noexcept { return levels_.empty(); }

  /// Index i holds the number of words at level i + 1.
  std::array<std::size_t, kMaxLevel> level_histogram() const;

  /// Entries sorted by word.
  std::vector<WordEntry> entries() const;

  bool operator==(const WordBank& other) const { return levels_ == other.levels_; }

 private:
  std::unordered_map<std::string, int> levels_;
};

/// Reads `word,level` rows; a `word,level` header line is optional.
/// Throws MalformedRow, LevelOutOfRange or ConflictingDuplicate.
WordBank load_word_bank(std::istream& source);
WordBank load_word_bank_file(const std::filesystem::path& path);

/// Splits text into word tokens. Letters are ASCII alphabetics and any
/// non-ASCII UTF-8 sequence other than common punctuation. Apostrophes and
/// hyphens are kept only between two letters; for contractions and possessives
/// only the part before the first apostrophe is returned ("don't" -> "don").
std::vector<std::string> tokenize(std::string_view text);

/// Rule-based English lemmatizer: strips surrounding punctuation, lowercases,
/// then applies an irregular-form table and ordered suffix rules until the
/// result is stable. Deterministic and idempotent.
std::string lemmatize(std::string_view token);

inline std::optional<int> lookup(const WordBank& bank, std::string_view lemma) { return bank.lookup(lemma); }

}  // namespace tutor::wordbank
