#include "tutor/wordbank.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include "tutor/csv.hpp"

namespace tutor::wordbank {
namespace {

std::string ascii_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void insert_entry(std::unordered_map<std::string, int>& levels, const std::string& word, int level) {
  auto [it, inserted] = levels.emplace(word, level);
  if (!inserted && it->second != level) {
    // Report the pair in a fixed order so the message does not depend on row order.
    throw ConflictingDuplicate(word, std::min(it->second, level), std::max(it->second, level));
  }
}

}  // namespace

WordBank WordBank::from_entries(const std::vector<WordEntry>& entries) {
  WordBank bank;
  std::size_t index = 0;
  for (const auto& e : entries) {
    ++index;
    const auto word = ascii_lower(csv::trim(e.word));
    if (word.empty()) throw MalformedRow(index, "empty word");
    if (word.find_first_of(" \t") != std::string::npos) throw MalformedRow(index, "word contains whitespace");
    if (e.level < kMinLevel || e.level > kMaxLevel) throw LevelOutOfRange(index, word, e.level);
    insert_entry(bank.levels_, word, e.level);
  }
  return bank;
}

std::optional<int> WordBank::lookup(std::string_view lemma) const {
  const auto it = levels_.find(std::string(lemma));
  if (it == levels_.end()) return std::nullopt;
  return it->second;
}

std::array<std::size_t, kMaxLevel> WordBank::level_histogram() const {
  std::array<std::size_t, kMaxLevel> hist{};
  for (const auto& [word, level] : levels_) ++hist[static_cast<std::size_t>(level - 1)];
  return hist;
}

std::vector<WordEntry> WordBank::entries() const {
  std::vector<WordEntry> out;
  out.reserve(levels_.size());
  for (const auto& [word, level] : levels_) out.push_back({word, level});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.word < b.word; });
  return out;
}

WordBank load_word_bank(std::istream& source) {
  std::vector<WordEntry> rows;
  csv::Reader reader(source);
  bool first = true;
  try {
    while (auto rec = reader.next()) {
      if (rec->fields.size() != 2) {
        throw MalformedRow(rec->line, "expected 2 columns, found " + std::to_string(rec->fields.size()));
      }
      const auto word = ascii_lower(csv::trim(rec->fields[0]));
      const auto level_text = csv::trim(rec->fields[1]);
      if (first) {
        first = false;
        if (word == "word" && ascii_lower(level_text) == "level") continue;
      }
      if (word.empty()) throw MalformedRow(rec->line, "empty word");
      if (word.find_first_of(" \t") != std::string::npos) {
        throw MalformedRow(rec->line, "word '" + word + "' contains whitespace");
      }
      long level = 0;
      const auto* begin = level_text.data();
      const auto* end = begin + level_text.size();
      const auto [ptr, ec] = std::from_chars(begin, end, level);
      if (level_text.empty() || ec != std::errc{} || ptr != end) {
        throw MalformedRow(rec->line, "level '" + level_text + "' is not an integer");
      }
      if (level < kMinLevel || level > kMaxLevel) throw LevelOutOfRange(rec->line, word, level);
      rows.push_back({word, static_cast<int>(level)});
    }
  } catch (const csv::ParseError& e) {
    throw MalformedRow(e.line(), e.what());
  }

  return WordBank::from_entries(rows);
}

WordBank load_word_bank_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word bank: " + path.string());
  return load_word_bank(in);
}

}  // namespace tutor::wordbank
