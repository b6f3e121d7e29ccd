#include "tutor/resources.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>

#include "tutor/csv.hpp"
#include "tutor/wordbank.hpp"

namespace tutor::resources {

std::string_view to_string(Band band) {
  switch (band) {
    case Band::beginner:
      return "beginner";
    case Band::intermediate:
      return "intermediate";
    case Band::advanced:
      return "advanced";
  }
  return "beginner";
}

std::optional<Band> parse_band(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto b : {Band::beginner, Band::intermediate, Band::advanced}) {
    if (to_string(b) == lower) return b;
  }
  return std::nullopt;
}

namespace {

std::string describe(const std::vector<RowIssue>& issues) {
  std::string out = "resources CSV has " + std::to_string(issues.size()) + " invalid row(s)";
  for (const auto& i : issues) out += "; row " + std::to_string(i.row) + ": " + i.message;
  return out;
}

}  // namespace

RowValidation::RowValidation(std::vector<RowIssue> issues) : Error(describe(issues)), issues_(std::move(issues)) {}

std::map<std::string, std::size_t> ResourceCatalog::per_area_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : items_) ++counts[r.area];
  return counts;
}

bool is_valid_url(std::string_view url) {
  static const std::regex pattern(R"(^[A-Za-z][A-Za-z0-9+.\-]*://[^/\s?#@]+(@[^/\s?#]+)?([/?#]\S*)?$)");
  return std::regex_match(url.begin(), url.end(), pattern);
}

ResourceCatalog load_resources(std::istream& source) {
  static constexpr std::array<std::string_view, 6> kColumns = {"area",        "resource_type", "title",
                                                                 "description", "url",           "difficulty_level"};
  csv::Reader reader(source);
  std::optional<csv::Record> header;
  std::vector<RowIssue> issues;
  try {
    header = reader.next();
  } catch (const csv::ParseError& e) {
    throw RowValidation({{e.line(), e.what()}});
  }
  if (!header) throw MissingColumn(std::string(kColumns[0]));

  std::array<std::size_t, kColumns.size()> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = std::find_if(header->fields.begin(), header->fields.end(), [&](const std::string& f) {
      std::string name = csv::trim(f);
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
      return name == kColumns[c];
    });
    if (it == header->fields.end()) throw MissingColumn(std::string(kColumns[c]));
    index[c] = static_cast<std::size_t>(it - header->fields.begin());
  }

  std::vector<Resource> items;
  for (;;) {
    std::optional<csv::Record> rec;
    try {
      rec = reader.next();
    } catch (const csv::ParseError& e) {
      issues.push_back({e.line(), e.what()});
      break;
    }
    if (!rec) break;
    if (rec->fields.size() != header->fields.size()) {
      issues.push_back({rec->line, "expected " + std::to_string(header->fields.size()) + " columns, found " +
                                       std::to_string(rec->fields.size())});
      continue;
    }
    auto field = [&](std::size_t c) { return csv::trim(rec->fields[index[c]]); };
    std::vector<std::string> problems;
    const auto area = canonical_area(field(0));
    if (!area) problems.push_back("unknown area '" + field(0) + "'");
    if (field(2).empty()) problems.push_back("empty title");
    if (!is_valid_url(field(4))) problems.push_back("invalid url '" + field(4) + "'");
    const auto band = parse_band(field(5));
    if (!band) problems.push_back("unknown difficulty_level '" + field(5) + "'");
    if (!problems.empty()) {
      std::string msg;
      for (const auto& p : problems) msg += (msg.empty() ? "" : ", ") + p;
      issues.push_back({rec->line, msg});
      continue;
    }
    items.push_back(Resource{*area, field(1), field(2), field(3), field(4), *band});
  }
  if (!issues.empty()) throw RowValidation(std::move(issues));
  return ResourceCatalog(std::move(items));
}

ResourceCatalog load_resources_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open resources CSV: " + path.string());
  return load_resources(in);
}

Band band_for_level(double level) {
  if (!(level >= 1.0 && level <= 14.0)) throw OutOfRange("level " + std::to_string(level) + " is outside [1,14]");
  if (level <= 5.0) return Band::beginner;
  if (level <= 10.0) return Band::intermediate;
  return Band::advanced;
}

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "the",  "and",  "or",   "but",  "of",   "to",   "in",  "on",   "at",   "for",
      "with", "by",   "from", "be",   "it",   "this", "that", "as",   "i",   "you",  "he",   "she",
      "we",   "they", "my",   "your", "our",  "me",   "do",   "have", "not", "so",   "if",   "than",
      "then", "how",  "what", "when", "which","who",  "use",  "can",  "will","about","into", "these"};
  return words;
}

std::set<std::string> content_lemmas(std::string_view text) {
  std::set<std::string> out;
  for (const auto& token : wordbank::tokenize(text)) {
    auto lemma = wordbank::lemmatize(token);
    if (!lemma.empty() && !stopwords().contains(lemma)) out.insert(std::move(lemma));
  }
  return out;
}

int band_index(Band b) { return static_cast<int>(b); }

}  // namespace

double LexicalScorer::score(const Resource& resource, const ImprovementArea& area) const {
  std::set<std::string> example_lemmas;
  for (const auto& e : area.examples) example_lemmas.merge(content_lemmas(e));
  const auto desc = content_lemmas(resource.description + " " + resource.title);
  return static_cast<double>(
      std::count_if(desc.begin(), desc.end(), [&](const std::string& w) { return example_lemmas.contains(w); }));
}

std::vector<Resource> recommend(const ResourceCatalog& catalog, const std::vector<ImprovementArea>& areas,
                                double level, std::size_t k, const RelevanceScorer& scorer) {
  if (catalog.empty()) throw EmptyCatalog("resource catalog is empty");
  if (areas.empty()) throw ValidationError("recommend needs at least one improvement area");
  if (k == 0) throw ValidationError("recommend needs k > 0");
  const int learner_band = band_index(band_for_level(level));

  // Strongest detected instance per area.
  std::map<std::string, const ImprovementArea*> by_area;
  for (const auto& a : areas) {
    auto& slot = by_area[a.area];
    if (slot == nullptr || a.confidence > slot->confidence) slot = &a;
  }

  struct Candidate {
    const Resource* resource;
    std::size_t position;
    double confidence;
    int band_distance;
    double relevance;
  };
  std::vector<Candidate> candidates;
  const auto& items = catalog.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto it = by_area.find(items[i].area);
    if (it == by_area.end()) continue;
    candidates.push_back({&items[i], i, it->second->confidence,
                          std::abs(band_index(items[i].difficulty_level) - learner_band),
                          scorer.score(items[i], *it->second)});
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.band_distance != b.band_distance) return a.band_distance < b.band_distance;
    if (a.relevance != b.relevance) return a.relevance > b.relevance;
    if (a.resource->title != b.resource->title) return a.resource->title < b.resource->title;
    return a.position < b.position;
  });

  std::vector<Resource> out;
  for (std::size_t i = 0; i < candidates.size() && i < k; ++i) out.push_back(*candidates[i].resource);
  return out;
}

std::vector<Resource> recommend(const ResourceCatalog& catalog, const std::vector<ImprovementArea>& areas,
                                double level, std::size_t k) {
  return recommend(catalog, areas, level, k, LexicalScorer{});
}

}  // namespace tutor::resources
