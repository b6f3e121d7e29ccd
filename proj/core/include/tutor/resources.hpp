#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/areas.hpp"
#include "tutor/error.hpp"

namespace tutor::resources {

enum class Band { beginner, intermediate, advanced };

std::string_view to_string(Band band);
std::optional<Band> parse_band(std::string_view name);

struct Resource {
  std::string area;  // canonical taxonomy name
  std::string resource_type;
  std::string title;
  std::string description;
  std::string url;
  Band difficulty_level = Band::beginner;

  bool operator==(const Resource&) const = default;
};

class MissingColumn : public Error {
 public:
  explicit MissingColumn(const std::string& column)
      : Error("resources CSV is missing column '" + column + "'"), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

struct RowIssue {
  std::size_t row = 0;  // 1-based line number in the CSV
  std::string message;
};

/// Every invalid row of a resources CSV.
class RowValidation : public Error {
 public:
  explicit RowValidation(std::vector<RowIssue> issues);
  const std::vector<RowIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<RowIssue> issues_;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptyCatalog : public Error {
 public:
  using Error::Error;
};

/// Validated, immutable resource list.
class ResourceCatalog {
 public:
  ResourceCatalog() = default;
  explicit ResourceCatalog(std::vector<Resource> items) : items_(std::move(items)) {}

  const std::vector<Resource>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::map<std::string, std::size_t> per_area_counts() const;

 private:
  std::vector<Resource> items_;
};

/// Header row required; columns area, resource_type, title, description, url,
/// difficulty_level in any order. Throws MissingColumn or RowValidation.
ResourceCatalog load_resources(std::istream& source);
ResourceCatalog load_resources_file(const std::filesystem::path& path);

/// scheme://host with a letter-led scheme and a non-empty host.
bool is_valid_url(std::string_view url);

/// [1,5] beginner, (5,10] intermediate, (10,14] advanced. Throws OutOfRange.
Band band_for_level(double level);

/// How well a resource's text matches an area's example phrases. Higher is
/// better. Swappable so an embedding scorer can replace the lexical one.
class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  virtual double score(const Resource& resource, const ImprovementArea& area) const = 0;
};

/// Count of distinct content-word lemmas shared by the resource description
/// and the area's example phrases.
class LexicalScorer final : public RelevanceScorer {
 public:
  double score(const Resource& resource, const ImprovementArea& area) const override;
};

/// Resources for the detected areas, best first. Ranking key: area confidence
/// (desc), band distance from the learner's band (asc), relevance (desc),
/// title (asc). Throws EmptyCatalog, ValidationError (no areas or k == 0) or
/// OutOfRange (level).
std::vector<Resource> recommend(const ResourceCatalog& catalog, const std::vector<ImprovementArea>& areas,
                                double level, std::size_t k, const RelevanceScorer& scorer);
std::vector<Resource> recommend(const ResourceCatalog& catalog, const std::vector<ImprovementArea>& areas,
                                double level, std::size_t k);

}  // namespace tutor::resources
