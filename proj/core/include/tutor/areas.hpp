#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/clock.hpp"

namespace tutor {

/// The closed set of improvement areas, in their canonical listed order. The
/// order doubles as the tie-break when confidences are equal.
inline constexpr std::array<std::string_view, 16> kAreaTaxonomy = {
    "Articles",           "Adjectives",      "Adverbs",       "General Grammar",
    "Tenses",             "Subject–Verb Agreement",    "Vocabulary Range", "Sentence Structure",
    "Word Order",         "Phrasal Verbs",   "Idioms",        "Conjunctions",
    "Word Choice",        "Repetition",      "Punctuation",   "Capitalisation",
};

/// Canonical taxonomy name for a case-, space- and hyphen-insensitive match
/// ("subject-verb agreement" -> "Subject–Verb Agreement").
std::optional<std::string> canonical_area(std::string_view name);

/// Position in kAreaTaxonomy; the name must already be canonical.
std::size_t area_rank(std::string_view canonical);

struct ImprovementArea {
  std::string area;  // canonical taxonomy name
  double confidence = 0.0;
  std::vector<std::string> examples;
  Timestamp detected_at{};
  std::string session_id;

  bool operator==(const ImprovementArea&) const = default;
};

}  // namespace tutor
