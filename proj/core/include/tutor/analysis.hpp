#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutor/areas.hpp"
#include "tutor/prompts.hpp"
#include "tutor/provider.hpp"
#include "tutor/records.hpp"

namespace tutor::analysis {

struct AnalysisPolicy {
  std::size_t min_new_learner_messages = 3;
  double confidence_threshold = 0.3;  // strict: kept iff confidence > threshold
  std::size_t max_areas = 3;

  void validate() const;
};

class EmptySession : public Error {
 public:
  using Error::Error;
};

/// True once at least min_new_learner_messages learner messages arrived since
/// the last completed analysis.
bool should_analyze(const Session& session, const AnalysisPolicy& policy);

/// Learner messages in order, newline-joined. Throws EmptySession if there are none.
std::string aggregate_learner_text(const Session& session);

/// Validates a parsed model reply. Elements that are not objects, lack any of
/// {area, confidence, examples}, name an area outside the taxonomy, or carry a
/// confidence outside [0,1] are dropped with a warning. Example phrases that
/// share fewer than half their tokens with every line of `learner_text` are
/// dropped. Duplicate areas keep the higher confidence. The result holds only
/// areas above the threshold, sorted by confidence (ties in taxonomy order),
/// at most max_areas long.
std::vector<ImprovementArea> filter_improvement_areas(const nlohmann::json& reply, std::string_view learner_text,
                                                      const AnalysisPolicy& policy, Timestamp detected_at,
                                                      const std::string& session_id);

/// Sends the improvement-analysis prompt and filters the reply. Throws
/// provider::ProviderError, provider::NoJsonFound or provider::MalformedJson
/// when the reply as a whole is unusable.
std::vector<ImprovementArea> identify_improvement_areas(provider::Provider& provider,
                                                        const provider::PromptLibrary& prompts,
                                                        std::string_view learner_text, const AnalysisPolicy& policy,
                                                        Timestamp detected_at, const std::string& session_id);

/// Fraction of the phrase's distinct lowercase tokens that occur in `message`.
double token_overlap(std::string_view phrase, std::string_view message);

}  // namespace tutor::analysis
