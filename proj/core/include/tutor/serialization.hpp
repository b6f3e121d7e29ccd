#pragma once

#include <nlohmann/json.hpp>

#include "tutor/areas.hpp"
#include "tutor/records.hpp"
#include "tutor/resources.hpp"
#include "tutor/scoring.hpp"

// JSON forms of the domain records. Timestamps are ISO-8601 UTC strings and
// absent optionals are null. The Session form is the transcript document.

namespace tutor::scoring {

void to_json(nlohmann::json& j, const WordBankScore& s);
void from_json(const nlohmann::json& j, WordBankScore& s);
void to_json(nlohmann::json& j, const ProficiencyEstimate& e);
void from_json(const nlohmann::json& j, ProficiencyEstimate& e);

}  // namespace tutor::scoring

namespace tutor::resources {

void to_json(nlohmann::json& j, const Resource& r);

}  // namespace tutor::resources

namespace tutor {

void to_json(nlohmann::json& j, const ImprovementArea& a);
void from_json(const nlohmann::json& j, ImprovementArea& a);
void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const Exercise& e);
void from_json(const nlohmann::json& j, Exercise& e);
void to_json(nlohmann::json& j, const LearnerProfile& p);

/// {session_id, learner_id, started_at, ended_at, summary, messages, exercises, estimates, areas}
void to_json(nlohmann::json& j, const Session& s);
void from_json(const nlohmann::json& j, Session& s);

nlohmann::json timestamp_json(const std::optional<Timestamp>& ts);

}  // namespace tutor
