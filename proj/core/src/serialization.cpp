#include "tutor/serialization.hpp"

namespace tutor {

using nlohmann::json;

json timestamp_json(const std::optional<Timestamp>& ts) {
  return ts ? json(format_iso8601(*ts)) : json(nullptr);
}

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::optional<Timestamp> optional_timestamp(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return parse_iso8601(j.at(key).get<std::string>());
}

}  // namespace

}  // namespace tutor

namespace tutor::scoring {

void to_json(json& j, const WordBankScore& s) {
  json matched = json::array();
  for (const auto& m : s.matched) matched.push_back({{"lemma", m.lemma}, {"level", m.level}});
  j = {{"average", optional_json(s.average_level)},
       {"median", optional_json(s.median_level)},
       {"coverage", s.coverage},
       {"matched_count", s.matched.size()},
       {"token_count", s.token_count},
       {"matched", std::move(matched)}};
}

void from_json(const json& j, WordBankScore& s) {
  s.average_level = optional_from<double>(j, "average");
  s.median_level = optional_from<double>(j, "median");
  s.coverage = j.at("coverage").get<double>();
  s.token_count = j.at("token_count").get<std::size_t>();
  s.matched.clear();
  for (const auto& m : j.at("matched")) s.matched.push_back({m.at("lemma").get<std::string>(), m.at("level").get<int>()});
}

void to_json(json& j, const ProficiencyEstimate& e) {
  j = {{"kind", to_string(e.kind)},
       {"wordbank", e.wordbank ? json(*e.wordbank) : json(nullptr)},
       {"wordbank_level", optional_json(e.wordbank_level)},
       {"llm_level", optional_json(e.llm_level)},
       {"combined_level", e.combined_level},
       {"assessed_at", format_iso8601(e.assessed_at)},
       {"input_chars", e.input_chars},
       {"degraded", e.degraded},
       {"degraded_reason", e.degraded ? json(e.degraded_reason) : json(nullptr)}};
}

void from_json(const json& j, ProficiencyEstimate& e) {
  e.kind = j.at("kind").get<std::string>() == "wordbank" ? EstimateKind::wordbank : EstimateKind::full;
  e.wordbank = optional_from<WordBankScore>(j, "wordbank");
  e.wordbank_level = optional_from<double>(j, "wordbank_level");
  e.llm_level = optional_from<double>(j, "llm_level");
  e.combined_level = j.at("combined_level").get<double>();
  e.assessed_at = parse_iso8601(j.at("assessed_at").get<std::string>());
  e.input_chars = j.at("input_chars").get<std::size_t>();
  e.degraded = j.at("degraded").get<bool>();
  e.degraded_reason = optional_from<std::string>(j, "degraded_reason").value_or("");
}

}  // namespace tutor::scoring

namespace tutor::resources {

void to_json(json& j, const Resource& r) {
  j = {{"area", r.area},
       {"resource_type", r.resource_type},
       {"title", r.title},
       {"description", r.description},
       {"url", r.url},
       {"difficulty_level", to_string(r.difficulty_level)}};
}

}  // namespace tutor::resources

namespace tutor {

void to_json(json& j, const ImprovementArea& a) {
  j = {{"area", a.area},
       {"confidence", a.confidence},
       {"examples", a.examples},
       {"detected_at", format_iso8601(a.detected_at)},
       {"session_id", a.session_id}};
}

void from_json(const json& j, ImprovementArea& a) {
  a.area = j.at("area").get<std::string>();
  a.confidence = j.at("confidence").get<double>();
  a.examples = j.at("examples").get<std::vector<std::string>>();
  a.detected_at = parse_iso8601(j.at("detected_at").get<std::string>());
  a.session_id = j.at("session_id").get<std::string>();
}

void to_json(json& j, const ChatMessage& m) {
  j = {{"role", provider::to_string(m.role)}, {"text", m.text}, {"created_at", format_iso8601(m.created_at)}};
}

void from_json(const json& j, ChatMessage& m) {
  const auto role = j.at("role").get<std::string>();
  if (role != "learner" && role != "assistant") throw ValidationError("unknown message role: " + role);
  m.role = role == "learner" ? provider::Role::learner : provider::Role::assistant;
  m.text = j.at("text").get<std::string>();
  m.created_at = parse_iso8601(j.at("created_at").get<std::string>());
}

void to_json(json& j, const Exercise& e) {
  j = {{"exercise_id", e.exercise_id},
       {"exercise_type", to_string(e.type)},
       {"prompt", e.prompt},
       {"state", to_string(e.state)},
       {"attempt", optional_json(e.attempt)},
       {"feedback", optional_json(e.feedback)},
       {"issued_at", format_iso8601(e.issued_at)},
       {"attempted_at", timestamp_json(e.attempted_at)},
       {"completed_at", timestamp_json(e.completed_at)}};
}

void from_json(const json& j, Exercise& e) {
  e.exercise_id = j.at("exercise_id").get<std::string>();
  const auto type = parse_exercise_type(j.at("exercise_type").get<std::string>());
  const auto state = parse_exercise_state(j.at("state").get<std::string>());
  if (!type || !state) throw ValidationError("invalid exercise type or state");
  e.type = *type;
  e.state = *state;
  e.prompt = j.at("prompt").get<std::string>();
  e.attempt = optional_from<std::string>(j, "attempt");
  e.feedback = optional_from<std::string>(j, "feedback");
  e.issued_at = parse_iso8601(j.at("issued_at").get<std::string>());
  e.attempted_at = optional_timestamp(j, "attempted_at");
  e.completed_at = optional_timestamp(j, "completed_at");
}

void to_json(json& j, const LearnerProfile& p) {
  j = {{"learner_id", p.learner_id},
       {"email", p.email},
       {"display_name", p.display_name},
       {"created_at", format_iso8601(p.created_at)}};
}

void to_json(json& j, const Session& s) {
  j = {{"session_id", s.session_id},
       {"learner_id", s.learner_id},
       {"started_at", format_iso8601(s.started_at)},
       {"ended_at", timestamp_json(s.ended_at)},
       {"summary", s.summary ? json(s.summary->text) : json(nullptr)},
       {"messages", s.messages},
       {"exercises", s.exercises},
       {"estimates", s.estimates},
       {"areas", s.areas}};
}

void from_json(const json& j, Session& s) {
  s.session_id = j.at("session_id").get<std::string>();
  s.learner_id = j.at("learner_id").get<std::string>();
  s.started_at = parse_iso8601(j.at("started_at").get<std::string>());
  s.ended_at = optional_timestamp(j, "ended_at");
  if (auto text = optional_from<std::string>(j, "summary")) {
    s.summary = SessionSummary{*text, false};
  } else {
    s.summary.reset();
  }
  s.messages = j.at("messages").get<std::vector<ChatMessage>>();
  s.exercises = j.at("exercises").get<std::vector<Exercise>>();
  s.estimates = j.at("estimates").get<std::vector<scoring::ProficiencyEstimate>>();
  s.areas = j.at("areas").get<std::vector<ImprovementArea>>();
}

}  // namespace tutor
