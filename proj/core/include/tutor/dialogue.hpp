#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutor/analysis.hpp"
#include "tutor/clock.hpp"
#include "tutor/prompts.hpp"
#include "tutor/provider.hpp"
#include "tutor/records.hpp"
#include "tutor/resources.hpp"
#include "tutor/scoring.hpp"
#include "tutor/store.hpp"
#include "tutor/wordbank.hpp"

namespace tutor::dialogue {

struct TriggerPhrase {
  std::string phrase;  // matched case-insensitively
  ExerciseType type = ExerciseType::free_response;
};

std::vector<TriggerPhrase> default_trigger_phrases();

struct DetectedExercise {
  ExerciseType type = ExerciseType::free_response;
  std::string prompt;  // the full assistant message

  bool operator==(const DetectedExercise&) const = default;
};

/// The trigger phrase occurring earliest in the text decides the type; on a
/// shared start position the longer phrase wins.
std::optional<DetectedExercise> detect_exercise(std::string_view assistant_text,
                                                const std::vector<TriggerPhrase>& triggers);
std::optional<DetectedExercise> detect_exercise(std::string_view assistant_text);

struct EngineConfig {
  std::size_t context_turns = 12;
  std::size_t judge_every = 3;  // learner messages between judge runs
  std::size_t max_reply_chars = 4000;
  std::size_t recommend_k = 3;
  scoring::ScoringOptions scoring;
  analysis::AnalysisPolicy analysis;
  std::vector<TriggerPhrase> triggers = default_trigger_phrases();

  void validate() const;
};

class UnknownLearner : public Error {
 public:
  using Error::Error;
};

class SessionClosed : public Error {
 public:
  using Error::Error;
};

/// Another turn for the same session is in flight.
class Busy : public Error {
 public:
  using Error::Error;
};

enum class ExerciseEvent { issued, attempted, completed };

std::string_view to_string(ExerciseEvent e);

struct ExerciseTransition {
  ExerciseEvent event = ExerciseEvent::issued;
  Exercise exercise;  // state right after the transition
};

struct TurnResult {
  std::string session_id;
  std::string assistant_reply;
  /// Last transition of the turn; exercise_events lists all of them in order.
  std::optional<ExerciseEvent> exercise_event;
  std::vector<ExerciseTransition> exercise_events;
  std::optional<Exercise> active_exercise;
  std::optional<std::vector<ImprovementArea>> analysis_event;
  std::optional<scoring::ProficiencyEstimate> proficiency_event;
  std::optional<std::vector<resources::Resource>> recommended;
};

void to_json(nlohmann::json& j, const TurnResult& r);

/// One tutoring engine per process. Turns of one session are serialized (a
/// concurrent second turn fails with Busy); turns of different sessions run
/// in parallel. The engine keeps no session state of its own.
class TutorEngine {
 public:
  TutorEngine(store::Store& store, provider::Provider& provider, const wordbank::WordBank& bank,
              const resources::ResourceCatalog* catalog, provider::PromptLibrary prompts, Clock& clock,
              IdGenerator& ids, EngineConfig config = {});

  /// Throws UnknownLearner.
  Session start_session(const std::string& learner_id);

  /// Throws ValidationError (empty text), store::NotFound / store::Forbidden,
  /// SessionClosed, Busy, or provider::ProviderError when the tutor reply
  /// could not be obtained. In the last case the learner message stays
  /// persisted and nothing else changes.
  TurnResult handle_learner_message(const std::string& learner_id, const std::string& session_id,
                                    const std::string& text);

  /// Summarizes and closes the session. A failing provider closes it with a
  /// placeholder summary flagged degraded. Throws SessionClosed if already closed.
  SessionSummary end_session(const std::string& learner_id, const std::string& session_id);

  /// Ends every open session idle for at least `idle`. Returns how many were closed.
  std::size_t end_idle_sessions(std::chrono::milliseconds idle);

  /// Recommendations for the learner's most recent analysis and latest level.
  /// Empty when there is no analysis yet or no catalog.
  std::vector<resources::Resource> recommend_for(const std::string& learner_id, std::size_t k);

  const EngineConfig& config() const noexcept { return config_; }

 private:
  class SessionGuard;

  std::vector<provider::Turn> context_window(const Session& session, std::string& trailing_learner_text) const;
  std::optional<std::vector<resources::Resource>> recommend_areas(const std::vector<ImprovementArea>& areas,
                                                                  double level, std::size_t k) const;

  store::Store& store_;
  provider::Provider& provider_;
  const wordbank::WordBank& bank_;
  const resources::ResourceCatalog* catalog_;
  provider::PromptLibrary prompts_;
  Clock& clock_;
  IdGenerator& ids_;
  EngineConfig config_;

  std::mutex busy_mu_;
  std::set<std::string> busy_;
};

}  // namespace tutor::dialogue
