#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/areas.hpp"
#include "tutor/clock.hpp"
#include "tutor/error.hpp"
#include "tutor/provider.hpp"
#include "tutor/scoring.hpp"

namespace tutor {

struct LearnerProfile {
  std::string learner_id;
  std::string email;
  std::string display_name;
  Timestamp created_at{};

  bool operator==(const LearnerProfile&) const = default;
};

struct ChatMessage {
  std::string message_id;
  provider::Role role = provider::Role::learner;
  std::string text;
  Timestamp created_at{};

  bool operator==(const ChatMessage&) const = default;
};

enum class ExerciseType { fill_in_blank, rewrite, multiple_choice, free_response };
enum class ExerciseState { issued, attempted, completed };

std::string_view to_string(ExerciseType t);
std::string_view to_string(ExerciseState s);
std::optional<ExerciseType> parse_exercise_type(std::string_view name);
std::optional<ExerciseState> parse_exercise_state(std::string_view name);

class InvalidTransition : public Error {
 public:
  using Error::Error;
};

/// An exercise moves issued -> attempted -> completed and never back.
/// `attempt` is set from attempted on, `feedback` only once completed.
struct Exercise {
  std::string exercise_id;
  ExerciseType type = ExerciseType::free_response;
  std::string prompt;
  ExerciseState state = ExerciseState::issued;
  std::optional<std::string> attempt;
  std::optional<std::string> feedback;
  Timestamp issued_at{};
  std::optional<Timestamp> attempted_at;
  std::optional<Timestamp> completed_at;

  /// issued -> attempted; throws InvalidTransition from any other state.
  void record_attempt(std::string text, Timestamp at);
  /// attempted -> completed; throws InvalidTransition from any other state.
  void complete(std::string feedback_text, Timestamp at);
  bool active() const noexcept { return state != ExerciseState::completed; }

  bool operator==(const Exercise&) const = default;
};

struct SessionSummary {
  std::string text;
  bool degraded = false;
};

struct Session {
  std::string session_id;
  std::string learner_id;
  Timestamp started_at{};
  std::optional<Timestamp> ended_at;
  std::vector<ChatMessage> messages;
  std::vector<Exercise> exercises;
  std::vector<scoring::ProficiencyEstimate> estimates;
  std::vector<ImprovementArea> areas;
  std::optional<SessionSummary> summary;

  /// Learner-message count covered by the last completed improvement analysis.
  std::size_t analyzed_through = 0;
  Timestamp last_activity{};

  bool closed() const noexcept { return ended_at.has_value(); }
  std::size_t learner_message_count() const;
  /// The single exercise that is not yet completed, if any.
  const Exercise* active_exercise() const;
  /// Latest `full` estimate, the one that carries a judge level.
  const scoring::ProficiencyEstimate* latest_full_estimate() const;
  const scoring::ProficiencyEstimate* latest_estimate() const;
};

}  // namespace tutor
