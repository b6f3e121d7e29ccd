#include "tutor/records.hpp"

#include <algorithm>

namespace tutor {

std::string_view to_string(ExerciseType t) {
  switch (t) {
    case ExerciseType::fill_in_blank:
      return "fill_in_blank";
    case ExerciseType::rewrite:
      return "rewrite";
    case ExerciseType::multiple_choice:
      return "multiple_choice";
    case ExerciseType::free_response:
      return "free_response";
  }
  return "free_response";
}

std::string_view to_string(ExerciseState s) {
  switch (s) {
    case ExerciseState::issued:
      return "issued";
    case ExerciseState::attempted:
      return "attempted";
    case ExerciseState::completed:
      return "completed";
  }
  return "issued";
}

std::optional<ExerciseType> parse_exercise_type(std::string_view name) {
  for (auto t : {ExerciseType::fill_in_blank, ExerciseType::rewrite, ExerciseType::multiple_choice,
                 ExerciseType::free_response}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::optional<ExerciseState> parse_exercise_state(std::string_view name) {
  for (auto s : {ExerciseState::issued, ExerciseState::attempted, ExerciseState::completed}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

void Exercise::record_attempt(std::string text, Timestamp at) {
  if (state != ExerciseState::issued) {
    throw InvalidTransition("exercise " + exercise_id + " cannot be attempted from state " +
                            std::string(to_string(state)));
  }
  state = ExerciseState::attempted;
  attempt = std::move(text);
  attempted_at = at;
}

void Exercise::complete(std::string feedback_text, Timestamp at) {
  if (state != ExerciseState::attempted) {
    throw InvalidTransition("exercise " + exercise_id + " cannot be completed from state " +
                            std::string(to_string(state)));
  }
  state = ExerciseState::completed;
  feedback = std::move(feedback_text);
  completed_at = at;
}

std::size_t Session::learner_message_count() const {
  return static_cast<std::size_t>(std::count_if(messages.begin(), messages.end(), [](const ChatMessage& m) {
    return m.role == provider::Role::learner;
  }));
}

const Exercise* Session::active_exercise() const {
  for (const auto& e : exercises) {
    if (e.active()) return &e;
  }
  return nullptr;
}

const scoring::ProficiencyEstimate* Session::latest_full_estimate() const {
  for (auto it = estimates.rbegin(); it != estimates.rend(); ++it) {
    if (it->kind == scoring::EstimateKind::full) return &*it;
  }
  return nullptr;
}

const scoring::ProficiencyEstimate* Session::latest_estimate() const {
  return estimates.empty() ? nullptr : &estimates.back();
}

}  // namespace tutor
