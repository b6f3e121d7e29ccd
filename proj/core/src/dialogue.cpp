#include "tutor/dialogue.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "tutor/serialization.hpp"

namespace tutor::dialogue {

using nlohmann::json;
using provider::PromptKind;
using provider::Role;

std::vector<TriggerPhrase> default_trigger_phrases() {
  return {
      {"fill in the blank", ExerciseType::fill_in_blank},
      {"rewrite the sentence", ExerciseType::rewrite},
      {"choose the correct", ExerciseType::multiple_choice},
      {"which of the following", ExerciseType::multiple_choice},
      {"your task is", ExerciseType::free_response},
      {"try this exercise", ExerciseType::free_response},
      {"complete the sentence", ExerciseType::fill_in_blank},
  };
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string format_level(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", level);
  return buf;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::optional<DetectedExercise> detect_exercise(std::string_view assistant_text,
                                                const std::vector<TriggerPhrase>& triggers) {
  const auto haystack = lower(assistant_text);
  const TriggerPhrase* best = nullptr;
  std::size_t best_pos = std::string::npos;
  for (const auto& t : triggers) {
    if (t.phrase.empty()) continue;
    const auto pos = haystack.find(lower(t.phrase));
    if (pos == std::string::npos) continue;
    if (best == nullptr || pos < best_pos || (pos == best_pos && t.phrase.size() > best->phrase.size())) {
      best = &t;
      best_pos = pos;
    }
  }
  if (best == nullptr) return std::nullopt;
  return DetectedExercise{best->type, std::string(assistant_text)};
}

std::optional<DetectedExercise> detect_exercise(std::string_view assistant_text) {
  static const auto triggers = default_trigger_phrases();
  return detect_exercise(assistant_text, triggers);
}

void EngineConfig::validate() const {
  if (context_turns == 0) throw ValidationError("dialogue.context_turns must be positive");
  if (judge_every == 0) throw ValidationError("dialogue.judge_every must be positive");
  if (max_reply_chars == 0) throw ValidationError("dialogue.max_reply_chars must be positive");
  if (recommend_k == 0) throw ValidationError("resources.recommend_k must be positive");
  scoring.weights.validate();
  analysis.validate();
}

std::string_view to_string(ExerciseEvent e) {
  switch (e) {
    case ExerciseEvent::issued:
      return "issued";
    case ExerciseEvent::attempted:
      return "attempted";
    case ExerciseEvent::completed:
      return "completed";
  }
  return "issued";
}

void to_json(json& j, const TurnResult& r) {
  json events = json::array();
  for (const auto& t : r.exercise_events) events.push_back({{"event", to_string(t.event)}, {"exercise", t.exercise}});
  j = {{"session_id", r.session_id},
       {"assistant_reply", r.assistant_reply},
       {"exercise_event", r.exercise_event ? json(to_string(*r.exercise_event)) : json(nullptr)},
       {"exercise_events", std::move(events)},
       {"active_exercise", r.active_exercise ? json(*r.active_exercise) : json(nullptr)},
       {"analysis_event", r.analysis_event ? json(*r.analysis_event) : json(nullptr)},
       {"proficiency_event", r.proficiency_event ? json(*r.proficiency_event) : json(nullptr)},
       {"recommended", r.recommended ? json(*r.recommended) : json(nullptr)}};
}

class TutorEngine::SessionGuard {
 public:
  SessionGuard(TutorEngine& engine, const std::string& session_id) : engine_(engine), session_id_(session_id) {
    std::lock_guard lock(engine_.busy_mu_);
    if (!engine_.busy_.insert(session_id_).second) {
      throw Busy("session " + session_id_ + " is handling another turn");
    }
  }
  ~SessionGuard() {
    std::lock_guard lock(engine_.busy_mu_);
    engine_.busy_.erase(session_id_);
  }
  SessionGuard(const SessionGuard&) = delete;
  SessionGuard& operator=(const SessionGuard&) = delete;

 private:
  TutorEngine& engine_;
  std::string session_id_;
};

TutorEngine::TutorEngine(store::Store& store, provider::Provider& provider, const wordbank::WordBank& bank,
                         const resources::ResourceCatalog* catalog, provider::PromptLibrary prompts, Clock& clock,
                         IdGenerator& ids, EngineConfig config)
    : store_(store),
      provider_(provider),
      bank_(bank),
      catalog_(catalog),
      prompts_(std::move(prompts)),
      clock_(clock),
      ids_(ids),
      config_(std::move(config)) {
  config_.validate();
}

Session TutorEngine::start_session(const std::string& learner_id) {
  try {
    store_.get_learner(learner_id);
  } catch (const store::NotFound&) {
    throw UnknownLearner("unknown learner " + learner_id);
  }
  Session s;
  s.session_id = ids_.next("ses");
  s.learner_id = learner_id;
  s.started_at = clock_.now();
  s.last_activity = s.started_at;
  store_.put_session(learner_id, s);
  return s;
}

std::vector<provider::Turn> TutorEngine::context_window(const Session& session,
                                                        std::string& trailing_learner_text) const {
  // Failed turns leave learner messages without a reply; runs of one role merge into one turn.
  std::vector<provider::Turn> turns;
  for (const auto& m : session.messages) {
    if (!turns.empty() && turns.back().role == m.role) {
      turns.back().text += "\n" + m.text;
    } else {
      turns.push_back({m.role, m.text});
    }
  }
  trailing_learner_text.clear();
  if (!turns.empty() && turns.back().role == Role::learner) {
    trailing_learner_text = std::move(turns.back().text);
    turns.pop_back();
  }
  const std::size_t keep = std::min(turns.size(), config_.context_turns);
  std::vector<provider::Turn> window(turns.end() - static_cast<std::ptrdiff_t>(keep), turns.end());
  if (!window.empty() && window.front().role != Role::learner) window.erase(window.begin());
  return window;
}

std::optional<std::vector<resources::Resource>> TutorEngine::recommend_areas(
    const std::vector<ImprovementArea>& areas, double level, std::size_t k) const {
  if (catalog_ == nullptr || catalog_->empty() || areas.empty()) return std::nullopt;
  return resources::recommend(*catalog_, areas, std::clamp(level, 1.0, 14.0), k);
}

TurnResult TutorEngine::handle_learner_message(const std::string& learner_id, const std::string& session_id,
                                               const std::string& text) {
  if (text.empty() || blank(text)) throw ValidationError("message text is empty");
  SessionGuard guard(*this, session_id);

  Session session = store_.get_session(learner_id, session_id);
  if (session.closed()) throw SessionClosed("session " + session_id + " is closed");

  // (1) the learner message is durable before any provider call.
  const ChatMessage learner_msg{ids_.next("msg"), Role::learner, text, clock_.now()};
  store_.append_message(learner_id, session_id, learner_msg);
  session.messages.push_back(learner_msg);

  TurnResult result;
  result.session_id = session_id;
  const auto* latest = session.latest_estimate();
  const double level = latest ? latest->combined_level : 1.0;
  const auto level_text = format_level(level);

  std::string trailing;
  const auto window = context_window(session, trailing);

  // (2) exercise feedback or tutor reply. Exercises change only on a local copy until commit.
  std::vector<Exercise> changed;
  std::optional<Exercise> active;
  if (const auto* a = session.active_exercise()) active = *a;

  std::string reply;
  if (active && active->state == ExerciseState::issued) {
    Exercise ex = *active;
    ex.record_attempt(text, clock_.now());
    result.exercise_events.push_back({ExerciseEvent::attempted, ex});
    const auto prompt = prompts_.render(PromptKind::exercise_feedback,
                                        {{"level", level_text},
                                         {"exercise_type", std::string(to_string(ex.type))},
                                         {"exercise_prompt", ex.prompt},
                                         {"attempt", text}});
    const provider::ChatRequest req(PromptKind::exercise_feedback, prompt.system, window, prompt.user,
                                    config_.max_reply_chars);
    reply = provider_.complete(req).text;
    ex.complete(reply, clock_.now());
    result.exercise_events.push_back({ExerciseEvent::completed, ex});
    changed.push_back(ex);
    active.reset();
  } else {
    std::string phrases;
    for (const auto& t : config_.triggers) phrases += (phrases.empty() ? "\"" : ", \"") + t.phrase + "\"";
    const auto prompt = prompts_.render(PromptKind::tutor_reply,
                                        {{"level", level_text},
                                         {"band", std::string(resources::to_string(resources::band_for_level(
                                                      std::clamp(level, 1.0, 14.0))))},
                                         {"trigger_phrases", phrases},
                                         {"learner_text", trailing}});
    const provider::ChatRequest req(PromptKind::tutor_reply, prompt.system, window, prompt.user,
                                    config_.max_reply_chars);
    reply = provider_.complete(req).text;
  }
  if (reply.empty()) throw provider::ProviderError(provider::ProviderError::Kind::permanent, "empty assistant reply");

  // (3) a new exercise opens only into an empty slot.
  if (const auto detected = detect_exercise(reply, config_.triggers)) {
    if (active) {
      spdlog::info("session {}: exercise detected while {} is active; ignored", session_id, active->exercise_id);
    } else {
      Exercise ex;
      ex.exercise_id = ids_.next("ex");
      ex.type = detected->type;
      ex.prompt = detected->prompt;
      ex.issued_at = clock_.now();
      result.exercise_events.push_back({ExerciseEvent::issued, ex});
      changed.push_back(ex);
      active = ex;
    }
  }

  const ChatMessage assistant_msg{ids_.next("msg"), Role::assistant, reply, clock_.now()};
  session.messages.push_back(assistant_msg);
  result.assistant_reply = reply;
  if (!result.exercise_events.empty()) result.exercise_event = result.exercise_events.back().event;
  result.active_exercise = active;

  store::SessionDelta delta;
  delta.messages.push_back(assistant_msg);
  delta.exercises = changed;

  const auto learner_text = analysis::aggregate_learner_text(session);

  // (4) improvement analysis; a failure leaves the watermark where it was.
  if (analysis::should_analyze(session, config_.analysis)) {
    try {
      auto areas = analysis::identify_improvement_areas(provider_, prompts_, learner_text, config_.analysis,
                                                        clock_.now(), session_id);
      session.analyzed_through = session.learner_message_count();
      result.recommended = recommend_areas(areas, level, config_.recommend_k);
      delta.areas = areas;
      result.analysis_event = std::move(areas);
    } catch (const Error& e) {
      spdlog::warn("session {}: improvement analysis failed: {}", session_id, e.what());
    }
  }

  // (5) word-bank refresh every message, judge + fusion on every judge_every-th.
  try {
    const bool judge = session.learner_message_count() % config_.judge_every == 0;
    auto estimate = judge ? scoring::assess_proficiency(bank_, provider_, prompts_, learner_text, clock_,
                                                        config_.scoring)
                          : scoring::wordbank_estimate(bank_, learner_text, clock_, config_.scoring);
    delta.estimates.push_back(estimate);
    result.proficiency_event = std::move(estimate);
  } catch (const scoring::NoSignal& e) {
    spdlog::info("session {}: no proficiency signal yet: {}", session_id, e.what());
  }

  // (6) one transaction for everything the turn produced.
  session.last_activity = assistant_msg.created_at;
  store_.commit(learner_id, session, delta);
  return result;
}

SessionSummary TutorEngine::end_session(const std::string& learner_id, const std::string& session_id) {
  SessionGuard guard(*this, session_id);
  Session session = store_.get_session(learner_id, session_id);
  if (session.closed()) throw SessionClosed("session " + session_id + " is already closed");

  store::SessionDelta delta;
  if (session.learner_message_count() > 0) {
    const auto learner_text = analysis::aggregate_learner_text(session);
    const auto* full = session.latest_full_estimate();
    if (full == nullptr || full->input_chars != learner_text.size()) {
      try {
        delta.estimates.push_back(
            scoring::assess_proficiency(bank_, provider_, prompts_, learner_text, clock_, config_.scoring));
      } catch (const scoring::NoSignal& e) {
        spdlog::info("session {}: no proficiency signal at end: {}", session_id, e.what());
      }
    }
  }

  std::string history;
  for (const auto& m : session.messages) {
    history += (m.role == Role::learner ? "Learner: " : "Tutor: ") + m.text + "\n";
  }
  if (history.empty()) history = "(no messages)\n";

  SessionSummary summary;
  try {
    const auto prompt = prompts_.render(PromptKind::session_summary, {{"history", history}});
    const provider::ChatRequest req(PromptKind::session_summary, prompt.system, {}, prompt.user,
                                    config_.max_reply_chars);
    summary.text = provider_.complete(req).text;
    if (summary.text.empty()) throw provider::ProviderError(provider::ProviderError::Kind::permanent, "empty summary");
  } catch (const provider::ProviderError& e) {
    spdlog::warn("session {}: summary unavailable: {}", session_id, e.what());
    summary = SessionSummary{"Summary unavailable for this session.", true};
  }

  session.summary = summary;
  session.ended_at = clock_.now();
  session.last_activity = *session.ended_at;
  store_.commit(learner_id, session, delta);
  return summary;
}

std::size_t TutorEngine::end_idle_sessions(std::chrono::milliseconds idle) {
  const auto now = clock_.now();
  std::size_t closed = 0;
  for (const auto& ref : store_.list_open_sessions()) {
    if (now - ref.last_activity < idle) continue;
    try {
      end_session(ref.learner_id, ref.session_id);
      ++closed;
    } catch (const Busy&) {
      // A turn is running, so the session is not idle after all.
    } catch (const SessionClosed&) {
    }
  }
  return closed;
}

std::vector<resources::Resource> TutorEngine::recommend_for(const std::string& learner_id, std::size_t k) {
  if (k == 0) throw ValidationError("k must be positive");
  const auto sessions = store_.list_sessions(learner_id);
  std::optional<Timestamp> latest_areas;
  const scoring::ProficiencyEstimate* latest_estimate = nullptr;
  for (const auto& s : sessions) {
    for (const auto& a : s.areas) {
      if (!latest_areas || a.detected_at > *latest_areas) latest_areas = a.detected_at;
    }
    for (const auto& e : s.estimates) {
      if (latest_estimate == nullptr || e.assessed_at >= latest_estimate->assessed_at) latest_estimate = &e;
    }
  }
  if (!latest_areas) return {};
  std::vector<ImprovementArea> areas;
  for (const auto& s : sessions) {
    for (const auto& a : s.areas) {
      if (a.detected_at == *latest_areas) areas.push_back(a);
    }
  }
  return recommend_areas(areas, latest_estimate ? latest_estimate->combined_level : 1.0, k)
      .value_or(std::vector<resources::Resource>{});
}

}  // namespace tutor::dialogue
