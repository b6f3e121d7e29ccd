#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "test_support.hpp"
#include "tutor/dialogue.hpp"
#include "tutor/serialization.hpp"

using namespace tutor;
using namespace tutor::dialogue;
using namespace std::chrono_literals;
using provider::PromptKind;

namespace {

std::size_t calls_of(const provider::ScriptedProvider& p, PromptKind kind) {
  std::size_t n = 0;
  for (const auto& c : p.calls()) n += c.kind() == kind;
  return n;
}

std::vector<std::string> event_names(const TurnResult& r) {
  std::vector<std::string> out;
  for (const auto& t : r.exercise_events) out.emplace_back(to_string(t.event));
  return out;
}

provider::Fixtures chatty_fixtures() {
  return {{PromptKind::tutor_reply, {"That sounds nice. Tell me more."}},
          {PromptKind::level_judge, {"7"}},
          {PromptKind::improvement_analysis, {R"([{"area": "Tenses", "confidence": 0.8, "examples": []}])"}},
          {PromptKind::session_summary, {"We chatted."}}};
}

}  // namespace

TEST(DetectExercise, ReplyTable) {
  using T = ExerciseType;
  struct Case {
    const char* reply;
    std::optional<T> type;
  };
  const std::vector<Case> cases = {
      {"Fill in the blank: I ___ a student.", T::fill_in_blank},
      {"FILL IN THE BLANK with the right word.", T::fill_in_blank},
      {"Now, rewrite the sentence in the past tense.", T::rewrite},
      {"Choose the correct option: a) go b) goes", T::multiple_choice},
      {"Which of the following is correct?", T::multiple_choice},
      {"Your task is to describe your morning.", T::free_response},
      {"Let's try this exercise: write two sentences.", T::free_response},
      {"Complete the sentence: If I were rich, ...", T::fill_in_blank},
      {"Great job! Complete the sentence below.", T::fill_in_blank},
      {"Rewrite the sentence, then fill in the blank.", T::rewrite},
      {"Fill in the blank, or rewrite the sentence.", T::fill_in_blank},
      {"Your task is: choose the correct verb.", T::free_response},
      {"Which of the following... no wait, fill in the blank.", T::multiple_choice},
      {"Here is one: \"She ___ (go) home.\" Fill in the blank!", T::fill_in_blank},
      {"Try this exercise.", T::free_response},
      {"try   this exercise", std::nullopt},
      {"Fill-in-the-blank practice is fun.", std::nullopt},
      {"That is correct, well done!", std::nullopt},
      {"You chose the right answer.", std::nullopt},
      {"Which one do you prefer, tea or coffee?", std::nullopt},
      {"Your sentence is great.", std::nullopt},
      {"I'd say: rewrite it.", std::nullopt},
      {"", std::nullopt},
      {"Can you complete this sentence for me?", std::nullopt},
      {"CHOOSE THE CORRECT ANSWER", T::multiple_choice},
      {"Exercise time! Your task is simple.", T::free_response},
      {"Please rewrite the sentences below.", T::rewrite},
      {"blank", std::nullopt},
      {"First, which of the following words is a noun?", T::multiple_choice},
      {"Let's practise. Can you fill in the blanks?", T::fill_in_blank},
  };
  ASSERT_EQ(cases.size(), 30u);
  for (const auto& c : cases) {
    const auto got = detect_exercise(c.reply);
    ASSERT_EQ(got.has_value(), c.type.has_value()) << c.reply;
    if (got) {
      EXPECT_EQ(got->type, *c.type) << c.reply;
      EXPECT_EQ(got->prompt, c.reply);
    }
  }
}

TEST(DetectExercise, CustomTriggersAndTieBreak) {
  const std::vector<TriggerPhrase> t = {{"fill in", ExerciseType::free_response},
                                        {"fill in the gap", ExerciseType::fill_in_blank}};
  EXPECT_EQ(detect_exercise("Fill in the gap please", t)->type, ExerciseType::fill_in_blank);
  EXPECT_EQ(detect_exercise("fill in this", t)->type, ExerciseType::free_response);
}

TEST(EngineConfig, Validation) {
  EngineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.context_turns = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.scoring.weights = {0.5, 0.6};
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Engine, PersonaLifecycle) {
  test::Harness h(test::persona_coffee_fixtures());
  const auto& learner = h.learners[0];
  const auto s = h.engine->start_session(learner);
  const auto& msgs = test::persona_coffee_messages();

  const auto r1 = h.engine->handle_learner_message(learner, s.session_id, msgs[0]);
  EXPECT_EQ(event_names(r1), (std::vector<std::string>{"issued"}));
  EXPECT_EQ(r1.exercise_event, ExerciseEvent::issued);
  ASSERT_TRUE(r1.active_exercise);
  EXPECT_EQ(r1.active_exercise->type, ExerciseType::fill_in_blank);
  EXPECT_FALSE(r1.analysis_event);

  const auto r2 = h.engine->handle_learner_message(learner, s.session_id, msgs[1]);
  EXPECT_EQ(event_names(r2), (std::vector<std::string>{"attempted", "completed"}));
  EXPECT_EQ(r2.exercise_event, ExerciseEvent::completed);
  EXPECT_FALSE(r2.active_exercise);
  EXPECT_EQ(r2.assistant_reply, test::persona_coffee_fixtures()[PromptKind::exercise_feedback][0]);
  EXPECT_EQ(r2.exercise_events[1].exercise.feedback, r2.assistant_reply);
  EXPECT_EQ(r2.exercise_events[1].exercise.attempt, msgs[1]);

  const auto r3 = h.engine->handle_learner_message(learner, s.session_id, msgs[2]);
  EXPECT_TRUE(r3.exercise_events.empty());
  ASSERT_TRUE(r3.analysis_event);
  ASSERT_EQ(r3.analysis_event->size(), 2u);
  EXPECT_EQ((*r3.analysis_event)[0].area, "Subject–Verb Agreement");
  ASSERT_TRUE(r3.recommended);
  EXPECT_EQ(r3.recommended->size(), 3u);
  for (const auto& r : *r3.recommended) {
    EXPECT_TRUE(r.area == "Subject–Verb Agreement" || r.area == "Articles") << r.area;
  }
  ASSERT_TRUE(r3.proficiency_event);
  EXPECT_EQ(r3.proficiency_event->kind, scoring::EstimateKind::full);
  EXPECT_EQ(r3.proficiency_event->llm_level, 4.0);

  const auto stored = h.store.get_session(learner, s.session_id);
  ASSERT_EQ(stored.exercises.size(), 1u);
  EXPECT_EQ(stored.exercises[0].state, ExerciseState::completed);
  EXPECT_EQ(stored.messages.size(), 6u);
  EXPECT_EQ(stored.analyzed_through, 3u);

  const auto summary = h.engine->end_session(learner, s.session_id);
  EXPECT_FALSE(summary.degraded);
  EXPECT_THROW(h.engine->end_session(learner, s.session_id), SessionClosed);
  EXPECT_THROW(h.engine->handle_learner_message(learner, s.session_id, "hello?"), SessionClosed);
}

TEST(Engine, GoldenTranscriptIsByteIdentical) {
  const auto first = test::run_persona_transcript();
  for (int i = 0; i < 2; ++i) EXPECT_EQ(test::run_persona_transcript(), first);
  const auto doc = nlohmann::json::parse(first);
  EXPECT_EQ(doc["exercises"].size(), 1u);
  EXPECT_EQ(doc["exercises"][0]["state"], "completed");
}

TEST(Engine, AtMostOneActiveExercise) {
  provider::Fixtures f = chatty_fixtures();
  f[PromptKind::tutor_reply] = {"Fill in the blank: I ___ tea.", "Rewrite the sentence: he go.",
                                "Your task is to write a haiku."};
  f[PromptKind::exercise_feedback] = {"Good. Now, which of the following is right?"};
  test::Harness h(f);
  const auto s = h.engine->start_session(h.learners[0]);
  for (int i = 0; i < 12; ++i) {
    const auto r = h.engine->handle_learner_message(h.learners[0], s.session_id, "answer number " + std::to_string(i));
    const auto stored = h.store.get_session(h.learners[0], s.session_id);
    const auto active = std::count_if(stored.exercises.begin(), stored.exercises.end(),
                                      [](const Exercise& e) { return e.active(); });
    ASSERT_LE(active, 1);
    for (const auto& e : stored.exercises) ASSERT_NE(e.state, ExerciseState::attempted);
  }
}

TEST(Engine, AnalysisGatedOnThirdMessage) {
  test::Harness h(chatty_fixtures());
  const auto s = h.engine->start_session(h.learners[0]);
  for (int i = 1; i <= 7; ++i) {
    const auto r = h.engine->handle_learner_message(h.learners[0], s.session_id, "I goed home " + std::to_string(i));
    EXPECT_EQ(r.analysis_event.has_value(), i % 3 == 0) << i;
    EXPECT_EQ(calls_of(*h.provider, PromptKind::improvement_analysis), static_cast<std::size_t>(i / 3)) << i;
  }
}

TEST(Engine, AnalysisFailureRetriesNextTurn) {
  auto f = chatty_fixtures();
  f[PromptKind::improvement_analysis] = {"no json", R"([{"area": "Tenses", "confidence": 0.8, "examples": []}])"};
  test::Harness h(f);
  const auto s = h.engine->start_session(h.learners[0]);
  for (int i = 0; i < 3; ++i) h.engine->handle_learner_message(h.learners[0], s.session_id, "go home");
  EXPECT_EQ(h.store.get_session(h.learners[0], s.session_id).analyzed_through, 0u);
  const auto r = h.engine->handle_learner_message(h.learners[0], s.session_id, "go home");
  ASSERT_TRUE(r.analysis_event);
  EXPECT_EQ(h.store.get_session(h.learners[0], s.session_id).analyzed_through, 4u);
}

TEST(Engine, JudgeCadence) {
  test::Harness h(chatty_fixtures());
  const auto s = h.engine->start_session(h.learners[0]);
  for (int i = 1; i <= 6; ++i) {
    const auto r = h.engine->handle_learner_message(h.learners[0], s.session_id, "I want coffee");
    ASSERT_TRUE(r.proficiency_event);
    EXPECT_EQ(r.proficiency_event->kind, i % 3 == 0 ? scoring::EstimateKind::full : scoring::EstimateKind::wordbank);
  }
  EXPECT_EQ(calls_of(*h.provider, PromptKind::level_judge), 2u);
  h.engine->end_session(h.learners[0], s.session_id);
  EXPECT_EQ(calls_of(*h.provider, PromptKind::level_judge), 2u);  // text unchanged since the last judge
}

TEST(Engine, EndSessionRunsFinalJudgeWhenStale) {
  test::Harness h(chatty_fixtures());
  const auto s = h.engine->start_session(h.learners[0]);
  h.engine->handle_learner_message(h.learners[0], s.session_id, "I want coffee");
  h.engine->end_session(h.learners[0], s.session_id);
  const auto stored = h.store.get_session(h.learners[0], s.session_id);
  ASSERT_NE(stored.latest_full_estimate(), nullptr);
  EXPECT_EQ(stored.latest_full_estimate()->llm_level, 7.0);
  EXPECT_TRUE(stored.closed());
}

TEST(Engine, ProviderFailureIsAtomic) {
  auto f = chatty_fixtures();
  f.erase(PromptKind::tutor_reply);
  test::Harness h(f);
  const auto s = h.engine->start_session(h.learners[0]);
  EXPECT_THROW(h.engine->handle_learner_message(h.learners[0], s.session_id, "hello"), provider::ProviderError);
  EXPECT_THROW(h.engine->handle_learner_message(h.learners[0], s.session_id, "anyone?"), provider::ProviderError);
  const auto stored = h.store.get_session(h.learners[0], s.session_id);
  ASSERT_EQ(stored.messages.size(), 2u);
  EXPECT_EQ(stored.messages[0].role, provider::Role::learner);
  EXPECT_TRUE(stored.exercises.empty());
  EXPECT_TRUE(stored.estimates.empty());
  EXPECT_TRUE(stored.areas.empty());
}

TEST(Engine, RetryAfterFailureMergesLearnerTurns) {
  auto f = chatty_fixtures();
  f[PromptKind::tutor_reply] = {""};
  test::Harness h(f);
  const auto s = h.engine->start_session(h.learners[0]);
  EXPECT_THROW(h.engine->handle_learner_message(h.learners[0], s.session_id, "first"), provider::ProviderError);

  test::Harness ok(chatty_fixtures());
  const auto s2 = ok.engine->start_session(ok.learners[0]);
  ok.store.append_message(ok.learners[0], s2.session_id, {"dangling", provider::Role::learner, "first", ok.clock.now()});
  ok.engine->handle_learner_message(ok.learners[0], s2.session_id, "second");
  const auto req = ok.provider->calls().at(0);
  EXPECT_TRUE(req.history().empty());
  EXPECT_EQ(req.user_text(), "first\nsecond");
}

TEST(Engine, ContextWindowBounded) {
  EngineConfig cfg;
  cfg.context_turns = 4;
  test::Harness h(chatty_fixtures(), cfg);
  const auto s = h.engine->start_session(h.learners[0]);
  for (int i = 0; i < 8; ++i) h.engine->handle_learner_message(h.learners[0], s.session_id, "turn " + std::to_string(i));
  std::vector<provider::ChatRequest> replies;
  for (const auto& c : h.provider->calls()) {
    if (c.kind() == PromptKind::tutor_reply) replies.push_back(c);
  }
  ASSERT_EQ(replies.size(), 8u);
  for (std::size_t i = 0; i < replies.size(); ++i) {
    EXPECT_EQ(replies[i].history().size(), std::min<std::size_t>(2 * i, 4));
    EXPECT_EQ(replies[i].user_text(), "turn " + std::to_string(i));
  }
  EXPECT_EQ(replies[7].history().front().text, "turn 5");
}

TEST(Engine, ConcurrentTurnIsBusy) {
  test::Harness h(chatty_fixtures());
  test::GatedProvider gate(*h.provider);
  TutorEngine engine(h.store, gate, h.bank, &h.catalog, provider::PromptLibrary::builtin(), h.clock, h.ids);
  const auto s = engine.start_session(h.learners[0]);
  auto first = std::async(std::launch::async,
                          [&] { return engine.handle_learner_message(h.learners[0], s.session_id, "one"); });
  gate.wait_until_entered();
  EXPECT_THROW(engine.handle_learner_message(h.learners[0], s.session_id, "two"), Busy);
  EXPECT_THROW(engine.end_session(h.learners[0], s.session_id), Busy);
  gate.release();
  EXPECT_EQ(first.get().assistant_reply, "That sounds nice. Tell me more.");
  EXPECT_NO_THROW(engine.handle_learner_message(h.learners[0], s.session_id, "two"));
}

TEST(Engine, ParallelSessionsDoNotBlock) {
  test::Harness h(chatty_fixtures(), {}, {"a@example.org", "b@example.org"});
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (const auto& learner : h.learners) {
    threads.emplace_back([&, learner] {
      const auto s = h.engine->start_session(learner);
      for (int i = 0; i < 10; ++i) {
        h.engine->handle_learner_message(learner, s.session_id, "hello " + std::to_string(i));
        ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok, 20);
}

TEST(Engine, ErrorsAndOwnership) {
  test::Harness h(chatty_fixtures(), {}, {"a@example.org", "b@example.org"});
  EXPECT_THROW(h.engine->start_session("nobody"), UnknownLearner);
  const auto s = h.engine->start_session(h.learners[0]);
  EXPECT_THROW(h.engine->handle_learner_message(h.learners[0], s.session_id, "  \n"), ValidationError);
  EXPECT_THROW(h.engine->handle_learner_message(h.learners[1], s.session_id, "hi"), store::Forbidden);
  EXPECT_THROW(h.engine->handle_learner_message(h.learners[0], "ses-missing", "hi"), store::NotFound);
  EXPECT_THROW(h.engine->end_session(h.learners[1], s.session_id), store::Forbidden);
}

TEST(Engine, DegradedSummary) {
  auto f = chatty_fixtures();
  f.erase(PromptKind::session_summary);
  test::Harness h(f);
  const auto s = h.engine->start_session(h.learners[0]);
  const auto summary = h.engine->end_session(h.learners[0], s.session_id);
  EXPECT_TRUE(summary.degraded);
  EXPECT_EQ(summary.text, "Summary unavailable for this session.");
  EXPECT_TRUE(h.store.get_session(h.learners[0], s.session_id).closed());
}

TEST(Engine, IdleSessionsEnd) {
  test::Harness h(chatty_fixtures());
  const auto idle = h.engine->start_session(h.learners[0]);
  h.clock.advance(40min);
  const auto fresh = h.engine->start_session(h.learners[0]);
  EXPECT_EQ(h.engine->end_idle_sessions(30min), 1u);
  EXPECT_TRUE(h.store.get_session(h.learners[0], idle.session_id).closed());
  EXPECT_FALSE(h.store.get_session(h.learners[0], fresh.session_id).closed());
}

TEST(Engine, RecommendForLatestAnalysis) {
  test::Harness h(test::persona_coffee_fixtures());
  EXPECT_TRUE(h.engine->recommend_for(h.learners[0], 3).empty());
  const auto s = h.engine->start_session(h.learners[0]);
  for (const auto& m : test::persona_coffee_messages()) h.engine->handle_learner_message(h.learners[0], s.session_id, m);
  const auto recs = h.engine->recommend_for(h.learners[0], 2);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].area, "Subject–Verb Agreement");
}

TEST(Engine, TurnResultJson) {
  test::Harness h(test::persona_coffee_fixtures());
  const auto s = h.engine->start_session(h.learners[0]);
  const nlohmann::json j =
      h.engine->handle_learner_message(h.learners[0], s.session_id, test::persona_coffee_messages()[0]);
  EXPECT_EQ(j["exercise_event"], "issued");
  EXPECT_TRUE(j["analysis_event"].is_null());
  EXPECT_TRUE(j["recommended"].is_null());
  EXPECT_EQ(j["active_exercise"]["exercise_type"], "fill_in_blank");
}
