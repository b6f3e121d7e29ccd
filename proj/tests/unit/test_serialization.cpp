#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tutor/serialization.hpp"

using namespace tutor;
using nlohmann::json;
using namespace std::chrono_literals;

TEST(Timestamps, Iso8601RoundTrip) {
  const auto t = test::epoch() + 1234ms;
  EXPECT_EQ(format_iso8601(t), "2026-01-05T09:00:01.234Z");
  EXPECT_EQ(parse_iso8601(format_iso8601(t)), t);
  EXPECT_EQ(parse_iso8601("2026-01-05T09:00:00Z"), test::epoch());
  EXPECT_THROW(parse_iso8601("yesterday"), ValidationError);
  EXPECT_EQ(format_hh_mm(t), "09:00");
}

TEST(Serialization, ExerciseRoundTrip) {
  Exercise e{"ex-1", ExerciseType::multiple_choice, "Choose the correct one", ExerciseState::issued,
             {}, {}, test::epoch(), {}, {}};
  EXPECT_EQ(json(e).get<Exercise>(), e);
  e.record_attempt("b", test::epoch() + 1s);
  e.complete("right", test::epoch() + 2s);
  EXPECT_EQ(json(e).get<Exercise>(), e);
  EXPECT_EQ(json(e)["state"], "completed");
  EXPECT_THROW(e.record_attempt("again", test::epoch()), InvalidTransition);
}

TEST(Serialization, EstimateRoundTrip) {
  scoring::ProficiencyEstimate e;
  e.wordbank = scoring::WordBankScore{{{"coffee", 5}}, 3, 5.0, 5.0, 1.0 / 3.0};
  e.wordbank_level = 5.0;
  e.llm_level = 10.0;
  e.combined_level = 8.0;
  e.assessed_at = test::epoch();
  e.input_chars = 12;
  const auto back = json(e).get<scoring::ProficiencyEstimate>();
  EXPECT_EQ(back.wordbank, e.wordbank);
  EXPECT_EQ(back.llm_level, 10.0);
  EXPECT_EQ(back.combined_level, 8.0);
  EXPECT_TRUE(json(e)["degraded_reason"].is_null());
}

TEST(Serialization, SessionDocumentShape) {
  Session s;
  s.session_id = "ses-1";
  s.learner_id = "lrn-1";
  s.started_at = test::epoch();
  s.messages = {{"m1", provider::Role::learner, "hi", test::epoch()}};
  s.areas = {{"Articles", 0.5, {"a apple"}, test::epoch(), "ses-1"}};
  const json j = s;
  EXPECT_TRUE(j["ended_at"].is_null());
  EXPECT_TRUE(j["summary"].is_null());
  EXPECT_EQ(j["messages"][0]["role"], "learner");
  const auto back = j.get<Session>();
  EXPECT_EQ(back.areas, s.areas);
  EXPECT_EQ(back.messages[0].text, "hi");
  EXPECT_THROW(json::parse(R"({"role": "robot", "text": "x", "created_at": "2026-01-05T09:00:00Z"})").get<ChatMessage>(),
               ValidationError);
}

TEST(Serialization, ResourceJson) {
  const resources::Resource r{"Idioms", "video", "T", "D", "https://example.org", resources::Band::advanced};
  EXPECT_EQ(json(r), json::parse(R"({"area": "Idioms", "resource_type": "video", "title": "T", "description": "D",
                                     "url": "https://example.org", "difficulty_level": "advanced"})"));
}
