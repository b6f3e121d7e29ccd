#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "tutor/config.hpp"

using namespace tutor;
using namespace tutor::config;

namespace {

std::vector<std::string> fields_of(const ConfigError& e) {
  std::vector<std::string> out;
  for (const auto& i : e.issues()) out.push_back(i.field);
  return out;
}

}  // namespace

TEST(ParseDocument, ValueKinds) {
  const auto doc = parse_document(R"(
# comment
top = 1
[server]
host = "0.0.0.0"   # trailing comment
port = 9000
[scoring]
w_wb = 0.25
[dialogue]
trigger_phrases = ["rewrite:redo this", "free_response:your task is"]
[auth]
secret = "a \"quoted\" # not a comment"
flag = true
)");
  EXPECT_EQ(std::get<std::int64_t>(doc.at("top")), 1);
  EXPECT_EQ(std::get<std::string>(doc.at("server.host")), "0.0.0.0");
  EXPECT_EQ(std::get<std::int64_t>(doc.at("server.port")), 9000);
  EXPECT_EQ(std::get<double>(doc.at("scoring.w_wb")), 0.25);
  EXPECT_EQ(std::get<std::vector<std::string>>(doc.at("dialogue.trigger_phrases")).size(), 2u);
  EXPECT_EQ(std::get<std::string>(doc.at("auth.secret")), "a \"quoted\" # not a comment");
  EXPECT_TRUE(std::get<bool>(doc.at("auth.flag")));
}

TEST(ParseDocument, ReportsEveryBadLine) {
  try {
    parse_document("[ok]\na = 1\n[broken\nnot a pair\nb = @\na = 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(fields_of(e), (std::vector<std::string>{"line 3", "line 4", "line 5", "line 6"}));
  }
  EXPECT_THROW(parse_document("[s]\nx = 1\nx = 2\n"), ConfigError);
}

TEST(BuildConfig, Defaults) {
  const auto c = build_config({}, {});
  EXPECT_EQ(c.port, 8080);
  EXPECT_EQ(c.provider.kind, "mock");
  EXPECT_EQ(c.engine.context_turns, 12u);
  EXPECT_EQ(c.engine.analysis.min_new_learner_messages, 3u);
  EXPECT_EQ(c.engine.analysis.confidence_threshold, 0.3);
  EXPECT_EQ(c.engine.analysis.max_areas, 3u);
  EXPECT_EQ(c.engine.scoring.weights.w_wb, 0.4);
  EXPECT_EQ(c.engine.scoring.weights.w_llm, 0.6);
  EXPECT_EQ(c.idle_timeout, std::chrono::minutes(30));
}

TEST(BuildConfig, AppliesDocumentAndEnvironment) {
  const auto doc = parse_document(R"(
[server]
port = 9000
[scoring]
w_wb = 0.5
w_llm = 0.5
wb_statistic = "average"
[dialogue]
trigger_phrases = ["rewrite:redo this"]
[session]
idle_timeout_minutes = 5
)");
  const auto c = build_config(doc, {{"TUTOR_SERVER_PORT", "9100"},
                                    {"TUTOR_PROVIDER_KIND", "http"},
                                    {"PROVIDER_BASE_URL", "http://localhost:1234/v1"},
                                    {"PROVIDER_MODEL", "tiny"},
                                    {"PROVIDER_API_KEY", "k"},
                                    {"UNRELATED", "x"}});
  EXPECT_EQ(c.port, 9100);
  EXPECT_EQ(c.provider.kind, "http");
  EXPECT_EQ(c.provider.base_url, "http://localhost:1234/v1");
  EXPECT_EQ(c.provider.model, "tiny");
  EXPECT_EQ(c.engine.scoring.statistic, scoring::WordBankStatistic::average);
  ASSERT_EQ(c.engine.triggers.size(), 1u);
  EXPECT_EQ(c.engine.triggers[0].type, ExerciseType::rewrite);
  EXPECT_EQ(c.engine.triggers[0].phrase, "redo this");
  EXPECT_EQ(c.idle_timeout, std::chrono::minutes(5));
}

TEST(BuildConfig, CollectsAllIssues) {
  const auto doc = parse_document(R"(
[server]
port = 70000
colour = "blue"
[scoring]
w_wb = 0.9
[provider]
kind = "http"
[analysis]
confidence_threshold = "high"
)");
  try {
    build_config(doc, {});
    FAIL();
  } catch (const ConfigError& e) {
    const auto f = fields_of(e);
    for (const char* want : {"server.port", "server.colour", "scoring.w_wb", "provider.base_url", "provider.model",
                             "analysis.confidence_threshold"}) {
      EXPECT_NE(std::find(f.begin(), f.end(), want), f.end()) << want;
    }
    EXPECT_NE(e.report().find("server.colour: unknown setting"), std::string::npos);
  }
}

TEST(LoadConfig, ExampleFileIsValid) {
  const auto c = load_config(test::source_dir() / "tutor.example.toml", {});
  EXPECT_EQ(c.provider.kind, "mock");
  EXPECT_THROW(load_config(std::filesystem::path("/nonexistent/tutor.toml"), {}), ConfigError);
}
