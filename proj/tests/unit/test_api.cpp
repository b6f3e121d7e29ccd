#include <gtest/gtest.h>

#include <future>

#include "test_support.hpp"
#include "tutor/api_server.hpp"
#include "tutor/json_schema.hpp"

using namespace tutor;
using nlohmann::json;
using test::ApiHarness;

namespace {

void expect_schema(const std::string& schema, const std::string& body) {
  const auto v = json_schema::Validator::from_file(test::schema_path(schema));
  for (const auto& e : v.validate(json::parse(body))) ADD_FAILURE() << schema << " " << e.path << ": " << e.message;
}

std::string post_json(const json& body) { return body.dump(); }

struct Route {
  std::string method;
  std::string path;
};

const std::vector<Route>& authenticated_routes() {
  static const std::vector<Route> routes = {
      {"POST", "/sessions"},
      {"GET", "/sessions"},
      {"GET", "/sessions/ses-000001"},
      {"POST", "/sessions/ses-000001/messages"},
      {"POST", "/sessions/ses-000001/end"},
      {"GET", "/sessions/ses-000001/transcript"},
      {"GET", "/dashboard"},
      {"GET", "/resources/recommended"},
      {"POST", "/transcribe"},
  };
  return routes;
}

httplib::Result send(httplib::Client& c, const Route& r, const httplib::Headers& headers,
                     const std::string& body = R"({"text": "hi"})") {
  if (r.method == "GET") return c.Get(r.path, headers);
  return c.Post(r.path, headers, body, "application/json");
}

}  // namespace

TEST(StatusMapping, ExceptionTypes) {
  EXPECT_EQ(service::status_for(service::Unauthenticated("x")), 401);
  EXPECT_EQ(service::status_for(store::NotFound("x")), 404);
  EXPECT_EQ(service::status_for(store::Forbidden("x")), 404);
  EXPECT_EQ(service::status_for(dialogue::UnknownLearner("x")), 404);
  EXPECT_EQ(service::status_for(dialogue::Busy("x")), 409);
  EXPECT_EQ(service::status_for(dialogue::SessionClosed("x")), 409);
  EXPECT_EQ(service::status_for(ValidationError("x")), 422);
  EXPECT_EQ(service::status_for(NotImplemented("x")), 501);
  EXPECT_EQ(service::status_for(provider::ProviderError(provider::ProviderError::Kind::transient, "x")), 502);
  EXPECT_EQ(service::status_for(std::runtime_error("x")), 500);
}

TEST(Api, HealthAndLogin) {
  ApiHarness h(test::persona_coffee_fixtures());
  auto c = h.client();
  EXPECT_EQ(c.Get("/health")->status, 200);

  const auto first = c.Post("/auth/login", post_json({{"email", "Yuki@Example.org "}}), "application/json");
  ASSERT_EQ(first->status, 200);
  expect_schema("login", first->body);
  const auto again = c.Post("/auth/login", post_json({{"email", "yuki@example.org"}}), "application/json");
  EXPECT_EQ(json::parse(first->body)["learner_id"], json::parse(again->body)["learner_id"]);

  for (const auto& bad : {R"({"email": "nope"})", R"({"email": 3})", "{}", "not json", "[1]"}) {
    const auto res = c.Post("/auth/login", bad, "application/json");
    EXPECT_EQ(res->status, 422) << bad;
    expect_schema("error", res->body);
  }
}

TEST(Api, EveryRouteRequiresAuth) {
  ApiHarness h(test::persona_coffee_fixtures());
  auto c = h.client();
  const std::vector<httplib::Headers> bad_headers = {
      {}, {{"Authorization", "Bearer"}}, {{"Authorization", "Bearer junk"}}, {{"Authorization", "Basic abc"}}};
  for (const auto& route : authenticated_routes()) {
    for (const auto& headers : bad_headers) {
      const auto res = send(c, route, headers);
      ASSERT_TRUE(res) << route.path;
      EXPECT_EQ(res->status, 401) << route.method << " " << route.path;
      expect_schema("error", res->body);
    }
  }
}

TEST(Api, ForeignAndMissingSessionsAre404) {
  ApiHarness h(test::persona_coffee_fixtures());
  auto c = h.client();
  const auto alice = ApiHarness::bearer(h.login("alice@example.org"));
  const auto bob = ApiHarness::bearer(h.login("bob@example.org"));
  const auto created = c.Post("/sessions", alice, "", "application/json");
  ASSERT_EQ(created->status, 201);
  const auto id = json::parse(created->body)["session_id"].get<std::string>();

  for (const auto& suffix : {"", "/messages", "/end", "/transcript", "/transcript?format=text"}) {
    const Route r{std::string(suffix) == "/messages" || std::string(suffix) == "/end" ? "POST" : "GET",
                  "/sessions/" + id + suffix};
    const auto foreign = send(c, r, bob);
    EXPECT_EQ(foreign->status, 404) << r.path;
    const Route missing{r.method, "/sessions/ses-999999" + std::string(suffix)};
    const auto absent = send(c, missing, bob);
    EXPECT_EQ(absent->status, 404) << missing.path;
    EXPECT_EQ(foreign->body, absent->body);
  }
  EXPECT_TRUE(h.base.store.get_session(h.base.store.find_learner_by_email("alice@example.org")->learner_id, id)
                  .messages.empty());
}

TEST(Api, ConcurrentMessageIs409) {
  ApiHarness h(test::persona_coffee_fixtures(), true);
  auto c = h.client();
  const auto auth = ApiHarness::bearer(h.login("yuki@example.org"));
  const auto id = json::parse(c.Post("/sessions", auth, "", "application/json")->body)["session_id"].get<std::string>();
  const auto path = "/sessions/" + id + "/messages";

  auto first = std::async(std::launch::async, [&] {
    auto c1 = h.client();
    return c1.Post(path, auth, post_json({{"text", "i want coffee"}}), "application/json")->status;
  });
  h.gate.wait_until_entered();
  const auto second = c.Post(path, auth, post_json({{"text", "hello?"}}), "application/json");
  EXPECT_EQ(second->status, 409);
  expect_schema("error", second->body);
  h.gate.release();
  EXPECT_EQ(first.get(), 200);
}

TEST(Api, ValidationAndClosedSessions) {
  ApiHarness h(test::persona_coffee_fixtures());
  auto c = h.client();
  const auto auth = ApiHarness::bearer(h.login("yuki@example.org"));
  const auto id = json::parse(c.Post("/sessions", auth, "", "application/json")->body)["session_id"].get<std::string>();
  EXPECT_EQ(c.Post("/sessions/" + id + "/messages", auth, R"({"text": ""})", "application/json")->status, 422);
  EXPECT_EQ(c.Post("/sessions/" + id + "/messages", auth, R"({"txt": "x"})", "application/json")->status, 422);
  EXPECT_EQ(c.Get("/sessions/" + id + "/transcript?format=pdf", auth)->status, 422);
  EXPECT_EQ(c.Get("/resources/recommended?k=0", auth)->status, 422);
  EXPECT_EQ(c.Post("/transcribe", auth, "RIFF", "audio/wav")->status, 501);

  const auto end = c.Post("/sessions/" + id + "/end", auth, "", "application/json");
  ASSERT_EQ(end->status, 200);
  expect_schema("summary", end->body);
  EXPECT_EQ(c.Post("/sessions/" + id + "/end", auth, "", "application/json")->status, 409);
  EXPECT_EQ(c.Post("/sessions/" + id + "/messages", auth, R"({"text": "x"})", "application/json")->status, 409);
}

TEST(Api, ProviderFailureIs502) {
  auto f = test::persona_coffee_fixtures();
  f.erase(provider::PromptKind::tutor_reply);
  ApiHarness h(f);
  auto c = h.client();
  const auto auth = ApiHarness::bearer(h.login("yuki@example.org"));
  const auto id = json::parse(c.Post("/sessions", auth, "", "application/json")->body)["session_id"].get<std::string>();
  const auto res = c.Post("/sessions/" + id + "/messages", auth, R"({"text": "hello"})", "application/json");
  EXPECT_EQ(res->status, 502);
  expect_schema("error", res->body);
}

TEST(Api, EndToEndPersonaFlow) {
  ApiHarness h(test::persona_coffee_fixtures());
  auto c = h.client();
  const auto auth = ApiHarness::bearer(h.login("yuki@example.org"));

  const auto created = c.Post("/sessions", auth, "", "application/json");
  ASSERT_EQ(created->status, 201);
  expect_schema("session_created", created->body);
  const auto id = json::parse(created->body)["session_id"].get<std::string>();

  std::vector<json> turns;
  for (const auto& m : test::persona_coffee_messages()) {
    const auto res = c.Post("/sessions/" + id + "/messages", auth, post_json({{"text", m}}), "application/json");
    ASSERT_EQ(res->status, 200) << res->body;
    expect_schema("turn_result", res->body);
    turns.push_back(json::parse(res->body));
  }
  EXPECT_EQ(turns[0]["exercise_event"], "issued");
  EXPECT_EQ(turns[1]["exercise_event"], "completed");
  EXPECT_TRUE(turns[1]["analysis_event"].is_null());
  ASSERT_TRUE(turns[2]["analysis_event"].is_array());
  EXPECT_EQ(turns[2]["analysis_event"].size(), 2u);

  const auto dash = c.Get("/dashboard", auth);
  ASSERT_EQ(dash->status, 200);
  expect_schema("dashboard", dash->body);
  EXPECT_EQ(json::parse(dash->body)["exercise_counts"]["completed"], 1);

  const auto recs = c.Get("/resources/recommended?k=2", auth);
  ASSERT_EQ(recs->status, 200);
  expect_schema("recommended", recs->body);
  EXPECT_EQ(json::parse(recs->body)["recommended"].size(), 2u);

  const auto list = c.Get("/sessions", auth);
  expect_schema("session_list", list->body);
  EXPECT_EQ(json::parse(list->body)["sessions"][0]["message_count"], 6);

  ASSERT_EQ(c.Post("/sessions/" + id + "/end", auth, "", "application/json")->status, 200);
  const auto transcript = c.Get("/sessions/" + id + "/transcript", auth);
  ASSERT_EQ(transcript->status, 200);
  EXPECT_EQ(transcript->get_header_value("Content-Disposition"), "attachment; filename=\"" + id + ".json\"");
  expect_schema("transcript", transcript->body);
  const auto session = c.Get("/sessions/" + id, auth);
  expect_schema("transcript", session->body);

  const auto text = c.Get("/sessions/" + id + "/transcript?format=text", auth);
  ASSERT_EQ(text->status, 200);
  EXPECT_EQ(text->get_header_value("Content-Type"), "text/plain; charset=utf-8");
  EXPECT_EQ(std::count(text->body.begin(), text->body.end(), '\n'), 6);
  EXPECT_EQ(text->body.rfind("[09:00] Learner: i want coffee\n", 0), 0u);
}
