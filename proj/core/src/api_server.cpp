#include "tutor/api_server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

#include "tutor/serialization.hpp"

namespace tutor::service {

using nlohmann::json;

int status_for(const std::exception& e) {
  if (dynamic_cast<const Unauthenticated*>(&e)) return 401;
  if (dynamic_cast<const store::NotFound*>(&e) || dynamic_cast<const store::Forbidden*>(&e) ||
      dynamic_cast<const dialogue::UnknownLearner*>(&e)) {
    return 404;
  }
  if (dynamic_cast<const dialogue::Busy*>(&e) || dynamic_cast<const dialogue::SessionClosed*>(&e) ||
      dynamic_cast<const store::Conflict*>(&e)) {
    return 409;
  }
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const json::exception*>(&e)) return 422;
  if (dynamic_cast<const NotImplemented*>(&e)) return 501;
  if (dynamic_cast<const provider::ProviderError*>(&e)) return 502;
  return 500;
}

namespace {

std::string_view code_for(int status) {
  switch (status) {
    case 401:
      return "unauthenticated";
    case 404:
      return "not_found";
    case 409:
      return "conflict";
    case 422:
      return "validation_error";
    case 501:
      return "not_implemented";
    case 502:
      return "provider_error";
    default:
      return "internal_error";
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", {{"code", code_for(status)}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw ValidationError("request body must be a JSON object");
  return body;
}

std::string required_string(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::string normalize_email(std::string email) {
  const auto b = email.find_first_not_of(" \t\r\n");
  const auto e = email.find_last_not_of(" \t\r\n");
  email = b == std::string::npos ? std::string() : email.substr(b, e - b + 1);
  std::transform(email.begin(), email.end(), email.begin(), [](unsigned char c) { return std::tolower(c); });
  return email;
}

}  // namespace

struct ApiServer::Impl {
  explicit Impl(ServiceContext c) : ctx(c) {}

  ServiceContext ctx;
  httplib::Server server;
  std::thread thread;

  std::string learner_of(const httplib::Request& req) {
    const auto header = req.get_header_value("Authorization");
    constexpr std::string_view scheme = "Bearer ";
    if (header.size() <= scheme.size() || header.compare(0, scheme.size(), scheme) != 0) {
      throw Unauthenticated("missing bearer token");
    }
    auto learner = ctx.signer.verify(std::string_view(header).substr(scheme.size()));
    if (!learner) throw Unauthenticated("invalid or expired token");
    return *learner;
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  httplib::Server::Handler wrap(Handler fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const std::exception& e) {
        const int status = status_for(e);
        if (status >= 500) spdlog::error("{} {} -> {}: {}", req.method, req.path, status, e.what());
        // Foreign and missing records share one message so responses do not reveal which it was.
        send_error(res, status, status == 404 ? "not found" : e.what());
      }
    };
  }

  void routes() {
    server.Get("/health", wrap([](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); }));

    server.Post("/auth/login", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      const auto email = normalize_email(required_string(body, "email"));
      if (!auth::plausible_email(email)) throw ValidationError("email is not valid");
      auto learner = ctx.store.find_learner_by_email(email);
      if (!learner) {
        LearnerProfile p;
        p.learner_id = ctx.ids.next("lrn");
        p.email = email;
        p.display_name = body.contains("display_name") && body["display_name"].is_string()
                             ? body["display_name"].get<std::string>()
                             : email.substr(0, email.find('@'));
        p.created_at = ctx.clock.now();
        try {
          ctx.store.create_learner(p);
          learner = p;
        } catch (const store::Conflict&) {
          learner = ctx.store.find_learner_by_email(email);  // a concurrent login created it
          if (!learner) throw;
        }
      }
      send_json(res, 200, {{"token", ctx.signer.issue(learner->learner_id)}, {"learner_id", learner->learner_id}});
    }));

    server.Post("/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = learner_of(req);
      const auto s = ctx.engine.start_session(learner);
      send_json(res, 201, {{"session_id", s.session_id}, {"started_at", format_iso8601(s.started_at)}});
    }));

    server.Get("/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = learner_of(req);
      json list = json::array();
      for (const auto& s : ctx.store.list_sessions(learner)) {
        list.push_back({{"session_id", s.session_id},
                        {"started_at", format_iso8601(s.started_at)},
                        {"ended_at", timestamp_json(s.ended_at)},
                        {"message_count", s.messages.size()},
                        {"summary", s.summary ? json(s.summary->text) : json(nullptr)}});
      }
      send_json(res, 200, {{"sessions", std::move(list)}});
    }));

    server.Get(R"(/sessions/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = learner_of(req);
      send_json(res, 200, json(ctx.store.get_session(learner, req.matches[1].str())));
    }));

    server.Post(R"(/sessions/([^/]+)/messages)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = learner_of(req);
      const auto body = parse_body(req);
      const auto text = required_string(body, "text");
      const auto result = ctx.engine.handle_learner_message(learner, req.matches[1].str(), text);
      send_json(res, 200, json(result));
    }));

    server.Post(R"(/sessions/([^/]+)/end)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = learner_of(req);
      const auto summary = ctx.engine.end_session(learner, req.matches[1].str());
      send_json(res, 200, {{"summary", summary.text}, {"degraded", summary.degraded}});
    }));

    server.Get(R"(/sessions/([^/]+)/transcript)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = learner_of(req);
      const auto name = req.has_param("format") ? req.get_param_value("format") : std::string("json");
      const auto format = store::parse_transcript_format(name);
      if (!format) throw ValidationError("format must be json or text");
      const auto id = req.matches[1].str();
      const auto doc = store::export_transcript(ctx.store, learner, id, *format);
      res.status = 200;
      res.set_header("Content-Disposition", "attachment; filename=\"" + id +
                                                (*format == store::TranscriptFormat::json ? ".json\"" : ".txt\""));
      res.set_content(doc, *format == store::TranscriptFormat::json ? "application/json" : "text/plain; charset=utf-8");
    }));

    server.Get("/dashboard", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = learner_of(req);
      send_json(res, 200, json(store::dashboard_data(ctx.store, learner)));
    }));

    server.Get("/resources/recommended", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto learner = learner_of(req);
      std::size_t k = ctx.engine.config().recommend_k;
      if (req.has_param("k")) {
        const auto text = req.get_param_value("k");
        const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
        if (ec != std::errc{} || p != text.data() + text.size() || k == 0 || k > 100) {
          throw ValidationError("k must be an integer in [1,100]");
        }
      }
      send_json(res, 200, {{"recommended", ctx.engine.recommend_for(learner, k)}});
    }));

    server.Post("/transcribe", wrap([this](const httplib::Request& req, httplib::Response& res) {
      learner_of(req);
      const auto text = ctx.transcriber.transcribe(req.body, req.get_header_value("Content-Type"));
      send_json(res, 200, {{"text", text}});
    }));
  }
};

ApiServer::ApiServer(ServiceContext ctx) : impl_(std::make_unique<Impl>(ctx)) {
  impl_->server.set_payload_max_length(1 << 20);
  impl_->routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

int ApiServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

IdleSweeper::IdleSweeper(dialogue::TutorEngine& engine, std::chrono::milliseconds idle,
                         std::chrono::milliseconds interval)
    : engine_(engine), idle_(idle), interval_(interval), thread_([this] { run(); }) {}

IdleSweeper::~IdleSweeper() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void IdleSweeper::run() {
  std::unique_lock lock(mu_);
  while (!cv_.wait_for(lock, interval_, [this] { return stopping_; })) {
    lock.unlock();
    try {
      if (const auto n = engine_.end_idle_sessions(idle_)) spdlog::info("closed {} idle session(s)", n);
    } catch (const std::exception& e) {
      spdlog::warn("idle sweep failed: {}", e.what());
    }
    lock.lock();
  }
}

}  // namespace tutor::service
