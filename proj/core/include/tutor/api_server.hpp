#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "tutor/auth.hpp"
#include "tutor/dialogue.hpp"
#include "tutor/store.hpp"
#include "tutor/transcription.hpp"

namespace tutor::service {

struct ServiceContext {
  store::Store& store;
  dialogue::TutorEngine& engine;
  auth::TokenSigner& signer;
  Clock& clock;
  IdGenerator& ids;
  transcription::Transcriber& transcriber;
};

/// HTTP status for an exception escaping a handler:
/// 401 unauthenticated, 404 not found or foreign, 409 busy or closed,
/// 422 validation, 501 not implemented, 502 provider failure, 500 otherwise.
int status_for(const std::exception& e);

class Unauthenticated : public Error {
 public:
  using Error::Error;
};

/// JSON API over cpp-httplib. Routes:
///   POST /auth/login, POST /sessions, GET /sessions, GET /sessions/{id},
///   POST /sessions/{id}/messages, POST /sessions/{id}/end,
///   GET /sessions/{id}/transcript, GET /dashboard,
///   GET /resources/recommended, POST /transcribe, GET /health.
class ApiServer {
 public:
  explicit ApiServer(ServiceContext ctx);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void listen();
  /// bind + listen on a background thread; returns the bound port once ready.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Background thread closing idle sessions every `interval`.
class IdleSweeper {
 public:
  IdleSweeper(dialogue::TutorEngine& engine, std::chrono::milliseconds idle, std::chrono::milliseconds interval);
  ~IdleSweeper();
  IdleSweeper(const IdleSweeper&) = delete;
  IdleSweeper& operator=(const IdleSweeper&) = delete;

 private:
  void run();

  dialogue::TutorEngine& engine_;
  std::chrono::milliseconds idle_;
  std::chrono::milliseconds interval_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace tutor::service
