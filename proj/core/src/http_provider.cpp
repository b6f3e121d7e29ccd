#include "tutor/http_provider.hpp"

#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace tutor::provider {

using namespace std::chrono;

namespace {

std::string truncate_utf8(std::string text, std::size_t max_bytes) {
  if (text.size() <= max_bytes) return text;
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  return text;
}

}  // namespace

HttpProvider::HttpProvider(HttpProviderConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](milliseconds d) { std::this_thread::sleep_for(d); };
  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos || config_.base_url.size() == scheme_end + 3) {
    throw ValidationError("provider base_url must look like scheme://host[:port][/path]: " + config_.base_url);
  }
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  origin_ = config_.base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
  if (config_.model.empty()) throw ValidationError("provider model must be set");
}

nlohmann::json HttpProvider::build_payload(const ChatRequest& request, const std::string& model) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_prompt().empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt()}});
  }
  for (const auto& turn : request.history()) {
    messages.push_back({{"role", turn.role == Role::learner ? "user" : "assistant"}, {"content", turn.text}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_text()}});
  // Roughly four characters per token.
  const auto max_tokens = std::max<std::size_t>(16, (request.max_reply_chars() + 3) / 4);
  return {{"model", model}, {"messages", std::move(messages)}, {"max_tokens", max_tokens}};
}

std::string HttpProvider::parse_reply(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProviderError(ProviderError::Kind::permanent, std::string("provider returned invalid JSON: ") + e.what());
  }
  const auto* content = [&]() -> const nlohmann::json* {
    if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
      return nullptr;
    }
    const auto& first = doc["choices"][0];
    if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) return nullptr;
    const auto& message = first["message"];
    if (!message.contains("content") || !message["content"].is_string()) return nullptr;
    return &message["content"];
  }();
  if (content == nullptr) {
    throw ProviderError(ProviderError::Kind::permanent, "provider response has no choices[0].message.content");
  }
  auto text = content->get<std::string>();
  if (text.empty()) throw ProviderError(ProviderError::Kind::permanent, "provider returned an empty reply");
  return text;
}

ChatResponse HttpProvider::complete(const ChatRequest& request) {
  request.validate();
  const auto payload = build_payload(request, config_.model).dump();
  const auto started = steady_clock::now();
  const auto deadline = started + config_.timeout;

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0;; ++attempt) {
    const auto remaining = duration_cast<milliseconds>(deadline - steady_clock::now());
    if (remaining <= milliseconds::zero()) {
      throw ProviderTimeout("provider deadline of " + std::to_string(config_.timeout.count()) + "ms exceeded" +
                            (last_error.empty() ? "" : " (" + last_error + ")"));
    }

    httplib::Client client(origin_);
    const auto secs = duration_cast<seconds>(remaining);
    const auto usecs = duration_cast<microseconds>(remaining - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    bool transient = false;
    if (auto res = client.Post(path_, headers, payload, "application/json")) {
      if (res->status >= 200 && res->status < 300) {
        const auto latency = duration_cast<milliseconds>(steady_clock::now() - started).count();
        return ChatResponse{truncate_utf8(parse_reply(res->body), request.max_reply_chars()), id(), latency};
      }
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status < 500) {
        throw ProviderError(ProviderError::Kind::permanent, "provider rejected request: " + last_error);
      }
      transient = true;
    } else {
      const auto err = res.error();
      last_error = httplib::to_string(err);
      if (err == httplib::Error::SSLServerVerification || err == httplib::Error::SSLLoadingCerts) {
        throw ProviderError(ProviderError::Kind::permanent, "provider TLS failure: " + last_error);
      }
      transient = true;
    }

    if (steady_clock::now() >= deadline) {
      throw ProviderTimeout("provider deadline of " + std::to_string(config_.timeout.count()) + "ms exceeded (" +
                            last_error + ")");
    }
    if (!transient || attempt >= config_.max_retries) {
      throw ProviderError(ProviderError::Kind::transient,
                          "provider failed after " + std::to_string(attempt + 1) + " attempt(s): " + last_error);
    }
    const auto wait = config_.backoff.empty()
                          ? milliseconds::zero()
                          : config_.backoff[std::min<std::size_t>(attempt, config_.backoff.size() - 1)];
    spdlog::warn("provider attempt {} failed ({}); retrying in {}ms", attempt + 1, last_error, wait.count());
    sleeper_(wait);
  }
}

}  // namespace tutor::provider
