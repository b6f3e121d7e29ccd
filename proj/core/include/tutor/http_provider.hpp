#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutor/provider.hpp"

namespace tutor::provider {

struct HttpProviderConfig {
  /// Scheme, host, optional port and path prefix, e.g. "https://api.openai.com/v1".
  std::string base_url;
  std::string api_key;
  std::string model;
  /// Deadline for one complete() call, retries included.
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  /// Wait before retry i; the last entry repeats.
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(250), std::chrono::milliseconds(1000)};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Adapter for OpenAI-compatible chat-completion endpoints.
///
/// POST {base_url}/chat/completions with {model, messages, max_tokens}; the
/// reply is choices[0].message.content. Transport failures and 5xx responses
/// are retried with backoff; other statuses fail permanently.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config, Sleeper sleeper = {});

  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return "http:" + config_.model; }

  static nlohmann::json build_payload(const ChatRequest& request, const std::string& model);
  /// Throws a permanent ProviderError if the body does not have the expected shape.
  static std::string parse_reply(const std::string& body);

 private:
  HttpProviderConfig config_;
  Sleeper sleeper_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // prefix + "/chat/completions"
};

}  // namespace tutor::provider
