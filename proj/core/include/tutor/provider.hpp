#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutor/error.hpp"

namespace tutor::provider {

/// The distinct jobs the engine asks a model to do. Every request carries one.
enum class PromptKind { tutor_reply, level_judge, improvement_analysis, exercise_feedback, session_summary };

inline constexpr std::array<PromptKind, 5> kAllPromptKinds = {
    PromptKind::tutor_reply, PromptKind::level_judge, PromptKind::improvement_analysis,
    PromptKind::exercise_feedback, PromptKind::session_summary};

std::string_view to_string(PromptKind kind);
std::optional<PromptKind> parse_prompt_kind(std::string_view name);

enum class Role { learner, assistant };

std::string_view to_string(Role role);

struct Turn {
  Role role = Role::learner;
  std::string text;

  bool operator==(const Turn&) const = default;
};

class InvalidRequest : public Error {
 public:
  using Error::Error;
};

/// Immutable once built. There is no default constructor: a request cannot
/// exist without a PromptKind.
class ChatRequest {
 public:
  ChatRequest(PromptKind kind, std::string system_prompt, std::vector<Turn> history, std::string user_text,
              std::size_t max_reply_chars = 4000);

  PromptKind kind() const noexcept { return kind_; }
  const std::string& system_prompt() const noexcept { return system_prompt_; }
  const std::vector<Turn>& history() const noexcept { return history_; }
  const std::string& user_text() const noexcept { return user_text_; }
  std::size_t max_reply_chars() const noexcept { return max_reply_chars_; }

  /// History roles alternate starting with a learner turn; user text is
  /// non-empty; max_reply_chars > 0. Throws InvalidRequest.
  void validate() const;

 private:
  PromptKind kind_;
  std::string system_prompt_;
  std::vector<Turn> history_;
  std::string user_text_;
  std::size_t max_reply_chars_;
};

struct ChatResponse {
  std::string text;
  std::string provider_id;
  std::int64_t latency_ms = 0;
};

class ProviderError : public Error {
 public:
  enum class Kind { transient, permanent };

  ProviderError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }
  bool transient() const noexcept { return kind_ == Kind::transient; }

 private:
  Kind kind_;
};

/// The configured deadline elapsed before a reply arrived.
class ProviderTimeout : public ProviderError {
 public:
  explicit ProviderTimeout(const std::string& what) : ProviderError(Kind::transient, what) {}
};

class Provider {
 public:
  virtual ~Provider() = default;

  /// Returns the backend reply. Implementations may be called concurrently.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

using Fixtures = std::map<PromptKind, std::vector<std::string>>;

/// Deterministic offline provider. Replies are consumed in order per kind and
/// the last reply of a list repeats once the list is exhausted. Unscripted
/// kinds fail with a permanent ProviderError. Calls are serialized, so the
/// per-kind order is globally consistent under concurrency.
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(Fixtures fixtures);

  /// {"tutor_reply": ["..", ".."], "level_judge": ["9"], ...}
  static std::unique_ptr<ScriptedProvider> from_json(const nlohmann::json& doc);

  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return "scripted-mock"; }

  /// Every request received so far, in arrival order.
  std::vector<ChatRequest> calls() const;

 private:
  mutable std::mutex mu_;
  Fixtures fixtures_;
  std::map<PromptKind, std::size_t> cursor_;
  std::vector<ChatRequest> calls_;
};

class NoJsonFound : public Error {
 public:
  explicit NoJsonFound(std::string snippet)
      : Error("no JSON array found in model reply: " + snippet), snippet_(std::move(snippet)) {}
  const std::string& snippet() const noexcept { return snippet_; }

 private:
  std::string snippet_;
};

class MalformedJson : public Error {
 public:
  MalformedJson(std::string snippet, const std::string& detail)
      : Error("malformed JSON array in model reply (" + detail + "): " + snippet), snippet_(std::move(snippet)) {}
  const std::string& snippet() const noexcept { return snippet_; }

 private:
  std::string snippet_;
};

/// Pulls a JSON array out of a model reply: takes the body of the first code
/// fence if there is one, drops everything before the first '[' and after its
/// matching ']', then parses strictly.
nlohmann::json extract_json_array(std::string_view text);

}  // namespace tutor::provider
