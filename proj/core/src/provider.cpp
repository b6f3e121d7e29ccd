#include "tutor/provider.hpp"

#include <algorithm>

namespace tutor::provider {

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::tutor_reply:
      return "tutor_reply";
    case PromptKind::level_judge:
      return "level_judge";
    case PromptKind::improvement_analysis:
      return "improvement_analysis";
    case PromptKind::exercise_feedback:
      return "exercise_feedback";
    case PromptKind::session_summary:
      return "session_summary";
  }
  return "unknown";
}

std::optional<PromptKind> parse_prompt_kind(std::string_view name) {
  for (auto kind : kAllPromptKinds) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Role role) { return role == Role::learner ? "learner" : "assistant"; }

ChatRequest::ChatRequest(PromptKind kind, std::string system_prompt, std::vector<Turn> history, std::string user_text,
                         std::size_t max_reply_chars)
    : kind_(kind),
      system_prompt_(std::move(system_prompt)),
      history_(std::move(history)),
      user_text_(std::move(user_text)),
      max_reply_chars_(max_reply_chars) {}

void ChatRequest::validate() const {
  if (user_text_.empty()) throw InvalidRequest("request user text is empty");
  if (max_reply_chars_ == 0) throw InvalidRequest("max_reply_chars must be positive");
  for (std::size_t i = 0; i < history_.size(); ++i) {
    const Role expected = (i % 2 == 0) ? Role::learner : Role::assistant;
    if (history_[i].role != expected) {
      throw InvalidRequest("history turn " + std::to_string(i) + " should be " + std::string(to_string(expected)));
    }
  }
}

ScriptedProvider::ScriptedProvider(Fixtures fixtures) : fixtures_(std::move(fixtures)) {
  for (auto it = fixtures_.begin(); it != fixtures_.end();) {
    it = it->second.empty() ? fixtures_.erase(it) : std::next(it);
  }
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("mock fixtures must be a JSON object keyed by prompt kind");
  Fixtures fixtures;
  for (const auto& [key, value] : doc.items()) {
    const auto kind = parse_prompt_kind(key);
    if (!kind) throw ValidationError("unknown prompt kind in mock fixtures: " + key);
    std::vector<std::string> replies;
    if (value.is_string()) {
      replies.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      for (const auto& r : value) {
        if (!r.is_string()) throw ValidationError("mock replies for " + key + " must be strings");
        replies.push_back(r.get<std::string>());
      }
    } else {
      throw ValidationError("mock replies for " + key + " must be a string or array of strings");
    }
    fixtures[*kind] = std::move(replies);
  }
  return std::make_unique<ScriptedProvider>(std::move(fixtures));
}

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
  request.validate();
  std::lock_guard lock(mu_);
  calls_.push_back(request);
  const auto it = fixtures_.find(request.kind());
  if (it == fixtures_.end()) {
    throw ProviderError(ProviderError::Kind::permanent,
                        "scripted provider has no replies for prompt kind " + std::string(to_string(request.kind())));
  }
  auto& pos = cursor_[request.kind()];
  const auto& replies = it->second;
  const std::string& text = replies[std::min(pos, replies.size() - 1)];
  if (pos < replies.size()) ++pos;
  return ChatResponse{text, id(), 0};
}

std::vector<ChatRequest> ScriptedProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

namespace {

std::string snippet_of(std::string_view text) {
  constexpr std::size_t kMax = 160;
  if (text.size() <= kMax) return std::string(text);
  return std::string(text.substr(0, kMax)) + "...";
}

// Body of the first ``` fence, without the info string. Unterminated fences
// run to the end of the text.
std::string_view fenced_body(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return text;
  // A bare array ahead of any fence is taken as is; its strings may contain backticks.
  if (const auto bracket = text.find('['); bracket != std::string_view::npos && bracket < open) return text;
  auto body_start = text.find('\n', open + 3);
  if (body_start == std::string_view::npos) {
    body_start = open + 3;
  } else {
    // An info string ("json") sits between the fence and the newline; a '['
    // right after the fence means there is none.
    const auto info = text.substr(open + 3, body_start - open - 3);
    if (info.find('[') != std::string_view::npos) body_start = open + 3;
    else ++body_start;
  }
  const auto close = text.find("```", body_start);
  return text.substr(body_start, close == std::string_view::npos ? std::string_view::npos : close - body_start);
}

}  // namespace

nlohmann::json extract_json_array(std::string_view text) {
  const std::string_view body = fenced_body(text);
  const auto start = body.find('[');
  if (start == std::string_view::npos) throw NoJsonFound(snippet_of(text));

  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  std::size_t end = std::string_view::npos;
  for (std::size_t i = start; i < body.size(); ++i) {
    const char c = body[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') ++depth;
    else if (c == ']' || c == '}') {
      if (--depth == 0) {
        end = i;
        break;
      }
    }
  }
  if (end == std::string_view::npos) throw MalformedJson(snippet_of(body.substr(start)), "unbalanced brackets");

  const auto candidate = body.substr(start, end - start + 1);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(candidate);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson(snippet_of(candidate), e.what());
  }
  if (!parsed.is_array()) throw MalformedJson(snippet_of(candidate), "not an array");
  return parsed;
}

}  // namespace tutor::provider
