#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tutor/dialogue.hpp"
#include "tutor/error.hpp"

namespace tutor::config {

struct FieldIssue {
  std::string field;  // "section.key"
  std::string message;
};

/// Invalid configuration. Carries every problem found, not just the first.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<FieldIssue> issues);
  ConfigError(const std::string& field, const std::string& message)
      : ConfigError(std::vector<FieldIssue>{{field, message}}) {}
  const std::vector<FieldIssue>& issues() const noexcept { return issues_; }
  /// One "field: message" line per issue.
  std::string report() const;

 private:
  std::vector<FieldIssue> issues_;
};

// Minimal TOML subset: [section] headers, key = value lines, # comments.
// Values are "strings", integers, floats, true/false, or one-line arrays of strings.
using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;
using Document = std::map<std::string, Value>;  // keyed "section.key"

/// Throws ConfigError with the offending line numbers.
Document parse_document(std::string_view text);

struct ProviderSettings {
  std::string kind = "mock";  // mock | http
  std::string fixtures;       // mock reply file (JSON)
  std::string base_url;
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
};

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  ProviderSettings provider;
  dialogue::EngineConfig engine;
  std::string data_dir = "./tutor-data";
  std::string wordbank_path;
  std::string resources_path;
  std::string prompts_dir;
  std::chrono::minutes idle_timeout{30};
  std::string auth_secret;  // empty: random per process
  std::chrono::hours token_ttl{24 * 7};
};

/// Applies the document to defaults, then TUTOR_<SECTION>_<KEY> overrides
/// from env, then PROVIDER_BASE_URL / PROVIDER_API_KEY / PROVIDER_MODEL.
/// Throws ConfigError listing every invalid or unknown field.
ApiConfig build_config(const Document& doc, const std::map<std::string, std::string>& env);

/// Reads the file (if given) and builds the config.
ApiConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::map<std::string, std::string>& env);

/// TUTOR_* and PROVIDER_* variables of the current process.
std::map<std::string, std::string> process_environment();

}  // namespace tutor::config
