#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/provider.hpp"

namespace tutor::provider {

/// A prompt asset: the system part and the user part, separated in the file
/// by a line reading `---user---`. Placeholders are `{name}` with name made of
/// lowercase letters and underscores; any other brace is literal text.
struct PromptTemplate {
  std::string system;
  std::string user;
};

struct RenderedPrompt {
  std::string system;
  std::string user;
};

using PromptVars = std::map<std::string, std::string>;

class MissingPlaceholder : public Error {
 public:
  using Error::Error;
};

PromptTemplate parse_prompt_template(std::string_view text);

/// Substitutes every placeholder; throws MissingPlaceholder for names absent from vars.
std::string render_template(std::string_view text, const PromptVars& vars);

/// Placeholder names in order of first appearance.
std::vector<std::string> placeholders_of(std::string_view text);

class PromptLibrary {
 public:
  /// Copies of prompts/<kind>.txt compiled into the library.
  static PromptLibrary builtin();
  /// Built-in templates overridden by any prompts/<kind>.txt present in dir.
  static PromptLibrary from_directory(const std::filesystem::path& dir);

  const PromptTemplate& get(PromptKind kind) const { return templates_.at(kind); }
  RenderedPrompt render(PromptKind kind, const PromptVars& vars) const;

 private:
  std::map<PromptKind, PromptTemplate> templates_;
};

}  // namespace tutor::provider
