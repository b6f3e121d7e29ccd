#include "tutor/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace tutor::provider {

namespace detail {
// Generated at configure time from prompts/*.txt.
std::string_view builtin_prompt_text(std::string_view kind);
}  // namespace detail

namespace {

constexpr std::string_view kSeparator = "---user---";

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  return s;
}

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls on_text / on_placeholder for each piece of the template.
template <typename Text, typename Placeholder>
void scan(std::string_view text, Text&& on_text, Placeholder&& on_placeholder) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && is_name_char(text[j])) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        on_placeholder(text.substr(i + 1, j - i - 1));
        i = j + 1;
        continue;
      }
    }
    on_text(text[i]);
    ++i;
  }
}

}  // namespace

PromptTemplate parse_prompt_template(std::string_view text) {
  PromptTemplate out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    std::string_view trimmed = line;
    if (!trimmed.empty() && trimmed.back() == '\r') trimmed.remove_suffix(1);
    if (trimmed == kSeparator) {
      out.system = rstrip(std::string(text.substr(0, pos)));
      out.user = nl == std::string_view::npos ? std::string{} : rstrip(std::string(text.substr(nl + 1)));
      return out;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  out.system = rstrip(std::string(text));
  return out;
}

std::string render_template(std::string_view text, const PromptVars& vars) {
  std::string out;
  out.reserve(text.size());
  scan(
      text, [&](char c) { out.push_back(c); },
      [&](std::string_view name) {
        const auto it = vars.find(std::string(name));
        if (it == vars.end()) throw MissingPlaceholder("prompt placeholder {" + std::string(name) + "} has no value");
        out += it->second;
      });
  return out;
}

std::vector<std::string> placeholders_of(std::string_view text) {
  std::vector<std::string> names;
  scan(
      text, [](char) {},
      [&](std::string_view name) {
        if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
      });
  return names;
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  for (auto kind : kAllPromptKinds) {
    lib.templates_[kind] = parse_prompt_template(detail::builtin_prompt_text(to_string(kind)));
  }
  return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
  PromptLibrary lib = builtin();
  for (auto kind : kAllPromptKinds) {
    const auto path = dir / (std::string(to_string(kind)) + ".txt");
    std::ifstream in(path);
    if (!in) continue;
    std::ostringstream buf;
    buf << in.rdbuf();
    lib.templates_[kind] = parse_prompt_template(buf.str());
  }
  return lib;
}

RenderedPrompt PromptLibrary::render(PromptKind kind, const PromptVars& vars) const {
  const auto& t = get(kind);
  return RenderedPrompt{render_template(t.system, vars), render_template(t.user, vars)};
}

}  // namespace tutor::provider
