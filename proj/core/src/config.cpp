#include "tutor/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

extern char** environ;

namespace tutor::config {

namespace {

std::string describe(const std::vector<FieldIssue>& issues) {
  std::string out = "invalid configuration:";
  for (const auto& i : issues) out += "\n  " + i.field + ": " + i.message;
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Parses a "..." string starting at s[0]; returns the decoded value and the
// rest of the input after the closing quote.
std::optional<std::pair<std::string, std::string_view>> parse_string(std::string_view s) {
  if (s.empty() || s.front() != '"') return std::nullopt;
  std::string out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') return std::make_pair(out, s.substr(i + 1));
    if (c == '\\' && i + 1 < s.size()) {
      const char n = s[++i];
      switch (n) {
        case 'n':
          out.push_back('\n');
          break;
        case 't':
          out.push_back('\t');
          break;
        case '"':
        case '\\':
          out.push_back(n);
          break;
        default:
          return std::nullopt;
      }
      continue;
    }
    out.push_back(c);
  }
  return std::nullopt;
}

std::string_view drop_comment(std::string_view rest) {
  rest = strip(rest);
  if (!rest.empty() && rest.front() == '#') return {};
  return rest;
}

std::optional<Value> parse_scalar(std::string_view v) {
  if (v == "true") return Value{true};
  if (v == "false") return Value{false};
  if (auto s = parse_string(v)) {
    if (!drop_comment(s->second).empty()) return std::nullopt;
    return Value{s->first};
  }
  // Cut a trailing comment from bare values.
  if (const auto hash = v.find('#'); hash != std::string_view::npos) v = strip(v.substr(0, hash));
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i); ec == std::errc{} && p == v.data() + v.size()) {
    return Value{i};
  }
  double d = 0;
  if (auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d); ec == std::errc{} && p == v.data() + v.size()) {
    return Value{d};
  }
  return std::nullopt;
}

std::optional<Value> parse_array(std::string_view v) {
  v.remove_prefix(1);
  std::vector<std::string> items;
  for (;;) {
    v = strip(v);
    if (!v.empty() && v.front() == ']') return drop_comment(v.substr(1)).empty() ? std::optional<Value>(items) : std::nullopt;
    auto s = parse_string(v);
    if (!s) return std::nullopt;
    items.push_back(s->first);
    v = strip(s->second);
    if (!v.empty() && v.front() == ',') v.remove_prefix(1);
    else if (v.empty() || v.front() != ']') return std::nullopt;
  }
}

bool valid_key(std::string_view k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

}  // namespace

ConfigError::ConfigError(std::vector<FieldIssue> issues) : ValidationError(describe(issues)), issues_(std::move(issues)) {}

std::string ConfigError::report() const {
  std::string out;
  for (const auto& i : issues_) out += i.field + ": " + i.message + "\n";
  return out;
}

Document parse_document(std::string_view text) {
  Document doc;
  std::vector<FieldIssue> issues;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip(raw);
    const std::string where = "line " + std::to_string(line_no);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      const auto name = close == std::string_view::npos ? std::string_view{} : strip(line.substr(1, close - 1));
      if (close == std::string_view::npos || !valid_key(name) || !drop_comment(line.substr(close + 1)).empty()) {
        issues.push_back({where, "malformed section header"});
        continue;
      }
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back({where, "expected key = value"});
      continue;
    }
    const auto key = strip(line.substr(0, eq));
    const auto value = strip(line.substr(eq + 1));
    if (!valid_key(key)) {
      issues.push_back({where, "invalid key '" + std::string(key) + "'"});
      continue;
    }
    const auto parsed = (!value.empty() && value.front() == '[') ? parse_array(value) : parse_scalar(value);
    if (!parsed) {
      issues.push_back({where, "cannot parse value for '" + std::string(key) + "'"});
      continue;
    }
    const auto full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (!doc.emplace(full, *parsed).second) issues.push_back({where, "duplicate key '" + full + "'"});
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return doc;
}

namespace {

struct Builder {
  ApiConfig cfg;
  std::vector<FieldIssue> issues;

  void bad(const std::string& field, const std::string& msg) { issues.push_back({field, msg}); }
};

// Converts an env-var string into the Value type the field expects.
Value from_env_text(const std::string& text) {
  if (auto v = parse_scalar(strip(text)); v && !std::holds_alternative<std::string>(*v)) return *v;
  if (!text.empty() && text.front() == '[') {
    if (auto v = parse_array(strip(text))) return *v;
  }
  return Value{text};
}

std::optional<std::string> as_string(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return std::nullopt;
}

std::optional<std::int64_t> as_int(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return std::nullopt;
}

std::optional<double> as_double(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::nullopt;
}

using Setter = std::function<void(Builder&, const std::string& field, const Value&)>;

Setter string_field(std::string ApiConfig::*member) {
  return [member](Builder& b, const std::string& f, const Value& v) {
    if (auto s = as_string(v)) b.cfg.*member = *s;
    else b.bad(f, "expected a string");
  };
}

template <typename Apply>
Setter int_field(std::int64_t lo, std::int64_t hi, Apply apply) {
  return [=](Builder& b, const std::string& f, const Value& v) {
    const auto i = as_int(v);
    if (!i) return b.bad(f, "expected an integer");
    if (*i < lo || *i > hi) return b.bad(f, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
    apply(b.cfg, *i);
  };
}

template <typename Apply>
Setter double_field(double lo, double hi, Apply apply) {
  return [=](Builder& b, const std::string& f, const Value& v) {
    const auto d = as_double(v);
    if (!d) return b.bad(f, "expected a number");
    if (!(*d >= lo && *d <= hi)) return b.bad(f, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
    apply(b.cfg, *d);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"server.host", string_field(&ApiConfig::host)},
      {"server.port", int_field(0, 65535, [](ApiConfig& c, std::int64_t v) { c.port = static_cast<int>(v); })},
      {"provider.kind",
       [](Builder& b, const std::string& f, const Value& v) {
         const auto s = as_string(v);
         if (!s || (*s != "mock" && *s != "http")) return b.bad(f, "must be \"mock\" or \"http\"");
         b.cfg.provider.kind = *s;
       }},
      {"provider.fixtures",
       [](Builder& b, const std::string& f, const Value& v) {
         if (auto s = as_string(v)) b.cfg.provider.fixtures = *s;
         else b.bad(f, "expected a string");
       }},
      {"provider.base_url",
       [](Builder& b, const std::string& f, const Value& v) {
         if (auto s = as_string(v)) b.cfg.provider.base_url = *s;
         else b.bad(f, "expected a string");
       }},
      {"provider.api_key",
       [](Builder& b, const std::string& f, const Value& v) {
         if (auto s = as_string(v)) b.cfg.provider.api_key = *s;
         else b.bad(f, "expected a string");
       }},
      {"provider.model",
       [](Builder& b, const std::string& f, const Value& v) {
         if (auto s = as_string(v)) b.cfg.provider.model = *s;
         else b.bad(f, "expected a string");
       }},
      {"provider.timeout_ms", int_field(1, 600000, [](ApiConfig& c, std::int64_t v) {
         c.provider.timeout = std::chrono::milliseconds(v);
       })},
      {"provider.max_retries",
       int_field(0, 10, [](ApiConfig& c, std::int64_t v) { c.provider.max_retries = static_cast<int>(v); })},
      {"scoring.w_wb", double_field(0, 1, [](ApiConfig& c, double v) { c.engine.scoring.weights.w_wb = v; })},
      {"scoring.w_llm", double_field(0, 1, [](ApiConfig& c, double v) { c.engine.scoring.weights.w_llm = v; })},
      {"scoring.wb_statistic",
       [](Builder& b, const std::string& f, const Value& v) {
         const auto s = as_string(v);
         const auto stat = s ? scoring::parse_wordbank_statistic(*s) : std::nullopt;
         if (!stat) return b.bad(f, "must be \"median\" or \"average\"");
         b.cfg.engine.scoring.statistic = *stat;
       }},
      {"analysis.min_new_learner_messages", int_field(1, 1000, [](ApiConfig& c, std::int64_t v) {
         c.engine.analysis.min_new_learner_messages = static_cast<std::size_t>(v);
       })},
      {"analysis.confidence_threshold",
       double_field(0, 1, [](ApiConfig& c, double v) { c.engine.analysis.confidence_threshold = v; })},
      {"analysis.max_areas", int_field(1, 16, [](ApiConfig& c, std::int64_t v) {
         c.engine.analysis.max_areas = static_cast<std::size_t>(v);
       })},
      {"dialogue.context_turns", int_field(1, 1000, [](ApiConfig& c, std::int64_t v) {
         c.engine.context_turns = static_cast<std::size_t>(v);
       })},
      {"dialogue.judge_every",
       int_field(1, 1000, [](ApiConfig& c, std::int64_t v) { c.engine.judge_every = static_cast<std::size_t>(v); })},
      {"dialogue.max_reply_chars", int_field(1, 100000, [](ApiConfig& c, std::int64_t v) {
         c.engine.max_reply_chars = static_cast<std::size_t>(v);
       })},
      {"dialogue.trigger_phrases",
       [](Builder& b, const std::string& f, const Value& v) {
         const auto* list = std::get_if<std::vector<std::string>>(&v);
         if (list == nullptr || list->empty()) return b.bad(f, "expected a non-empty array of \"type:phrase\" strings");
         std::vector<dialogue::TriggerPhrase> triggers;
         for (const auto& item : *list) {
           const auto colon = item.find(':');
           const auto type = colon == std::string::npos ? std::nullopt : parse_exercise_type(item.substr(0, colon));
           const auto phrase = colon == std::string::npos ? std::string() : std::string(strip(item.substr(colon + 1)));
           if (!type || phrase.empty()) return b.bad(f, "entry '" + item + "' is not \"type:phrase\"");
           triggers.push_back({phrase, *type});
         }
         b.cfg.engine.triggers = std::move(triggers);
       }},
      {"resources.recommend_k",
       int_field(1, 100, [](ApiConfig& c, std::int64_t v) { c.engine.recommend_k = static_cast<std::size_t>(v); })},
      {"resources.path", string_field(&ApiConfig::resources_path)},
      {"data.dir", string_field(&ApiConfig::data_dir)},
      {"data.wordbank", string_field(&ApiConfig::wordbank_path)},
      {"data.prompts_dir", string_field(&ApiConfig::prompts_dir)},
      {"session.idle_timeout_minutes",
       int_field(1, 10080, [](ApiConfig& c, std::int64_t v) { c.idle_timeout = std::chrono::minutes(v); })},
      {"auth.secret", string_field(&ApiConfig::auth_secret)},
      {"auth.token_ttl_hours",
       int_field(1, 24 * 365, [](ApiConfig& c, std::int64_t v) { c.token_ttl = std::chrono::hours(v); })},
  };
  return table;
}

// TUTOR_SESSION_IDLE_TIMEOUT_MINUTES -> session.idle_timeout_minutes
std::optional<std::string> field_for_env(const std::string& var) {
  constexpr std::string_view prefix = "TUTOR_";
  if (var.rfind(prefix, 0) != 0) return std::nullopt;
  std::string rest = var.substr(prefix.size());
  std::transform(rest.begin(), rest.end(), rest.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const auto& [field, setter] : setters()) {
    const auto dot = field.find('.');
    if (field.substr(0, dot) + "_" + field.substr(dot + 1) == rest) return field;
  }
  return std::nullopt;
}

}  // namespace

ApiConfig build_config(const Document& doc, const std::map<std::string, std::string>& env) {
  Builder b;
  for (const auto& [field, value] : doc) {
    const auto it = setters().find(field);
    if (it == setters().end()) {
      b.bad(field, "unknown setting");
      continue;
    }
    it->second(b, field, value);
  }
  for (const auto& [var, text] : env) {
    if (const auto field = field_for_env(var)) {
      setters().at(*field)(b, *field + " (" + var + ")", from_env_text(text));
    }
  }
  if (auto it = env.find("PROVIDER_BASE_URL"); it != env.end()) b.cfg.provider.base_url = it->second;
  if (auto it = env.find("PROVIDER_API_KEY"); it != env.end()) b.cfg.provider.api_key = it->second;
  if (auto it = env.find("PROVIDER_MODEL"); it != env.end()) b.cfg.provider.model = it->second;

  try {
    b.cfg.engine.scoring.weights.validate();
  } catch (const ValidationError& e) {
    b.bad("scoring.w_wb", e.what());
  }
  if (b.cfg.provider.kind == "http") {
    if (b.cfg.provider.base_url.empty()) b.bad("provider.base_url", "required when provider.kind = \"http\"");
    if (b.cfg.provider.model.empty()) b.bad("provider.model", "required when provider.kind = \"http\"");
  }
  if (b.cfg.data_dir.empty()) b.bad("data.dir", "must not be empty");
  if (!b.issues.empty()) throw ConfigError(std::move(b.issues));
  return b.cfg;
}

ApiConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::map<std::string, std::string>& env) {
  Document doc;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError(file->string(), "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    doc = parse_document(buf.str());
  }
  return build_config(doc, env);
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const auto name = entry.substr(0, eq);
    if (name.rfind("TUTOR_", 0) == 0 || name.rfind("PROVIDER_", 0) == 0) out.emplace(name, entry.substr(eq + 1));
  }
  return out;
}

}  // namespace tutor::config
