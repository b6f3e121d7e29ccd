#include "tutor/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <spdlog/spdlog.h>

#include "tutor/wordbank.hpp"

namespace tutor::analysis {

using nlohmann::json;

void AnalysisPolicy::validate() const {
  if (min_new_learner_messages == 0) throw ValidationError("analysis.min_new_learner_messages must be positive");
  if (max_areas == 0) throw ValidationError("analysis.max_areas must be positive");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw ValidationError("analysis.confidence_threshold must lie in [0,1]");
  }
}

bool should_analyze(const Session& session, const AnalysisPolicy& policy) {
  const auto learners = session.learner_message_count();
  return learners >= session.analyzed_through &&
         learners - session.analyzed_through >= policy.min_new_learner_messages;
}

std::string aggregate_learner_text(const Session& session) {
  std::string out;
  bool any = false;
  for (const auto& m : session.messages) {
    if (m.role != provider::Role::learner) continue;
    if (any) out.push_back('\n');
    out += m.text;
    any = true;
  }
  if (!any) throw EmptySession("session " + session.session_id + " has no learner messages");
  return out;
}

namespace {

std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> out;
  for (auto token : wordbank::tokenize(text)) {
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.insert(std::move(token));
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    lines.emplace_back(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

}  // namespace

double token_overlap(std::string_view phrase, std::string_view message) {
  const auto p = token_set(phrase);
  if (p.empty()) return 0.0;
  const auto m = token_set(message);
  const auto shared = std::count_if(p.begin(), p.end(), [&](const std::string& t) { return m.contains(t); });
  return static_cast<double>(shared) / static_cast<double>(p.size());
}

std::vector<ImprovementArea> filter_improvement_areas(const json& reply, std::string_view learner_text,
                                                      const AnalysisPolicy& policy, Timestamp detected_at,
                                                      const std::string& session_id) {
  const auto lines = split_lines(learner_text);
  std::vector<ImprovementArea> kept;
  std::size_t index = 0;
  for (const auto& element : reply) {
    const auto at = index++;
    if (!element.is_object() || !element.contains("area") || !element.contains("confidence") ||
        !element.contains("examples")) {
      spdlog::warn("analysis element {} dropped: expected an object with area, confidence and examples", at);
      continue;
    }
    const auto& area = element["area"];
    const auto& confidence = element["confidence"];
    const auto& examples = element["examples"];
    if (!area.is_string() || !confidence.is_number() || !examples.is_array() ||
        !std::all_of(examples.begin(), examples.end(), [](const json& e) { return e.is_string(); })) {
      spdlog::warn("analysis element {} dropped: field has the wrong type", at);
      continue;
    }
    const auto canonical = canonical_area(area.get<std::string>());
    if (!canonical) {
      spdlog::warn("analysis element {} dropped: '{}' is not a known improvement area", at, area.get<std::string>());
      continue;
    }
    const double c = confidence.get<double>();
    if (!(c >= 0.0 && c <= 1.0)) {
      spdlog::warn("analysis element {} dropped: confidence {} outside [0,1]", at, c);
      continue;
    }
    if (!(c > policy.confidence_threshold)) continue;

    ImprovementArea out{*canonical, c, {}, detected_at, session_id};
    for (const auto& e : examples) {
      const auto phrase = e.get<std::string>();
      const bool grounded = std::any_of(lines.begin(), lines.end(),
                                        [&](const std::string& line) { return token_overlap(phrase, line) >= 0.5; });
      if (grounded) {
        out.examples.push_back(phrase);
      } else {
        spdlog::debug("analysis example not found in learner text: {}", phrase);
      }
    }

    const auto dup = std::find_if(kept.begin(), kept.end(), [&](const auto& k) { return k.area == out.area; });
    if (dup == kept.end()) {
      kept.push_back(std::move(out));
    } else if (out.confidence > dup->confidence) {
      *dup = std::move(out);
    }
  }

  std::stable_sort(kept.begin(), kept.end(), [](const ImprovementArea& a, const ImprovementArea& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return area_rank(a.area) < area_rank(b.area);
  });
  if (kept.size() > policy.max_areas) kept.resize(policy.max_areas);
  return kept;
}

std::vector<ImprovementArea> identify_improvement_areas(provider::Provider& provider,
                                                        const provider::PromptLibrary& prompts,
                                                        std::string_view learner_text, const AnalysisPolicy& policy,
                                                        Timestamp detected_at, const std::string& session_id) {
  if (learner_text.empty()) throw ValidationError("cannot analyse empty learner text");
  std::string taxonomy;
  for (auto a : kAreaTaxonomy) {
    if (!taxonomy.empty()) taxonomy += ", ";
    taxonomy += a;
  }
  const auto rendered = prompts.render(provider::PromptKind::improvement_analysis,
                                       {{"learner_text", std::string(learner_text)},
                                        {"max_areas", std::to_string(policy.max_areas)},
                                        {"taxonomy", taxonomy}});
  const provider::ChatRequest request(provider::PromptKind::improvement_analysis, rendered.system, {}, rendered.user,
                                      4000);
  const auto response = provider.complete(request);
  const auto parsed = provider::extract_json_array(response.text);
  return filter_improvement_areas(parsed, learner_text, policy, detected_at, session_id);
}

}  // namespace tutor::analysis
