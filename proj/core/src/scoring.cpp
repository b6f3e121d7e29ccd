#include "tutor/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

namespace tutor::scoring {

void FusionWeights::validate() const {
  if (!(w_wb >= 0.0) || !(w_llm >= 0.0)) throw InvalidWeights("fusion weights must be non-negative");
  if (std::abs(w_wb + w_llm - 1.0) > 1e-9) throw InvalidWeights("fusion weights must sum to 1");
}

std::string_view to_string(WordBankStatistic s) { return s == WordBankStatistic::median ? "median" : "average"; }

std::optional<WordBankStatistic> parse_wordbank_statistic(std::string_view name) {
  if (name == "median") return WordBankStatistic::median;
  if (name == "average") return WordBankStatistic::average;
  return std::nullopt;
}

std::string_view to_string(EstimateKind k) { return k == EstimateKind::full ? "full" : "wordbank"; }

WordBankScore wordbank_score(const wordbank::WordBank& bank, std::string_view text) {
  WordBankScore score;
  for (const auto& token : wordbank::tokenize(text)) {
    ++score.token_count;
    auto lemma = wordbank::lemmatize(token);
    if (auto level = bank.lookup(lemma)) score.matched.push_back({std::move(lemma), *level});
  }
  if (score.matched.empty()) return score;

  std::vector<int> levels;
  levels.reserve(score.matched.size());
  for (const auto& m : score.matched) levels.push_back(m.level);
  const double sum = std::accumulate(levels.begin(), levels.end(), 0.0);
  score.average_level = sum / static_cast<double>(levels.size());

  std::sort(levels.begin(), levels.end());
  const std::size_t n = levels.size();
  score.median_level = (n % 2 == 1) ? static_cast<double>(levels[n / 2])
                                    : (static_cast<double>(levels[n / 2 - 1]) + levels[n / 2]) / 2.0;
  score.coverage = static_cast<double>(n) / static_cast<double>(score.token_count);
  return score;
}

std::optional<double> parse_judge_level(std::string_view reply) {
  const auto first = std::find_if(reply.begin(), reply.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (first == reply.end()) return std::nullopt;
  auto last = std::find_if(first, reply.end(), [](char c) { return c < '0' || c > '9'; });
  if (last != reply.end() && *last == '.' && last + 1 != reply.end() && last[1] >= '0' && last[1] <= '9') {
    last = std::find_if(last + 1, reply.end(), [](char c) { return c < '0' || c > '9'; });
  }
  double value = 0.0;
  const auto* b = &*first;
  const auto [ptr, ec] = std::from_chars(b, b + (last - first), value);
  if (ec == std::errc::result_out_of_range) value = std::numeric_limits<double>::max();
  (void)ptr;
  return std::clamp(value, static_cast<double>(wordbank::kMinLevel), static_cast<double>(wordbank::kMaxLevel));
}

double llm_level_estimate(provider::Provider& provider, const provider::PromptLibrary& prompts,
                          std::string_view text) {
  const auto rendered = prompts.render(provider::PromptKind::level_judge, {{"learner_text", std::string(text)}});
  const provider::ChatRequest request(provider::PromptKind::level_judge, rendered.system, {}, rendered.user, 200);
  const auto response = provider.complete(request);
  const auto level = parse_judge_level(response.text);
  if (!level) throw UnparsableJudgeReply(response.text);
  return *level;
}

double fuse_levels(std::optional<double> wordbank_level, std::optional<double> llm_level,
                   const FusionWeights& weights) {
  weights.validate();
  double combined = 0.0;
  if (wordbank_level && llm_level) {
    combined = weights.w_wb * *wordbank_level + weights.w_llm * *llm_level;
  } else if (wordbank_level) {
    combined = *wordbank_level;
  } else if (llm_level) {
    combined = *llm_level;
  } else {
    throw NoSignal("no word-bank match and no judge level to fuse");
  }
  return std::clamp(combined, static_cast<double>(wordbank::kMinLevel), static_cast<double>(wordbank::kMaxLevel));
}

std::optional<double> select_statistic(const WordBankScore& score, WordBankStatistic statistic) {
  return statistic == WordBankStatistic::median ? score.median_level : score.average_level;
}

namespace {

void require_text(std::string_view text) {
  if (text.empty()) throw ValidationError("cannot assess empty text");
}

}  // namespace

ProficiencyEstimate assess_proficiency(const wordbank::WordBank& bank, provider::Provider& provider,
                                       const provider::PromptLibrary& prompts, std::string_view text, Clock& clock,
                                       const ScoringOptions& options) {
  require_text(text);
  options.weights.validate();
  ProficiencyEstimate est;
  est.kind = EstimateKind::full;
  est.wordbank = wordbank_score(bank, text);
  est.wordbank_level = select_statistic(*est.wordbank, options.statistic);
  est.input_chars = text.size();
  try {
    est.llm_level = llm_level_estimate(provider, prompts, text);
  } catch (const provider::ProviderError& e) {
    est.degraded = true;
    est.degraded_reason = e.what();
  } catch (const UnparsableJudgeReply& e) {
    est.degraded = true;
    est.degraded_reason = e.what();
  }
  if (est.degraded) {
    spdlog::warn("level judge unavailable, using word bank only: {}", est.degraded_reason);
    if (!est.wordbank_level) throw NoSignal("no word-bank match and judge failed: " + est.degraded_reason);
  }
  est.combined_level = fuse_levels(est.wordbank_level, est.llm_level, options.weights);
  est.assessed_at = clock.now();
  return est;
}

ProficiencyEstimate wordbank_estimate(const wordbank::WordBank& bank, std::string_view text, Clock& clock,
                                      const ScoringOptions& options) {
  require_text(text);
  ProficiencyEstimate est;
  est.kind = EstimateKind::wordbank;
  est.wordbank = wordbank_score(bank, text);
  est.wordbank_level = select_statistic(*est.wordbank, options.statistic);
  est.input_chars = text.size();
  if (!est.wordbank_level) throw NoSignal("no word-bank match");
  est.combined_level = fuse_levels(est.wordbank_level, std::nullopt, options.weights);
  est.assessed_at = clock.now();
  return est;
}

}  // namespace tutor::scoring
