#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/clock.hpp"
#include "tutor/error.hpp"
#include "tutor/prompts.hpp"
#include "tutor/provider.hpp"
#include "tutor/wordbank.hpp"

namespace tutor::scoring {

struct MatchedWord {
  std::string lemma;
  int level = wordbank::kMinLevel;

  bool operator==(const MatchedWord&) const = default;
};

/// Word-bank statistics of a text. average/median are absent when nothing matched.
struct WordBankScore {
  std::vector<MatchedWord> matched;  // one entry per matching token occurrence
  std::size_t token_count = 0;
  std::optional<double> average_level;
  std::optional<double> median_level;
  double coverage = 0.0;  // matched.size() / token_count

  bool operator==(const WordBankScore&) const = default;
};

class InvalidWeights : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct FusionWeights {
  double w_wb = 0.4;
  double w_llm = 0.6;

  /// Both non-negative and summing to 1 within 1e-9; throws InvalidWeights.
  void validate() const;
};

/// Which word-bank statistic stands in for the word-bank level.
enum class WordBankStatistic { median, average };

std::string_view to_string(WordBankStatistic s);
std::optional<WordBankStatistic> parse_wordbank_statistic(std::string_view name);

/// `full` estimates ran the judge (possibly degraded); `wordbank` estimates are
/// the cheap per-message refresh that never calls a provider.
enum class EstimateKind { full, wordbank };

std::string_view to_string(EstimateKind k);

struct ProficiencyEstimate {
  EstimateKind kind = EstimateKind::full;
  std::optional<WordBankScore> wordbank;
  std::optional<double> wordbank_level;  // the statistic that entered fusion
  std::optional<double> llm_level;
  double combined_level = wordbank::kMinLevel;
  Timestamp assessed_at{};
  std::size_t input_chars = 0;
  /// The judge was requested but failed; combined_level is word-bank only.
  bool degraded = false;
  std::string degraded_reason;
};

class NoSignal : public Error {
 public:
  using Error::Error;
};

class UnparsableJudgeReply : public Error {
 public:
  explicit UnparsableJudgeReply(const std::string& reply) : Error("no numeric level in judge reply: " + reply) {}
};

struct ScoringOptions {
  FusionWeights weights;
  WordBankStatistic statistic = WordBankStatistic::median;
};

/// Tokenizes and lemmatizes the text and looks each lemma up in the bank.
WordBankScore wordbank_score(const wordbank::WordBank& bank, std::string_view text);

/// First numeric token (integer or decimal; signs ignored), clamped to [1,14].
/// Returns nothing if the reply contains no digits.
std::optional<double> parse_judge_level(std::string_view reply);

/// Asks the provider for a 1-14 rating of the text.
/// Throws provider::ProviderError or UnparsableJudgeReply.
double llm_level_estimate(provider::Provider& provider, const provider::PromptLibrary& prompts,
                          std::string_view text);

/// Weighted sum when both levels are present, the single present level
/// otherwise; clamped to [1,14]. Throws NoSignal when both are absent.
double fuse_levels(std::optional<double> wordbank_level, std::optional<double> llm_level,
                   const FusionWeights& weights);

std::optional<double> select_statistic(const WordBankScore& score, WordBankStatistic statistic);

/// Word-bank score + judge + fusion. A failing judge yields a degraded
/// word-bank-only estimate; NoSignal when neither source produced a level.
ProficiencyEstimate assess_proficiency(const wordbank::WordBank& bank, provider::Provider& provider,
                                       const provider::PromptLibrary& prompts, std::string_view text, Clock& clock,
                                       const ScoringOptions& options = {});

/// Word-bank-only estimate with kind = wordbank. Throws NoSignal when nothing matched.
ProficiencyEstimate wordbank_estimate(const wordbank::WordBank& bank, std::string_view text, Clock& clock,
                                      const ScoringOptions& options = {});

}  // namespace tutor::scoring
