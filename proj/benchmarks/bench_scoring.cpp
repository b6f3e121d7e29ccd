#include <benchmark/benchmark.h>

#include <random>

#include "tutor/resources.hpp"
#include "tutor/scoring.hpp"
#include "tutor/wordbank.hpp"

namespace {

const tutor::wordbank::WordBank& bank() {
  static const auto b = tutor::wordbank::load_word_bank_file(std::string(TUTOR_SOURCE_DIR) + "/data/wordbank_sample.csv");
  return b;
}

std::string sample_text(std::size_t words) {
  static const std::vector<std::string> vocab = {"I",      "wanted", "to",    "order", "coffees", "yesterday",
                                                 "but",    "the",    "shops", "were",  "closing", "early",
                                                 "studies", "running", "happily", "children"};
  std::mt19937 rng(1);
  std::string out;
  for (std::size_t i = 0; i < words; ++i) out += vocab[rng() % vocab.size()] + (i % 12 == 11 ? ". " : " ");
  return out;
}

void BM_Lemmatize(benchmark::State& state) {
  const std::vector<std::string> tokens = {"running", "studies", "went", "boxes", "happily", "stopped", "cats"};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tutor::wordbank::lemmatize(tokens[i++ % tokens.size()]));
}
BENCHMARK(BM_Lemmatize);

void BM_WordBankScore(benchmark::State& state) {
  const auto text = sample_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tutor::scoring::wordbank_score(bank(), text));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WordBankScore)->Arg(50)->Arg(500)->Arg(5000);

void BM_Fuse(benchmark::State& state) {
  double x = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tutor::scoring::fuse_levels(x, 14.0 - x, {}));
    x = x > 13.0 ? 1.0 : x + 0.5;
  }
}
BENCHMARK(BM_Fuse);

void BM_Recommend(benchmark::State& state) {
  const auto catalog =
      tutor::resources::load_resources_file(std::string(TUTOR_SOURCE_DIR) + "/data/resources_sample.csv");
  const std::vector<tutor::ImprovementArea> areas = {
      {"Articles", 0.8, {"i want coffee"}, {}, "s"},
      {"Tenses", 0.6, {"I goed home"}, {}, "s"},
      {"Word Order", 0.5, {}, {}, "s"}};
  for (auto _ : state) benchmark::DoNotOptimize(tutor::resources::recommend(catalog, areas, 6.0, 3));
}
BENCHMARK(BM_Recommend);

}  // namespace
