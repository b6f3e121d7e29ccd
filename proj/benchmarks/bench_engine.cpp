#include <benchmark/benchmark.h>

#include <spdlog/spdlog.h>

#include "tutor/dialogue.hpp"

namespace {

using tutor::provider::PromptKind;

// A full turn against an in-memory store, scripted provider included.
void BM_LearnerTurn(benchmark::State& state) {
  spdlog::set_level(spdlog::level::warn);
  tutor::store::SqliteStore store(":memory:");
  tutor::provider::ScriptedProvider provider(
      {{PromptKind::tutor_reply, {"Nice. Tell me more about your day."}},
       {PromptKind::level_judge, {"6"}},
       {PromptKind::improvement_analysis, {R"([{"area": "Tenses", "confidence": 0.7, "examples": []}])"}}});
  const auto bank = tutor::wordbank::load_word_bank_file(std::string(TUTOR_SOURCE_DIR) + "/data/wordbank_sample.csv");
  tutor::ManualClock clock(tutor::from_millis(0));
  tutor::SequentialIdGenerator ids;
  store.create_learner({"lrn", "b@example.org", "b", clock.now()});
  tutor::dialogue::TutorEngine engine(store, provider, bank, nullptr, tutor::provider::PromptLibrary::builtin(), clock,
                                      ids);
  auto session = engine.start_session("lrn");
  int n = 0;
  for (auto _ : state) {
    // Keep the history bounded so iterations stay comparable.
    if (++n % 30 == 0) session = engine.start_session("lrn");
    benchmark::DoNotOptimize(engine.handle_learner_message("lrn", session.session_id, "I goed to the shop yesterday"));
  }
}
BENCHMARK(BM_LearnerTurn);

}  // namespace
