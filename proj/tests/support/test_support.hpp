#pragma once

#include <cstdint>
#include <filesystem>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <httplib.h>

#include "tutor/api_server.hpp"
#include "tutor/auth.hpp"
#include "tutor/clock.hpp"
#include "tutor/dialogue.hpp"
#include "tutor/provider.hpp"
#include "tutor/resources.hpp"
#include "tutor/store.hpp"
#include "tutor/transcription.hpp"
#include "tutor/wordbank.hpp"

namespace tutor::test {

std::filesystem::path source_dir();
std::filesystem::path test_data_dir();
std::filesystem::path schema_path(const std::string& name);
std::string read_text(const std::filesystem::path& path);

Timestamp epoch();  // 2026-01-05T09:00:00.000Z

/// The ordering-coffee script shipped in data/fixtures.
provider::Fixtures persona_coffee_fixtures();
const std::vector<std::string>& persona_coffee_messages();

wordbank::WordBank sample_word_bank();
resources::ResourceCatalog sample_catalog();

/// A complete offline engine: in-memory store, scripted provider, fixed
/// clock, sequential ids and one registered learner per email given.
struct Harness {
  explicit Harness(provider::Fixtures fixtures, dialogue::EngineConfig config = {},
                   std::vector<std::string> emails = {"yuki@example.org"});

  ManualClock clock{epoch()};
  SequentialIdGenerator ids;
  store::SqliteStore store{":memory:"};
  std::unique_ptr<provider::ScriptedProvider> provider;
  wordbank::WordBank bank;
  resources::ResourceCatalog catalog;
  std::unique_ptr<dialogue::TutorEngine> engine;
  std::vector<std::string> learners;  // learner ids, same order as emails
};

/// Wraps a provider and holds every tutor_reply call until release() so tests
/// can keep a turn in flight.
class GatedProvider final : public provider::Provider {
 public:
  explicit GatedProvider(provider::Provider& inner) : inner_(inner) {}

  provider::ChatResponse complete(const provider::ChatRequest& request) override;
  std::string id() const override { return inner_.id(); }

  /// Blocks until a tutor_reply call is waiting at the gate.
  void wait_until_entered();
  void release();

 private:
  provider::Provider& inner_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool entered_ = false;
  bool open_ = false;
};

/// Harness plus the HTTP service on a free local port. With `gated`, every
/// tutor reply waits at `gate` until released.
struct ApiHarness {
  explicit ApiHarness(provider::Fixtures fixtures, bool gated = false);
  ~ApiHarness();

  Harness base;
  GatedProvider gate;
  std::unique_ptr<dialogue::TutorEngine> engine;
  auth::TokenSigner signer;
  transcription::UnavailableTranscriber transcriber;
  std::unique_ptr<service::ApiServer> server;
  int port = 0;

  httplib::Client client() const;
  /// POST /auth/login; returns the bearer token.
  std::string login(const std::string& email);
  static httplib::Headers bearer(const std::string& token);
};

/// Random bank + text whose expected word-bank matches are known by
/// construction: every emitted token's lemma is tracked by the generator, not
/// computed by the lemmatizer.
struct SyntheticCase {
  wordbank::WordBank bank;
  std::string text;
  std::size_t token_count = 0;
  std::vector<int> matched_levels;  // in text order
};

SyntheticCase make_synthetic_case(std::uint32_t seed);

/// Brute-force statistics over a level list.
double oracle_average(const std::vector<int>& levels);
double oracle_median(std::vector<int> levels);

struct IsolationReport {
  std::size_t ops = 0;
  std::size_t cross_reads = 0;       // data of the other learner returned to a caller
  std::size_t foreign_attempts = 0;  // operations aimed at the other learner's session
  std::size_t foreign_denied = 0;    // ... that raised Forbidden or NotFound
};

/// Two learners interleave random creates, appends, reads, lists and exports
/// against one store, half the time aimed at the other learner's sessions.
IsolationReport run_isolation_fuzz(store::Store& store, std::size_t ops, std::uint32_t seed);

/// Runs the persona script (3 messages + end) and returns the JSON transcript.
std::string run_persona_transcript();

}  // namespace tutor::test
