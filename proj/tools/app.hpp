#pragma once

#include <memory>
#include <optional>
#include <string>

#include "tutor/auth.hpp"
#include "tutor/config.hpp"
#include "tutor/dialogue.hpp"
#include "tutor/provider.hpp"
#include "tutor/resources.hpp"
#include "tutor/store.hpp"
#include "tutor/transcription.hpp"
#include "tutor/wordbank.hpp"

namespace tutor::app {

/// Everything a running tutor needs, wired from an ApiConfig.
struct Runtime {
  std::unique_ptr<Clock> clock;
  std::unique_ptr<IdGenerator> ids;
  std::unique_ptr<store::Store> store;
  std::unique_ptr<provider::Provider> provider;
  wordbank::WordBank bank;
  std::optional<resources::ResourceCatalog> catalog;
  std::unique_ptr<dialogue::TutorEngine> engine;
  std::unique_ptr<auth::TokenSigner> signer;
  transcription::UnavailableTranscriber transcriber;
};

struct RuntimeOptions {
  bool in_memory_store = false;
  /// Fixed clock and sequential ids, for reproducible offline runs.
  bool deterministic = false;
};

std::unique_ptr<provider::Provider> make_provider(const config::ProviderSettings& settings);

std::unique_ptr<Runtime> build_runtime(const config::ApiConfig& cfg, const RuntimeOptions& options = {});

}  // namespace tutor::app
