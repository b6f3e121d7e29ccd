#include "app.hpp"

#include <fstream>

#include "tutor/http_provider.hpp"

namespace tutor::app {

std::unique_ptr<provider::Provider> make_provider(const config::ProviderSettings& settings) {
  if (settings.kind == "http") {
    provider::HttpProviderConfig hc;
    hc.base_url = settings.base_url;
    hc.api_key = settings.api_key;
    hc.model = settings.model;
    hc.timeout = settings.timeout;
    hc.max_retries = settings.max_retries;
    return std::make_unique<provider::HttpProvider>(hc);
  }
  if (settings.fixtures.empty()) {
    throw config::ConfigError("provider.fixtures", "required when provider.kind = \"mock\"");
  }
  std::ifstream in(settings.fixtures);
  if (!in) throw config::ConfigError("provider.fixtures", "cannot open " + settings.fixtures);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config::ConfigError("provider.fixtures", std::string("invalid JSON: ") + e.what());
  }
  return provider::ScriptedProvider::from_json(doc);
}

std::unique_ptr<Runtime> build_runtime(const config::ApiConfig& cfg, const RuntimeOptions& options) {
  auto rt = std::make_unique<Runtime>();
  if (options.deterministic) {
    rt->clock = std::make_unique<ManualClock>(parse_iso8601("2026-01-05T09:00:00.000Z"));
    rt->ids = std::make_unique<SequentialIdGenerator>();
  } else {
    rt->clock = std::make_unique<SystemClock>();
    rt->ids = std::make_unique<RandomIdGenerator>();
  }
  if (options.in_memory_store) {
    rt->store = std::make_unique<store::SqliteStore>(":memory:");
  } else {
    rt->store = store::SqliteStore::open_data_dir(cfg.data_dir);
  }
  rt->provider = make_provider(cfg.provider);
  if (!cfg.wordbank_path.empty()) rt->bank = wordbank::load_word_bank_file(cfg.wordbank_path);
  if (!cfg.resources_path.empty()) rt->catalog = resources::load_resources_file(cfg.resources_path);
  auto prompts =
      cfg.prompts_dir.empty() ? provider::PromptLibrary::builtin() : provider::PromptLibrary::from_directory(cfg.prompts_dir);
  rt->engine = std::make_unique<dialogue::TutorEngine>(*rt->store, *rt->provider, rt->bank,
                                                       rt->catalog ? &*rt->catalog : nullptr, std::move(prompts),
                                                       *rt->clock, *rt->ids, cfg.engine);
  rt->signer = std::make_unique<auth::TokenSigner>(cfg.auth_secret, *rt->clock,
                                                   std::chrono::duration_cast<std::chrono::seconds>(cfg.token_ttl));
  return rt;
}

}  // namespace tutor::app
