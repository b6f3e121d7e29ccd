#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "app.hpp"
#include "tutor/api_server.hpp"
#include "tutor/serialization.hpp"

using namespace tutor;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string provider;
  std::string fixtures;
  std::string wordbank;
  std::string resources;
  std::string data_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_resources) {
  cmd->add_option("--config", f.config_path, "Config file (default: $TUTOR_CONFIG)");
  cmd->add_option("--provider", f.provider, "Model backend")->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--fixtures", f.fixtures, "Scripted replies for --provider=mock (JSON)");
  cmd->add_option("--wordbank", f.wordbank, "Word bank CSV");
  if (with_resources) cmd->add_option("--resources", f.resources, "Resources CSV");
}

config::ApiConfig resolve_config(const CommonFlags& f) {
  auto env = config::process_environment();
  std::optional<std::filesystem::path> file;
  if (!f.config_path.empty()) file = f.config_path;
  else if (auto it = env.find("TUTOR_CONFIG"); it != env.end() && !it->second.empty()) file = it->second;
  env.erase("TUTOR_CONFIG");
  auto cfg = config::load_config(file, env);
  if (!f.provider.empty()) cfg.provider.kind = f.provider;
  if (!f.fixtures.empty()) cfg.provider.fixtures = f.fixtures;
  if (!f.wordbank.empty()) cfg.wordbank_path = f.wordbank;
  if (!f.resources.empty()) cfg.resources_path = f.resources;
  if (!f.data_dir.empty()) cfg.data_dir = f.data_dir;
  if (cfg.provider.kind == "http" && (cfg.provider.base_url.empty() || cfg.provider.model.empty())) {
    throw config::ConfigError("provider.base_url", "http provider needs PROVIDER_BASE_URL and PROVIDER_MODEL");
  }
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt_level(double level) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << level;
  return os.str();
}

volatile std::sig_atomic_t g_stop = 0;

int run_serve(const CommonFlags& flags) {
  const auto cfg = resolve_config(flags);
  auto rt = app::build_runtime(cfg);
  service::ApiServer server({*rt->store, *rt->engine, *rt->signer, *rt->clock, *rt->ids, rt->transcriber});
  const int port = server.start(cfg.host, cfg.port);
  service::IdleSweeper sweeper(*rt->engine, cfg.idle_timeout, std::chrono::seconds(60));
  spdlog::info("listening on {}:{}", cfg.host, port);
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  spdlog::info("shutting down");
  server.stop();
  return 0;
}

int run_chat(const CommonFlags& flags, const std::string& email, bool as_json) {
  auto cfg = resolve_config(flags);
  app::RuntimeOptions opts;
  opts.in_memory_store = flags.data_dir.empty();
  opts.deterministic = cfg.provider.kind == "mock";
  auto rt = app::build_runtime(cfg, opts);

  auto learner = rt->store->find_learner_by_email(email);
  if (!learner) {
    learner = LearnerProfile{rt->ids->next("lrn"), email, email.substr(0, email.find('@')), rt->clock->now()};
    rt->store->create_learner(*learner);
  }
  const auto session = rt->engine->start_session(learner->learner_id);
  const bool interactive = isatty(STDIN_FILENO);
  if (interactive) std::cout << "Session " << session.session_id << ". Type /end to finish.\n";

  std::string line;
  while (true) {
    if (interactive) std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line) || line == "/end") break;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto r = rt->engine->handle_learner_message(learner->learner_id, session.session_id, line);
      if (as_json) {
        std::cout << json(r).dump() << "\n";
        continue;
      }
      std::cout << "Tutor: " << r.assistant_reply << "\n";
      for (const auto& t : r.exercise_events) {
        std::cout << "  [exercise " << dialogue::to_string(t.event) << ": " << to_string(t.exercise.type) << "]\n";
      }
      if (r.analysis_event) {
        std::cout << "  [improvement areas:";
        for (const auto& a : *r.analysis_event) std::cout << " " << a.area << " (" << a.confidence << ")";
        std::cout << "]\n";
      }
      if (r.proficiency_event && r.proficiency_event->kind == scoring::EstimateKind::full) {
        std::cout << "  [level " << fmt_level(r.proficiency_event->combined_level) << "]\n";
      }
      if (r.recommended) {
        for (const auto& res : *r.recommended) std::cout << "  [resource: " << res.title << " " << res.url << "]\n";
      }
    } catch (const provider::ProviderError& e) {
      std::cout << "Tutor is unavailable (" << e.what() << "); your message was saved, try again.\n";
    }
  }
  const auto summary = rt->engine->end_session(learner->learner_id, session.session_id);
  if (as_json) {
    std::cout << json{{"summary", summary.text}, {"degraded", summary.degraded}}.dump() << "\n";
  } else {
    std::cout << "Summary: " << summary.text << "\n";
  }
  return 0;
}

int run_assess(const CommonFlags& flags, const std::string& path) {
  const auto cfg = resolve_config(flags);
  const auto text = read_file(path);
  auto provider = app::make_provider(cfg.provider);
  const auto bank = cfg.wordbank_path.empty() ? wordbank::WordBank{} : wordbank::load_word_bank_file(cfg.wordbank_path);
  auto prompts =
      cfg.prompts_dir.empty() ? provider::PromptLibrary::builtin() : provider::PromptLibrary::from_directory(cfg.prompts_dir);
  std::unique_ptr<Clock> clock;
  if (cfg.provider.kind == "mock") clock = std::make_unique<ManualClock>(parse_iso8601("2026-01-05T09:00:00.000Z"));
  else clock = std::make_unique<SystemClock>();
  const auto est = scoring::assess_proficiency(bank, *provider, prompts, text, *clock, cfg.engine.scoring);
  json report = {{"file", path},
                 {"estimate", est},
                 {"band", resources::to_string(resources::band_for_level(est.combined_level))}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_import_wordbank(const std::string& path) {
  const auto bank = wordbank::load_word_bank_file(path);
  json hist = json::object();
  const auto h = bank.level_histogram();
  for (std::size_t i = 0; i < h.size(); ++i) hist[std::to_string(i + 1)] = h[i];
  std::cout << json{{"path", path}, {"size", bank.size()}, {"level_histogram", hist}}.dump(2) << "\n";
  return 0;
}

int run_import_resources(const std::string& path) {
  const auto catalog = resources::load_resources_file(path);
  std::cout << json{{"path", path}, {"size", catalog.size()}, {"per_area", catalog.per_area_counts()}}.dump(2) << "\n";
  return 0;
}

int run_export(const CommonFlags& flags, const std::string& session_id, const std::string& format_name,
               const std::string& email) {
  const auto cfg = resolve_config(flags);
  const auto format = store::parse_transcript_format(format_name);
  if (!format) throw ValidationError("--format must be json or text");
  auto st = store::SqliteStore::open_data_dir(cfg.data_dir);
  const auto learner = st->find_learner_by_email(email);
  if (!learner) throw store::NotFound("no learner with email " + email);
  std::cout << store::export_transcript(*st, learner->learner_id, session_id, *format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"English tutoring engine: API server, terminal chat and data tools"};
  cli.require_subcommand(1);
  spdlog::set_level(spdlog::level::warn);
  bool verbose = false;
  cli.add_flag("-v,--verbose", verbose, "Log engine activity to stderr");

  CommonFlags flags;
  std::string email = "learner@example.org";
  std::string target;
  std::string format = "json";
  bool as_json = false;

  auto* serve = cli.add_subcommand("serve", "Run the HTTP API");
  add_common(serve, flags, true);
  serve->add_option("--data-dir", flags.data_dir, "Store directory (default: $TUTOR_DATA_DIR)");

  auto* chat = cli.add_subcommand("chat", "Terminal tutoring session");
  add_common(chat, flags, true);
  chat->add_option("--email", email, "Learner identity");
  chat->add_option("--data-dir", flags.data_dir, "Persist the session in this store directory");
  chat->add_flag("--json", as_json, "Print each turn result as JSON");

  auto* assess = cli.add_subcommand("assess", "Estimate the proficiency level of a text file");
  add_common(assess, flags, false);
  assess->add_option("file", target, "Text file")->required();

  auto* import_wb = cli.add_subcommand("import-wordbank", "Validate a word bank CSV");
  import_wb->add_option("path", target, "CSV file")->required();

  auto* import_res = cli.add_subcommand("import-resources", "Validate a resources CSV");
  import_res->add_option("path", target, "CSV file")->required();

  auto* exp = cli.add_subcommand("export", "Print a stored session transcript");
  exp->add_option("session_id", target, "Session id")->required();
  exp->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  exp->add_option("--email", email, "Owner of the session")->required();
  exp->add_option("--config", flags.config_path, "Config file (default: $TUTOR_CONFIG)");
  exp->add_option("--data-dir", flags.data_dir, "Store directory (default: $TUTOR_DATA_DIR)");

  CLI11_PARSE(cli, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (*serve) return run_serve(flags);
    if (*chat) return run_chat(flags, email, as_json);
    if (*assess) return run_assess(flags, target);
    if (*import_wb) return run_import_wordbank(target);
    if (*import_res) return run_import_resources(target);
    if (*exp) return run_export(flags, target, format, email);
  } catch (const config::ConfigError& e) {
    std::cerr << "invalid configuration:\n" << e.report();
    return 1;
  } catch (const resources::RowValidation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
