#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "agentcf/config.hpp"
#include "agentcf/errors.hpp"
#include "agentcf/pipeline.hpp"

namespace {

// Exit codes by error class, so callers can react without parsing stderr.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitGateway = 4;
constexpr int kExitParse = 5;
constexpr int kExitOther = 1;

int classify_exit(const agentcf::Error& error) {
  if (dynamic_cast<const agentcf::ConfigError*>(&error)) return kExitConfig;
  if (dynamic_cast<const agentcf::DataError*>(&error)) return kExitData;
  if (dynamic_cast<const agentcf::GatewayError*>(&error)) return kExitGateway;
  if (dynamic_cast<const agentcf::ParseError*>(&error)) return kExitParse;
  return kExitOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agentcf: collaboratively optimized user/item agents over interaction logs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string backend_override;
  std::string run_dir_override;
  bool force = false;
  bool resume = false;
  int jobs = 1;
  app.add_option("--config", config_path, "Path to the run config (JSON, comments allowed)")
      ->required();
  app.add_option("--backend", backend_override,
                 "Override backend mode: live, record, replay, script");
  app.add_option("--run-dir", run_dir_override, "Override the run directory");
  app.add_flag("--force", force, "Overwrite existing outputs in the run directory");
  app.add_option("--jobs", jobs, "Concurrency limit for live-mode calls");

  auto* cmd_ingest = app.add_subcommand("ingest", "Parse source files into a dataset snapshot");
  auto* cmd_sample = app.add_subcommand("sample", "Draw the configured dense/sparse subset");
  auto* cmd_stats = app.add_subcommand("stats", "Print dataset statistics");
  auto* cmd_train = app.add_subcommand("train", "Run the collaborative optimization loop");
  cmd_train->add_flag("--resume", resume, "Continue from the latest checkpoint");
  auto* cmd_eval = app.add_subcommand("eval", "Rank test slates with the configured strategies");
  auto* cmd_bias = app.add_subcommand("probe-bias", "Position/popularity bias probe");
  auto* cmd_prop = app.add_subcommand("probe-propagation", "Preference propagation probe");
  auto* cmd_warm = app.add_subcommand("warmup-cold", "Cold-item warmup and paired ranking eval");
  auto* cmd_reviews = app.add_subcommand("reviews", "Review exchange probe");

  CLI11_PARSE(app, argc, argv);

  try {
    agentcf::RunConfig cfg = agentcf::load_config(config_path);
    if (!backend_override.empty()) {
      cfg.backend.mode = agentcf::backend_mode_from_string(backend_override);
    }
    if (!run_dir_override.empty()) {
      cfg.run_dir = run_dir_override;
    } else if (const char* env_dir = std::getenv("AGENTCF_RUN_DIR"); env_dir && *env_dir) {
      cfg.run_dir = env_dir;
    }
    cfg.jobs = jobs;

    agentcf::PipelineOptions opts;
    opts.force = force;
    opts.resume = resume;

    if (cmd_ingest->parsed()) {
      agentcf::run_ingest(cfg, opts);
    } else if (cmd_sample->parsed()) {
      agentcf::run_sample(cfg, opts);
    } else if (cmd_stats->parsed()) {
      std::cout << agentcf::run_stats(cfg, opts);
    } else if (cmd_train->parsed()) {
      agentcf::run_train(cfg, opts);
    } else if (cmd_eval->parsed()) {
      agentcf::run_eval_cmd(cfg, opts);
    } else if (cmd_bias->parsed()) {
      agentcf::run_probe_bias(cfg, opts);
    } else if (cmd_prop->parsed()) {
      agentcf::run_probe_propagation(cfg, opts);
    } else if (cmd_warm->parsed()) {
      agentcf::run_warmup_cold(cfg, opts);
    } else if (cmd_reviews->parsed()) {
      agentcf::run_reviews(cfg, opts);
    }
    return 0;
  } catch (const agentcf::Error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return classify_exit(error);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitOther;
  }
}
