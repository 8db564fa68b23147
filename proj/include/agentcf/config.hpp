#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agentcf/baselines.hpp"
#include "agentcf/gateway.hpp"
#include "agentcf/optimizer.hpp"

namespace agentcf {

enum class BackendMode { Live, Record, Replay, Script };

BackendMode backend_mode_from_string(std::string_view s);
std::string_view to_string(BackendMode mode);

struct DatasetConfig {
  std::filesystem::path reviews;
  std::filesystem::path metadata;
  std::size_t max_records = 0;
  bool strict = false;
  std::string domain_noun = "CD";
  std::string user_seed_text = "I enjoy listening to CDs very much.";
};

struct SubsetConfig {
  std::size_t n_users = 100;
  std::string mode = "sparse";
  std::uint64_t seed = 42;
};

struct BackendConfig {
  BackendMode mode = BackendMode::Replay;
  std::string script = "pick-first";
  std::filesystem::path replay_store;
  std::string endpoint;
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "LLM_API_KEY";
  int max_retries = 3;
  double initial_backoff_seconds = 0.5;
};

struct EvalConfig {
  std::vector<std::string> strategies{"pop", "bm25", "bpr", "agentcf-b"};
  std::size_t reps = 3;
  std::vector<std::size_t> ks{1, 5, 10};
  std::uint64_t slate_seed = 7;
  std::size_t slate_size = 10;
  std::size_t retrieval_k = 3;
  std::size_t history_cap = 20;
  std::uint64_t random_seed = 13;  // drives the uniform-random calibration ranker
};

struct ProbeConfig {
  std::uint64_t bias_seed = 11;
  std::string propagation_seed_user;
  std::string propagation_special_text;
  std::vector<std::string> propagation_keywords;
  std::string propagation_question;
  std::string cold_mode = "similar";
  std::size_t cold_neighbors = 4;
  std::size_t cold_popular_pool = 20;
  std::size_t cold_max_cases = 20;
  std::size_t review_max_authors = 5;
};

struct RunConfig {
  DatasetConfig dataset;
  SubsetConfig subset;
  RouteTable routes = RouteTable::defaults();
  BackendConfig backend;
  TrainConfig train;
  EvalConfig eval;
  BPRConfig bpr;
  ProbeConfig probes;
  std::filesystem::path templates = "templates";
  std::filesystem::path run_dir;
  int jobs = 1;
};

/// Parses a JSON config (comments allowed) and validates it, reporting every
/// problem found rather than the first.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Canonical serialized form written into the run directory.
std::string config_to_json(const RunConfig& cfg);

/// Builds the gateway for the config's backend mode. `record`/`replay` use
/// the configured store path.
Gateway make_gateway(const RunConfig& cfg);

}  // namespace agentcf
