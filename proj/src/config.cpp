#include "agentcf/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentcf/errors.hpp"
#include "agentcf/scripts.hpp"
#include "agentcf/slate.hpp"

namespace agentcf {

namespace {

using json = nlohmann::json;

std::filesystem::path resolve_path(const std::filesystem::path& base,
                                   const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

BackendMode backend_mode_from_string(std::string_view s) {
  if (s == "live") return BackendMode::Live;
  if (s == "record") return BackendMode::Record;
  if (s == "replay") return BackendMode::Replay;
  if (s == "script") return BackendMode::Script;
  throw ConfigError("unknown backend mode: " + std::string(s));
}

std::string_view to_string(BackendMode mode) {
  switch (mode) {
    case BackendMode::Live: return "live";
    case BackendMode::Record: return "record";
    case BackendMode::Replay: return "replay";
    case BackendMode::Script: return "script";
  }
  return "replay";
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc = json::parse(text, nullptr, false, /*ignore_comments=*/true);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ConfigError("config: not a valid JSON document");
  }

  std::vector<std::string> issues;
  RunConfig cfg;

  if (doc.contains("dataset")) {
    const auto& d = doc["dataset"];
    cfg.dataset.reviews = resolve_path(base_dir, d.value("reviews", ""));
    cfg.dataset.metadata = resolve_path(base_dir, d.value("metadata", ""));
    cfg.dataset.max_records = d.value("max_records", std::size_t{0});
    cfg.dataset.strict = d.value("strict", false);
    cfg.dataset.domain_noun = d.value("domain_noun", std::string("CD"));
    cfg.dataset.user_seed_text =
        d.value("user_seed_text", std::string("I enjoy listening to CDs very much."));
    if (cfg.dataset.user_seed_text.empty()) issues.push_back("dataset.user_seed_text is empty");
  }
  if (doc.contains("subset")) {
    const auto& s = doc["subset"];
    cfg.subset.n_users = s.value("n_users", std::size_t{100});
    cfg.subset.mode = s.value("mode", std::string("sparse"));
    cfg.subset.seed = s.value("seed", std::uint64_t{42});
    if (cfg.subset.n_users == 0) issues.push_back("subset.n_users must be positive");
    if (cfg.subset.mode != "sparse" && cfg.subset.mode != "dense") {
      issues.push_back("subset.mode must be 'sparse' or 'dense'");
    }
  }
  if (doc.contains("routes")) {
    for (const auto& [kind, model] : doc["routes"].items()) {
      try {
        cfg.routes.models[task_kind_from_string(kind)] = model.get<std::string>();
      } catch (const ConfigError& e) {
        issues.push_back(e.what());
      }
    }
  }
  for (auto kind : {TaskKind::Selection, TaskKind::Reflection, TaskKind::Inference,
                    TaskKind::Auxiliary}) {
    if (!cfg.routes.models.contains(kind) || cfg.routes.models.at(kind).empty()) {
      issues.push_back("routes: no model for '" + std::string(to_string(kind)) + "'");
    }
  }
  if (doc.contains("backend")) {
    const auto& b = doc["backend"];
    try {
      cfg.backend.mode = backend_mode_from_string(b.value("mode", std::string("replay")));
    } catch (const ConfigError& e) {
      issues.push_back(e.what());
    }
    cfg.backend.script = b.value("script", std::string("pick-first"));
    cfg.backend.replay_store = resolve_path(base_dir, b.value("replay_store", ""));
    cfg.backend.endpoint = b.value("endpoint", std::string{});
    cfg.backend.path = b.value("path", std::string("/v1/chat/completions"));
    cfg.backend.api_key_env = b.value("api_key_env", std::string("LLM_API_KEY"));
    cfg.backend.max_retries = b.value("max_retries", 3);
    cfg.backend.initial_backoff_seconds = b.value("initial_backoff_seconds", 0.5);
  }
  switch (cfg.backend.mode) {
    case BackendMode::Live:
    case BackendMode::Record:
      if (cfg.backend.endpoint.empty()) {
        issues.push_back("backend.endpoint required for live/record mode");
      }
      if (cfg.backend.mode == BackendMode::Record && cfg.backend.replay_store.empty()) {
        issues.push_back("backend.replay_store required for record mode");
      }
      break;
    case BackendMode::Replay:
      if (cfg.backend.replay_store.empty()) {
        issues.push_back("backend.replay_store required for replay mode");
      }
      break;
    case BackendMode::Script: {
      auto names = script_names();
      if (std::find(names.begin(), names.end(), cfg.backend.script) == names.end()) {
        issues.push_back("backend.script: unknown script '" + cfg.backend.script + "'");
      }
      break;
    }
  }
  if (doc.contains("train")) {
    const auto& t = doc["train"];
    cfg.train.max_rounds = t.value("max_rounds", 2);
    try {
      cfg.train.ordering =
          ordering_from_string(t.value("ordering", std::string("global-chronological")));
    } catch (const ConfigError& e) {
      issues.push_back(e.what());
    }
    cfg.train.neg_seed = t.value("neg_seed", std::uint64_t{1});
    cfg.train.checkpoint_every = t.value("checkpoint_every", std::size_t{50});
    const std::string neg_pos = t.value("neg_position", std::string("first"));
    if (neg_pos == "first") {
      cfg.train.neg_position = NegPosition::First;
    } else if (neg_pos == "second") {
      cfg.train.neg_position = NegPosition::Second;
    } else {
      issues.push_back("train.neg_position must be 'first' or 'second'");
    }
    if (cfg.train.max_rounds < 1) issues.push_back("train.max_rounds must be >= 1");
  } else {
    cfg.train.neg_seed = 1;
  }
  if (doc.contains("eval")) {
    const auto& e = doc["eval"];
    if (e.contains("strategies")) {
      cfg.eval.strategies = e["strategies"].get<std::vector<std::string>>();
    }
    cfg.eval.reps = e.value("reps", std::size_t{3});
    if (e.contains("ks")) cfg.eval.ks = e["ks"].get<std::vector<std::size_t>>();
    cfg.eval.slate_seed = e.value("slate_seed", std::uint64_t{7});
    cfg.eval.slate_size = e.value("slate_size", std::size_t{10});
    cfg.eval.retrieval_k = e.value("retrieval_k", std::size_t{3});
    cfg.eval.history_cap = e.value("history_cap", std::size_t{20});
    cfg.eval.random_seed = e.value("random_seed", std::uint64_t{13});
    if (cfg.eval.reps == 0) issues.push_back("eval.reps must be positive");
    if (cfg.eval.slate_size < 2) issues.push_back("eval.slate_size must be >= 2");
    for (const auto& name : cfg.eval.strategies) {
      try {
        strategy_from_string(name);
      } catch (const ConfigError& e2) {
        issues.push_back(e2.what());
      }
    }
    for (std::size_t k : cfg.eval.ks) {
      if (k == 0 || k > cfg.eval.slate_size) {
        issues.push_back("eval.ks entry " + std::to_string(k) + " out of range");
      }
    }
  }
  if (doc.contains("bpr")) {
    const auto& b = doc["bpr"];
    cfg.bpr.dim = b.value("dim", std::size_t{64});
    cfg.bpr.learning_rate = b.value("learning_rate", 0.01);
    cfg.bpr.l2_reg = b.value("l2_reg", 1e-4);
    cfg.bpr.epochs = b.value("epochs", std::size_t{200});
    cfg.bpr.seed = b.value("seed", std::uint64_t{3});
    if (cfg.bpr.dim == 0) issues.push_back("bpr.dim must be positive");
    if (cfg.bpr.learning_rate <= 0) issues.push_back("bpr.learning_rate must be positive");
  }
  if (doc.contains("probes")) {
    const auto& p = doc["probes"];
    cfg.probes.bias_seed = p.value("bias_seed", std::uint64_t{11});
    cfg.probes.propagation_seed_user = p.value("propagation_seed_user", std::string{});
    cfg.probes.propagation_special_text = p.value("propagation_special_text", std::string{});
    if (p.contains("propagation_keywords")) {
      cfg.probes.propagation_keywords =
          p["propagation_keywords"].get<std::vector<std::string>>();
    }
    cfg.probes.propagation_question = p.value("propagation_question", std::string{});
    cfg.probes.cold_mode = p.value("cold_mode", std::string("similar"));
    cfg.probes.cold_neighbors = p.value("cold_neighbors", std::size_t{4});
    cfg.probes.cold_popular_pool = p.value("cold_popular_pool", std::size_t{20});
    cfg.probes.cold_max_cases = p.value("cold_max_cases", std::size_t{20});
    cfg.probes.review_max_authors = p.value("review_max_authors", std::size_t{5});
    if (cfg.probes.cold_mode != "similar" && cfg.probes.cold_mode != "distinct") {
      issues.push_back("probes.cold_mode must be 'similar' or 'distinct'");
    }
  }
  if (doc.contains("templates")) {
    cfg.templates = resolve_path(base_dir, doc["templates"].get<std::string>());
  }
  if (doc.contains("run_dir")) {
    cfg.run_dir = resolve_path(base_dir, doc["run_dir"].get<std::string>());
  } else {
    issues.push_back("run_dir is required");
  }
  cfg.jobs = doc.value("jobs", 1);
  if (cfg.jobs < 1) issues.push_back("jobs must be >= 1");

  if (!issues.empty()) {
    std::string all = "config validation failed:";
    for (const auto& issue : issues) all += "\n  - " + issue;
    throw ConfigError(all);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["dataset"] = {{"reviews", cfg.dataset.reviews.string()},
                    {"metadata", cfg.dataset.metadata.string()},
                    {"max_records", cfg.dataset.max_records},
                    {"strict", cfg.dataset.strict},
                    {"domain_noun", cfg.dataset.domain_noun},
                    {"user_seed_text", cfg.dataset.user_seed_text}};
  doc["subset"] = {{"n_users", cfg.subset.n_users},
                   {"mode", cfg.subset.mode},
                   {"seed", cfg.subset.seed}};
  json routes = json::object();
  for (const auto& [kind, model] : cfg.routes.models) {
    routes[std::string(to_string(kind))] = model;
  }
  doc["routes"] = std::move(routes);
  doc["backend"] = {{"mode", std::string(to_string(cfg.backend.mode))},
                    {"script", cfg.backend.script},
                    {"replay_store", cfg.backend.replay_store.string()},
                    {"endpoint", cfg.backend.endpoint},
                    {"path", cfg.backend.path},
                    {"api_key_env", cfg.backend.api_key_env},
                    {"max_retries", cfg.backend.max_retries},
                    {"initial_backoff_seconds", cfg.backend.initial_backoff_seconds}};
  doc["train"] = {{"max_rounds", cfg.train.max_rounds},
                  {"ordering", std::string(to_string(cfg.train.ordering))},
                  {"neg_position",
                   cfg.train.neg_position == NegPosition::First ? "first" : "second"},
                  {"neg_seed", cfg.train.neg_seed},
                  {"checkpoint_every", cfg.train.checkpoint_every}};
  doc["eval"] = {{"strategies", cfg.eval.strategies},
                 {"reps", cfg.eval.reps},
                 {"ks", cfg.eval.ks},
                 {"slate_seed", cfg.eval.slate_seed},
                 {"slate_size", cfg.eval.slate_size},
                 {"retrieval_k", cfg.eval.retrieval_k},
                 {"history_cap", cfg.eval.history_cap},
                 {"random_seed", cfg.eval.random_seed}};
  doc["bpr"] = {{"dim", cfg.bpr.dim},
                {"learning_rate", cfg.bpr.learning_rate},
                {"l2_reg", cfg.bpr.l2_reg},
                {"epochs", cfg.bpr.epochs},
                {"seed", cfg.bpr.seed}};
  doc["probes"] = {{"bias_seed", cfg.probes.bias_seed},
                   {"propagation_seed_user", cfg.probes.propagation_seed_user},
                   {"propagation_special_text", cfg.probes.propagation_special_text},
                   {"propagation_keywords", cfg.probes.propagation_keywords},
                   {"propagation_question", cfg.probes.propagation_question},
                   {"cold_mode", cfg.probes.cold_mode},
                   {"cold_neighbors", cfg.probes.cold_neighbors},
                   {"cold_popular_pool", cfg.probes.cold_popular_pool},
                   {"cold_max_cases", cfg.probes.cold_max_cases},
                   {"review_max_authors", cfg.probes.review_max_authors}};
  doc["templates"] = cfg.templates.string();
  doc["run_dir"] = cfg.run_dir.string();
  doc["jobs"] = cfg.jobs;
  return doc.dump(2) + "\n";
}

Gateway make_gateway(const RunConfig& cfg) {
  std::unique_ptr<Backend> backend;
  switch (cfg.backend.mode) {
    case BackendMode::Script:
      backend = std::make_unique<ScriptBackend>(named_script(cfg.backend.script));
      break;
    case BackendMode::Replay: {
      auto store = std::make_shared<ReplayStore>(ReplayStore::open(cfg.backend.replay_store));
      backend = std::make_unique<ReplayBackend>(std::move(store));
      break;
    }
    case BackendMode::Record: {
      HttpBackendConfig http;
      http.endpoint = cfg.backend.endpoint;
      http.path = cfg.backend.path;
      http.api_key_env = cfg.backend.api_key_env;
      http.retry.max_retries = cfg.backend.max_retries;
      http.retry.initial_backoff_seconds = cfg.backend.initial_backoff_seconds;
      auto store = std::make_shared<ReplayStore>(ReplayStore::create(cfg.backend.replay_store));
      backend = std::make_unique<RecordingBackend>(std::make_unique<HttpBackend>(http),
                                                   std::move(store));
      break;
    }
    case BackendMode::Live: {
      HttpBackendConfig http;
      http.endpoint = cfg.backend.endpoint;
      http.path = cfg.backend.path;
      http.api_key_env = cfg.backend.api_key_env;
      http.retry.max_retries = cfg.backend.max_retries;
      http.retry.initial_backoff_seconds = cfg.backend.initial_backoff_seconds;
      backend = std::make_unique<HttpBackend>(http);
      break;
    }
  }
  return Gateway(cfg.routes, std::move(backend));
}

}  // namespace agentcf
