#include "agentcf/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentcf/agents.hpp"
#include "agentcf/errors.hpp"
#include "agentcf/eval.hpp"
#include "agentcf/ranker.hpp"
#include "agentcf/rng.hpp"
#include "agentcf/scripts.hpp"
#include "agentcf/text.hpp"

namespace agentcf {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write: " + path.string());
  out << content;
}

void guard_output(const std::filesystem::path& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw ConfigError("output exists (use --force to overwrite): " + path.string());
  }
}

/// Keeps the resolved config frozen next to the outputs; a changed config
/// needs --force, so every run directory stays reproducible from its copy.
void freeze_config(const RunConfig& cfg, bool force) {
  std::filesystem::create_directories(cfg.run_dir);
  const auto frozen = cfg.run_dir / "config.resolved.json";
  const std::string current = config_to_json(cfg);
  if (std::filesystem::exists(frozen)) {
    if (read_file(frozen) != current && !force) {
      throw ConfigError("config differs from frozen copy (use --force): " + frozen.string());
    }
  }
  write_file(frozen, current);
}

Dataset sampled_or_full(const RunConfig& cfg) {
  const auto sampled = cfg.run_dir / "dataset.json";
  if (std::filesystem::exists(sampled)) return dataset_load(read_file(sampled));
  const auto full = cfg.run_dir / "dataset_full.json";
  if (std::filesystem::exists(full)) return dataset_load(read_file(full));
  IngestOptions opts{cfg.dataset.max_records, cfg.dataset.strict};
  return ingest(cfg.dataset.reviews, cfg.dataset.metadata, opts, nullptr,
                cfg.dataset.domain_noun);
}

MemoryStore load_store(const RunConfig& cfg) {
  const auto path = cfg.run_dir / "memory.json";
  if (!std::filesystem::exists(path)) {
    throw ConfigError("no memory snapshot in run dir; run `train` first: " + path.string());
  }
  return MemoryStore::load(read_file(path));
}

PopularityTable train_popularity(const Split& split) {
  PopularityTable table;
  std::int64_t total = 0;
  for (const auto& [_, items] : split.train) {
    for (const auto& item : items) {
      ++table.counts[item];
      ++total;
    }
  }
  for (const auto& [item, count] : table.counts) {
    table.probabilities[item] = static_cast<double>(count) / static_cast<double>(total);
  }
  return table;
}

RankingResult random_rank(const CandidateSlate& slate, std::uint64_t seed, std::size_t rep) {
  RankingResult result;
  result.slate = slate;
  result.strategy = Strategy::Random;
  result.repetition = rep;
  result.permutation = slate.candidates;
  Rng rng(mix_seed(seed, rep, fnv1a64(slate.user_id)));
  shuffle_in_place(result.permutation, rng);
  return result;
}

std::vector<StrategyRanker> build_strategies(const RunConfig& cfg, const Dataset& ds,
                                             const Split& split, AgentContext& ctx,
                                             const MemoryStore* store, const MFModel* bpr,
                                             const PopularityTable& train_pop) {
  std::vector<StrategyRanker> rankers;
  for (const auto& name : cfg.eval.strategies) {
    Strategy strategy = strategy_from_string(name);
    switch (strategy) {
      case Strategy::Pop:
        rankers.push_back({name, [&train_pop](const CandidateSlate& slate, std::size_t) {
                             return pop_rank(slate, train_pop);
                           }});
        break;
      case Strategy::BM25:
        rankers.push_back({name, [&ds, &split](const CandidateSlate& slate, std::size_t) {
                             std::vector<std::string> history_texts;
                             for (const auto& id : split.train.at(slate.user_id)) {
                               history_texts.push_back(
                                   render_identity(ds.items.at(id), ds.domain_noun));
                             }
                             std::map<std::string, std::string> texts;
                             for (const auto& id : slate.candidates) {
                               texts[id] = render_identity(ds.items.at(id), ds.domain_noun);
                             }
                             return bm25_rank(slate, history_texts, texts);
                           }});
        break;
      case Strategy::BPR:
        rankers.push_back({name, [bpr](const CandidateSlate& slate, std::size_t) {
                             if (!bpr) throw ConfigError("bpr model unavailable");
                             return bpr_rank(*bpr, slate);
                           }});
        break;
      case Strategy::B:
        rankers.push_back({name, [&ctx, store, &ds](const CandidateSlate& slate,
                                                    std::size_t rep) {
                             if (!store) throw ConfigError("memory store unavailable");
                             return rank_basic(ctx, *store, ds.items, slate, rep);
                           }});
        break;
      case Strategy::B_R:
        rankers.push_back({name, [&ctx, store, &ds, &cfg](const CandidateSlate& slate,
                                                          std::size_t rep) {
                             if (!store) throw ConfigError("memory store unavailable");
                             return rank_with_retrieval(ctx, *store, ds.items, slate,
                                                        cfg.eval.retrieval_k, rep);
                           }});
        break;
      case Strategy::B_H:
        rankers.push_back(
            {name, [&ctx, store, &ds, &split, &cfg](const CandidateSlate& slate,
                                                    std::size_t rep) {
               if (!store) throw ConfigError("memory store unavailable");
               return rank_with_history(ctx, *store, ds.items, slate,
                                        split.train.at(slate.user_id), cfg.eval.history_cap,
                                        rep);
             }});
        break;
      case Strategy::LLMRank:
        rankers.push_back(
            {name, [&ctx, &ds, &split, &cfg](const CandidateSlate& slate, std::size_t rep) {
               return llmrank_zero_shot(ctx, ds.items, slate, split.train.at(slate.user_id),
                                        cfg.eval.history_cap, rep, ds.domain_noun);
             }});
        break;
      case Strategy::Random:
        rankers.push_back({name, [&cfg](const CandidateSlate& slate, std::size_t rep) {
                             return random_rank(slate, cfg.eval.random_seed, rep);
                           }});
        break;
    }
  }
  return rankers;
}

bool needs_store(const RunConfig& cfg) {
  for (const auto& name : cfg.eval.strategies) {
    Strategy s = strategy_from_string(name);
    if (s == Strategy::B || s == Strategy::B_R || s == Strategy::B_H) return true;
  }
  return false;
}

bool needs_bpr(const RunConfig& cfg) {
  return std::any_of(cfg.eval.strategies.begin(), cfg.eval.strategies.end(),
                     [](const std::string& n) { return n == "bpr"; });
}

}  // namespace

Dataset pipeline_dataset(const RunConfig& cfg) { return sampled_or_full(cfg); }

void run_ingest(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  const auto out = cfg.run_dir / "dataset_full.json";
  guard_output(out, opts.force);
  IngestOptions ingest_opts{cfg.dataset.max_records, cfg.dataset.strict};
  IngestReport report;
  Dataset ds = ingest(cfg.dataset.reviews, cfg.dataset.metadata, ingest_opts, &report,
                      cfg.dataset.domain_noun);
  write_file(out, dataset_snapshot(ds));
  for (const auto& warning : report.warnings) std::cerr << "warning: " << warning << "\n";
}

void run_sample(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  const auto out = cfg.run_dir / "dataset.json";
  guard_output(out, opts.force);
  const auto full_path = cfg.run_dir / "dataset_full.json";
  Dataset full;
  if (std::filesystem::exists(full_path)) {
    full = dataset_load(read_file(full_path));
  } else {
    IngestOptions ingest_opts{cfg.dataset.max_records, cfg.dataset.strict};
    full = ingest(cfg.dataset.reviews, cfg.dataset.metadata, ingest_opts, nullptr,
                  cfg.dataset.domain_noun);
  }
  Dataset subset = sample_subset(full, cfg.subset.n_users,
                                 subset_mode_from_string(cfg.subset.mode), cfg.subset.seed);
  write_file(out, dataset_snapshot(subset));
}

std::string run_stats(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  Dataset ds = sampled_or_full(cfg);
  const std::string report = format_stats(compute_stats(ds));
  write_file(cfg.run_dir / "stats.txt", report);
  return report;
}

void run_train(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  const auto memory_out = cfg.run_dir / "memory.json";
  const auto trace_out = cfg.run_dir / "trace.jsonl";
  if (!opts.resume) {
    guard_output(memory_out, opts.force);
    guard_output(trace_out, opts.force);
  }

  Dataset ds = sampled_or_full(cfg);
  std::vector<std::string> dropped;
  Split split = leave_one_out(ds, cfg.dataset.strict, &dropped);
  for (const auto& user : dropped) {
    std::cerr << "warning: user dropped (fewer than 2 interactions): " << user << "\n";
  }
  PopularityTable pop = popularity_table(ds);

  Gateway gateway = make_gateway(cfg);
  TemplateCatalog catalog = TemplateCatalog::load_dir(cfg.templates);
  AgentContext ctx{gateway, catalog};

  TrainConfig train_cfg = cfg.train;
  train_cfg.checkpoint_dir = cfg.run_dir / "checkpoint";

  MemoryStore store;
  std::vector<StepRecord> prior;
  if (opts.resume && std::filesystem::exists(train_cfg.checkpoint_dir / "offset")) {
    Checkpoint cp = read_checkpoint(train_cfg.checkpoint_dir);
    store = std::move(cp.store);
    prior = std::move(cp.trace);
    train_cfg.start_offset = cp.next_offset;
  } else {
    store = init_store(ds, cfg.dataset.user_seed_text);
  }

  std::vector<StepRecord> trace = optimize(split, ds, store, pop, ctx, train_cfg);
  prior.insert(prior.end(), trace.begin(), trace.end());

  write_file(memory_out, store.snapshot());
  write_file(trace_out, trace_to_jsonl(prior));

  // Alignment summary over the completed trace.
  if (!prior.empty()) {
    auto curve = alignment_curve(prior, 3);
    std::string summary;
    char buf[128];
    for (const auto& point : curve) {
      std::snprintf(buf, sizeof buf, "step=%zu first_attempt=%.4f final=%.4f n=%zu\n",
                    point.step, point.first_attempt_acc, point.final_acc, point.n_users);
      summary += buf;
    }
    write_file(cfg.run_dir / "alignment.txt", summary);
  }
}

void run_eval_cmd(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  const auto metrics_out = cfg.run_dir / "metrics.json";
  const auto csv_out = cfg.run_dir / "eval_rows.csv";
  guard_output(metrics_out, opts.force);
  guard_output(csv_out, opts.force);

  Dataset ds = sampled_or_full(cfg);
  Split split = leave_one_out(ds);

  Gateway gateway = make_gateway(cfg);
  TemplateCatalog catalog = TemplateCatalog::load_dir(cfg.templates);
  AgentContext ctx{gateway, catalog};

  MemoryStore store;
  const MemoryStore* store_ptr = nullptr;
  if (needs_store(cfg)) {
    store = load_store(cfg);
    store_ptr = &store;
  }
  MFModel bpr_model;
  const MFModel* bpr_ptr = nullptr;
  if (needs_bpr(cfg)) {
    bpr_model = bpr_train(split.train, cfg.bpr);
    write_file(cfg.run_dir / "bpr_model.json", mf_snapshot(bpr_model));
    bpr_ptr = &bpr_model;
  }
  PopularityTable train_pop = train_popularity(split);

  auto strategies = build_strategies(cfg, ds, split, ctx, store_ptr, bpr_ptr, train_pop);
  EvalSpec spec;
  spec.ks = cfg.eval.ks;
  spec.reps = cfg.eval.reps;
  spec.slate_seed = cfg.eval.slate_seed;
  spec.slate_size = cfg.eval.slate_size;
  spec.dataset_tag = cfg.run_dir.filename().string();

  std::vector<EvalRow> rows;
  MetricsReport report = run_eval(strategies, split, ds, spec, &rows);
  write_file(metrics_out, metrics_to_json(report));
  write_file(csv_out, rows_to_csv(rows, spec.ks));
}

void run_probe_bias(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  const auto out = cfg.run_dir / "bias.json";
  guard_output(out, opts.force);

  Dataset ds = sampled_or_full(cfg);
  Split split = leave_one_out(ds);
  PopularityTable pop = popularity_table(ds);

  Gateway gateway = make_gateway(cfg);
  TemplateCatalog catalog = TemplateCatalog::load_dir(cfg.templates);
  AgentContext ctx{gateway, catalog};
  MemoryStore store = load_store(cfg);

  std::map<std::string, PairwiseSelector> selectors;
  selectors["agentcf"] = [&](const std::string& user, const PairCandidate& first,
                             const PairCandidate& second) {
    PairCandidate f{first.item_id, first.title, store.item(first.item_id).text};
    PairCandidate s{second.item_id, second.title, store.item(second.item_id).text};
    // Position of the positive is irrelevant to the probe; the chosen id is.
    return select_pairwise(ctx, store.user(user).short_term, f, s, 2).chosen_item;
  };
  selectors["untrained"] = [&](const std::string& user, const PairCandidate& first,
                               const PairCandidate& second) {
    PairCandidate f{first.item_id, first.title,
                    render_identity(ds.items.at(first.item_id), ds.domain_noun)};
    PairCandidate s{second.item_id, second.title,
                    render_identity(ds.items.at(second.item_id), ds.domain_noun)};
    return select_pairwise(ctx, cfg.dataset.user_seed_text, f, s, 2).chosen_item;
  };

  BiasProbeReport report = bias_probe(split, ds, pop, selectors, cfg.probes.bias_seed);
  write_file(out, bias_report_to_json(report));
}

void run_probe_propagation(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  const auto out = cfg.run_dir / "propagation.json";
  guard_output(out, opts.force);
  if (cfg.probes.propagation_seed_user.empty() || cfg.probes.propagation_keywords.empty()) {
    throw ConfigError("probes.propagation_seed_user and propagation_keywords are required");
  }

  Dataset ds = sampled_or_full(cfg);
  Split split = leave_one_out(ds);
  PopularityTable pop = popularity_table(ds);

  Gateway gateway = make_gateway(cfg);
  TemplateCatalog catalog = TemplateCatalog::load_dir(cfg.templates);
  AgentContext ctx{gateway, catalog};

  MemoryStore fresh = init_store(ds, cfg.dataset.user_seed_text);
  PropagationProbeConfig probe;
  probe.seed_user = cfg.probes.propagation_seed_user;
  probe.special_text = cfg.probes.propagation_special_text;
  probe.keywords = cfg.probes.propagation_keywords;
  probe.question = cfg.probes.propagation_question;

  TrainConfig train_cfg = cfg.train;
  train_cfg.checkpoint_dir.clear();
  PropagationReport report =
      propagation_probe(probe, split, ds, fresh, pop, ctx, train_cfg);
  write_file(out, propagation_report_to_json(report));
}

void run_warmup_cold(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  const auto out = cfg.run_dir / "cold_start.json";
  guard_output(out, opts.force);

  Dataset ds = sampled_or_full(cfg);
  Split split = leave_one_out(ds);

  Gateway gateway = make_gateway(cfg);
  TemplateCatalog catalog = TemplateCatalog::load_dir(cfg.templates);
  AgentContext ctx{gateway, catalog};
  MemoryStore store = load_store(cfg);

  // Popular pool: most-interacted train items, identity + learned memory.
  PopularityTable train_pop = train_popularity(split);
  std::vector<std::pair<std::int64_t, std::string>> by_count;
  for (const auto& [item, count] : train_pop.counts) by_count.emplace_back(count, item);
  std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<ItemIdentity> popular;
  for (const auto& [_, item] : by_count) {
    if (popular.size() >= cfg.probes.cold_popular_pool) break;
    popular.push_back(ds.items.at(item));
  }

  const WarmupSimilarity mode = cfg.probes.cold_mode == "distinct"
                                    ? WarmupSimilarity::Distinct
                                    : WarmupSimilarity::Similar;

  // Cold cases: test targets, treated as if they had no learned memory.
  std::vector<ColdStartCase> cases;
  std::map<std::string, std::string> warmed;
  for (const auto& [user, target] : split.test_target) {
    if (cases.size() >= cfg.probes.cold_max_cases) break;
    if (warmed.contains(target)) continue;
    auto neighbor_ids = select_warmup_neighbors(ds.items.at(target), popular, mode,
                                                cfg.probes.cold_neighbors, ds.domain_noun);
    std::vector<std::string> neighbor_memories;
    for (const auto& id : neighbor_ids) neighbor_memories.push_back(store.item(id).text);
    warmed[target] = warmup_cold_item(ctx, ds.items.at(target), neighbor_memories,
                                      ds.domain_noun);
    cases.push_back({user, target});
  }

  EvalSpec spec;
  spec.reps = cfg.eval.reps;
  spec.slate_seed = cfg.eval.slate_seed;
  spec.slate_size = cfg.eval.slate_size;
  ColdStartReport report = cold_start_eval(cases, warmed, store, split, ds, ctx, spec);
  write_file(out, cold_start_report_to_json(report));
}

void run_reviews(const RunConfig& cfg, const PipelineOptions& opts) {
  freeze_config(cfg, opts.force);
  const auto log_out = cfg.run_dir / "reviews.jsonl";
  const auto report_out = cfg.run_dir / "reviews_report.json";
  guard_output(log_out, opts.force);
  guard_output(report_out, opts.force);
  if (opts.force && std::filesystem::exists(log_out)) std::filesystem::remove(log_out);

  Dataset ds = sampled_or_full(cfg);
  Split split = leave_one_out(ds);

  Gateway gateway = make_gateway(cfg);
  TemplateCatalog catalog = TemplateCatalog::load_dir(cfg.templates);
  AgentContext ctx{gateway, catalog};
  MemoryStore store = load_store(cfg);

  // Authors: users whose train history contains the test item.
  std::map<std::string, std::vector<std::string>> item_authors;
  for (const auto& [user, items] : split.train) {
    for (const auto& item : items) item_authors[item].push_back(user);
  }

  ReviewLog log(log_out);
  std::size_t n_cases = 0, n_valid = 0, before_yes = 0, after_yes = 0, changed = 0;
  for (const auto& [user, target] : split.test_target) {
    std::vector<std::string> reviews;
    auto authors_it = item_authors.find(target);
    if (authors_it != item_authors.end()) {
      std::size_t taken = 0;
      for (const auto& author : authors_it->second) {
        if (author == user || taken >= cfg.probes.review_max_authors) continue;
        std::string text = write_review(ctx, store.user(author).short_term,
                                        store.item(target).text, ReviewPolarity::Positive);
        log.append({author, target, ReviewPolarity::Positive, text});
        reviews.push_back(std::move(text));
        ++taken;
      }
    }
    ReviewDecision decision =
        decide_with_reviews(ctx, store.user(user).short_term, ds.items.at(target).title,
                            store.item(target).text, reviews);
    ++n_cases;
    if (!decision.valid) continue;
    ++n_valid;
    if (decision.before.choice) ++before_yes;
    if (decision.after.choice) ++after_yes;
    if (decision.attitude_changed) ++changed;
  }

  nlohmann::json doc;
  doc["schema"] = 1;
  doc["n_cases"] = n_cases;
  doc["n_valid"] = n_valid;
  doc["before_yes"] = before_yes;
  doc["after_yes"] = after_yes;
  doc["attitude_changed"] = changed;
  write_file(report_out, doc.dump(2) + "\n");
}

}  // namespace agentcf
