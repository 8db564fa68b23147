#include "agentcf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

#include <nlohmann/json.hpp>

#include "agentcf/errors.hpp"
#include "agentcf/ranker.hpp"
#include "agentcf/text.hpp"

namespace agentcf {

namespace {

using json = nlohmann::json;

}  // namespace

double ndcg_at_k(const RankingResult& result, std::size_t k) {
  if (k == 0 || k > result.permutation.size()) {
    throw DataError("ndcg_at_k: k out of range");
  }
  const std::size_t rank = result.target_rank();
  if (rank > k) return 0.0;
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

CandidateSlate build_slate(const std::string& user_id, const Split& split, const Dataset& ds,
                           std::uint64_t seed, std::size_t repetition, std::size_t n) {
  auto target_it = split.test_target.find(user_id);
  if (target_it == split.test_target.end()) throw DataError("no test target for " + user_id);
  const std::string& target = target_it->second;

  const std::set<std::string> history = ds.user_item_set(user_id);
  std::vector<std::string> eligible;
  for (const auto& [item, _] : ds.items) {
    if (!history.contains(item) && item != target) eligible.push_back(item);
  }
  if (eligible.size() + 1 < n) throw DataError("not enough items for a slate of " +
                                               std::to_string(n));

  Rng rng(mix_seed(seed, repetition, fnv1a64(user_id)));
  CandidateSlate slate;
  slate.user_id = user_id;
  slate.target = target;
  slate.n = n;
  slate.candidates.push_back(target);
  // Partial Fisher-Yates draw of n-1 distinct negatives.
  for (std::size_t i = 0; i < n - 1; ++i) {
    std::size_t j = i + uniform_index(rng, eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
    slate.candidates.push_back(eligible[i]);
  }
  shuffle_in_place(slate.candidates, rng);
  return slate;
}

MetricsReport run_eval(const std::vector<StrategyRanker>& strategies, const Split& split,
                       const Dataset& ds, const EvalSpec& spec, std::vector<EvalRow>* rows) {
  if (strategies.empty()) throw ConfigError("run_eval: no strategies configured");
  if (spec.reps == 0) throw ConfigError("run_eval: reps must be positive");

  struct Cell {
    std::size_t target_rank;
    std::map<std::size_t, double> ndcg;
  };
  // user -> strategy -> rep -> cell; filled completely, then failed users are
  // dropped across all strategies at once.
  std::map<std::string, std::map<std::string, std::vector<Cell>>> cells;
  std::set<std::string> failed_users;

  for (std::size_t rep = 0; rep < spec.reps; ++rep) {
    for (const auto& [user, _] : split.test_target) {
      if (failed_users.contains(user)) continue;
      CandidateSlate slate = build_slate(user, split, ds, spec.slate_seed, rep, spec.slate_size);
      for (const auto& strategy : strategies) {
        try {
          RankingResult result = strategy.rank(slate, rep);
          Cell cell;
          cell.target_rank = result.target_rank();
          for (std::size_t k : spec.ks) cell.ndcg[k] = ndcg_at_k(result, k);
          cells[user][strategy.name].push_back(std::move(cell));
        } catch (const Error&) {
          failed_users.insert(user);
          break;
        }
      }
    }
  }

  MetricsReport report;
  report.n_reps = spec.reps;
  report.dataset_tag = spec.dataset_tag;

  std::size_t n_users = 0;
  for (const auto& [user, per_strategy] : cells) {
    if (failed_users.contains(user)) continue;
    ++n_users;
    for (const auto& strategy : strategies) {
      auto it = per_strategy.find(strategy.name);
      if (it == per_strategy.end()) continue;
      for (std::size_t rep = 0; rep < it->second.size(); ++rep) {
        const Cell& cell = it->second[rep];
        for (std::size_t k : spec.ks) report.ndcg[strategy.name][k] += cell.ndcg.at(k);
        if (rows) {
          EvalRow row;
          row.user_id = user;
          row.strategy = strategy.name;
          row.rep = rep;
          row.target_rank = cell.target_rank;
          row.ndcg = cell.ndcg;
          rows->push_back(std::move(row));
        }
      }
    }
  }
  report.n_users = n_users;
  const double denom = static_cast<double>(n_users) * static_cast<double>(spec.reps);
  if (denom > 0) {
    for (auto& [_, per_k] : report.ndcg) {
      for (auto& [__, value] : per_k) value /= denom;
    }
  }
  return report;
}

std::string metrics_to_json(const MetricsReport& report) {
  json doc;
  doc["schema"] = 1;
  doc["dataset"] = report.dataset_tag;
  doc["n_users"] = report.n_users;
  doc["n_reps"] = report.n_reps;
  json strategies = json::object();
  for (const auto& [name, per_k] : report.ndcg) {
    json entry = json::object();
    for (const auto& [k, value] : per_k) entry["ndcg@" + std::to_string(k)] = value;
    strategies[name] = std::move(entry);
  }
  doc["strategies"] = std::move(strategies);
  return doc.dump(2) + "\n";
}

std::string rows_to_csv(const std::vector<EvalRow>& rows, const std::vector<std::size_t>& ks) {
  std::string out = "user,strategy,rep,target_rank";
  for (std::size_t k : ks) out += ",ndcg@" + std::to_string(k);
  out.push_back('\n');
  char buf[32];
  for (const auto& row : rows) {
    out += row.user_id + "," + row.strategy + "," + std::to_string(row.rep) + "," +
           std::to_string(row.target_rank);
    for (std::size_t k : ks) {
      std::snprintf(buf, sizeof buf, "%.6f", row.ndcg.at(k));
      out += ",";
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

BiasProbeReport bias_probe(const Split& split, const Dataset& ds, const PopularityTable& pop,
                           const std::map<std::string, PairwiseSelector>& selectors,
                           std::uint64_t seed) {
  if (selectors.empty()) throw ConfigError("bias_probe: no selectors configured");
  if (split.test_target.empty()) throw DataError("bias_probe: empty trial set");

  BiasProbeReport report;
  for (const auto& [name, _] : selectors) report.per_strategy[name] = BiasRates{};

  for (const auto& [user, target] : split.test_target) {
    Rng rng(mix_seed(seed, fnv1a64(user), 0xb1a5));
    std::set<std::string> exclude = ds.user_item_set(user);
    exclude.insert(target);
    std::string negative;
    try {
      negative = sample_negative(pop, exclude, rng);
    } catch (const DataError&) {
      continue;  // degenerate universe for this user
    }

    for (const auto& [name, selector] : selectors) {
      BiasRates& rates = report.per_strategy[name];
      PairCandidate first{negative, ds.items.at(negative).title, ""};
      PairCandidate second{target, ds.items.at(target).title, ""};
      try {
        const std::string chosen = selector(user, first, second);
        ++rates.n_trials;
        if (chosen == negative) {
          rates.popular_pick_rate += 1.0;
          rates.first_position_pick_rate += 1.0;
        }
      } catch (const Error&) {
        ++rates.n_invalid;
      }
    }
  }
  for (auto& [_, rates] : report.per_strategy) {
    if (rates.n_trials > 0) {
      rates.popular_pick_rate /= static_cast<double>(rates.n_trials);
      rates.first_position_pick_rate /= static_cast<double>(rates.n_trials);
    }
  }
  return report;
}

std::map<std::string, int> user_hop_distances(const Split& split, const std::string& seed_user) {
  // Bipartite BFS over train interactions; user-user hop = path length / 2.
  std::map<std::string, std::set<std::string>> item_users;
  for (const auto& [user, items] : split.train) {
    for (const auto& item : items) item_users[item].insert(user);
  }
  std::map<std::string, int> dist;
  for (const auto& [user, _] : split.train) dist[user] = -1;
  if (!dist.contains(seed_user)) throw DataError("seed user not in split: " + seed_user);

  dist[seed_user] = 0;
  std::deque<std::string> frontier{seed_user};
  while (!frontier.empty()) {
    const std::string user = frontier.front();
    frontier.pop_front();
    for (const auto& item : split.train.at(user)) {
      for (const auto& other : item_users[item]) {
        if (dist[other] == -1) {
          dist[other] = dist[user] + 1;
          frontier.push_back(other);
        }
      }
    }
  }
  return dist;
}

PropagationReport propagation_probe(const PropagationProbeConfig& probe, const Split& split,
                                    const Dataset& ds, MemoryStore& fresh_store,
                                    const PopularityTable& pop, AgentContext& ctx,
                                    const TrainConfig& train_cfg) {
  if (probe.keywords.empty()) throw ConfigError("propagation_probe: no keywords");
  fresh_store.set_user_short_term(probe.seed_user, probe.special_text);

  optimize(split, ds, fresh_store, pop, ctx, train_cfg);

  auto matches_keywords = [&](const UserMemory& memory) {
    auto hit = [&](const std::string& text) {
      for (const auto& keyword : probe.keywords) {
        if (find_ci(text, keyword) != std::string::npos) return true;
      }
      return false;
    };
    if (hit(memory.short_term)) return true;
    for (const auto& entry : memory.long_term) {
      if (hit(entry)) return true;
    }
    return false;
  };

  const auto hops = user_hop_distances(split, probe.seed_user);
  PropagationReport report;
  for (const auto& [user, hop] : hops) {
    HopStat& stat = report.per_hop[hop];
    ++stat.n_users;
    if (matches_keywords(fresh_store.user(user))) ++stat.n_matched;
    if (!probe.question.empty()) {
      try {
        if (query_preference(ctx, fresh_store.user(user).short_term, probe.question).choice) {
          ++stat.n_affirmed;
        }
      } catch (const ParseError&) {
        // self-report is advisory; keyword matching remains the signal
      }
    }
  }
  for (auto& [_, stat] : report.per_hop) {
    if (stat.n_users > 0) {
      stat.fraction = static_cast<double>(stat.n_matched) / static_cast<double>(stat.n_users);
    }
  }
  return report;
}

ColdStartReport cold_start_eval(
    const std::vector<ColdStartCase>& cases,
    const std::map<std::string, std::string>& warmed_texts, const MemoryStore& store,
    const Split& split, const Dataset& ds, AgentContext& ctx, const EvalSpec& spec) {
  ColdStartReport report;
  for (const auto& cold_case : cases) {
    auto warmed_it = warmed_texts.find(cold_case.item_id);
    if (warmed_it == warmed_texts.end()) {
      throw DataError("no warmup result for item: " + cold_case.item_id);
    }
    const std::string identity_text =
        render_identity(ds.items.at(cold_case.item_id), ds.domain_noun);

    double sum_identity = 0.0, sum_warmed = 0.0;
    for (std::size_t rep = 0; rep < spec.reps; ++rep) {
      CandidateSlate slate = build_slate(cold_case.user_id, split, ds, spec.slate_seed, rep,
                                         spec.slate_size);
      if (slate.target != cold_case.item_id) {
        throw DataError("cold item is not the user's test target: " + cold_case.item_id);
      }
      // Two runs differing only in the cold item's memory text.
      MemoryStore variant = store;
      variant.set_item_text(cold_case.item_id, identity_text);
      sum_identity += ndcg_at_k(rank_basic(ctx, variant, ds.items, slate, rep), 10);
      variant.set_item_text(cold_case.item_id, warmed_it->second);
      sum_warmed += ndcg_at_k(rank_basic(ctx, variant, ds.items, slate, rep), 10);
    }
    ColdStartOutcome outcome;
    outcome.cold_case = cold_case;
    outcome.ndcg_identity = sum_identity / static_cast<double>(spec.reps);
    outcome.ndcg_warmed = sum_warmed / static_cast<double>(spec.reps);
    outcome.delta = outcome.ndcg_warmed - outcome.ndcg_identity;
    report.mean_delta += outcome.delta;
    report.outcomes.push_back(std::move(outcome));
  }
  if (!report.outcomes.empty()) {
    report.mean_delta /= static_cast<double>(report.outcomes.size());
  }
  return report;
}

std::string bias_report_to_json(const BiasProbeReport& report) {
  json doc;
  doc["schema"] = 1;
  json strategies = json::object();
  for (const auto& [name, rates] : report.per_strategy) {
    strategies[name] = {{"popular_pick_rate", rates.popular_pick_rate},
                        {"first_position_pick_rate", rates.first_position_pick_rate},
                        {"n_trials", rates.n_trials},
                        {"n_invalid", rates.n_invalid}};
  }
  doc["strategies"] = std::move(strategies);
  return doc.dump(2) + "\n";
}

std::string propagation_report_to_json(const PropagationReport& report) {
  json doc;
  doc["schema"] = 1;
  json hops = json::object();
  for (const auto& [hop, stat] : report.per_hop) {
    hops[std::to_string(hop)] = {{"n_users", stat.n_users},
                                 {"n_matched", stat.n_matched},
                                 {"n_affirmed", stat.n_affirmed},
                                 {"fraction", stat.fraction}};
  }
  doc["hops"] = std::move(hops);
  return doc.dump(2) + "\n";
}

std::string cold_start_report_to_json(const ColdStartReport& report) {
  json doc;
  doc["schema"] = 1;
  doc["mean_delta"] = report.mean_delta;
  json outcomes = json::array();
  for (const auto& outcome : report.outcomes) {
    outcomes.push_back({{"user", outcome.cold_case.user_id},
                        {"item", outcome.cold_case.item_id},
                        {"ndcg_identity", outcome.ndcg_identity},
                        {"ndcg_warmed", outcome.ndcg_warmed},
                        {"delta", outcome.delta}});
  }
  doc["outcomes"] = std::move(outcomes);
  return doc.dump(2) + "\n";
}

}  // namespace agentcf
