#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentcf/agents.hpp"
#include "agentcf/corpus.hpp"
#include "agentcf/memory.hpp"
#include "agentcf/optimizer.hpp"
#include "agentcf/slate.hpp"

namespace agentcf {

/// NDCG@k for a single-relevant-item slate: 1/log2(r+1) when the target sits
/// at 1-based rank r <= k, else 0.
double ndcg_at_k(const RankingResult& result, std::size_t k);

/// Target plus (n-1) uniform negatives drawn outside the user's history,
/// shuffled presentation order. Deterministic per (seed, repetition, user).
CandidateSlate build_slate(const std::string& user_id, const Split& split, const Dataset& ds,
                           std::uint64_t seed, std::size_t repetition, std::size_t n = 10);

struct StrategyRanker {
  std::string name;
  std::function<RankingResult(const CandidateSlate&, std::size_t rep)> rank;
};

struct EvalSpec {
  std::vector<std::size_t> ks{1, 5, 10};
  std::size_t reps = 3;
  std::uint64_t slate_seed = 0;
  std::size_t slate_size = 10;
  std::string dataset_tag;
};

struct EvalRow {
  std::string user_id;
  std::string strategy;
  std::size_t rep = 0;
  std::size_t target_rank = 0;
  std::map<std::size_t, double> ndcg;
};

struct MetricsReport {
  // strategy -> k -> mean NDCG over users and repetitions
  std::map<std::string, std::map<std::size_t, double>> ndcg;
  std::size_t n_users = 0;
  std::size_t n_reps = 0;
  std::string dataset_tag;
};

/// Runs every strategy over every user for `reps` repetitions with fresh
/// slates per rep. Users where any strategy fails are excluded from all
/// strategies so the averages stay comparable.
MetricsReport run_eval(const std::vector<StrategyRanker>& strategies, const Split& split,
                       const Dataset& ds, const EvalSpec& spec,
                       std::vector<EvalRow>* rows = nullptr);

std::string metrics_to_json(const MetricsReport& report);
std::string rows_to_csv(const std::vector<EvalRow>& rows, const std::vector<std::size_t>& ks);

/// One pairwise bias trial: popularity-sampled candidate displayed first.
struct BiasRates {
  double popular_pick_rate = 0.0;
  double first_position_pick_rate = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_invalid = 0;
};

struct BiasProbeReport {
  std::map<std::string, BiasRates> per_strategy;
};

/// Chooses between two displayed candidates; returns the chosen item id.
using PairwiseSelector =
    std::function<std::string(const std::string& user_id, const PairCandidate& first,
                              const PairCandidate& second)>;

/// Presents (popular negative, test target) pairs — negative first — to every
/// named selector and reports pick rates.
BiasProbeReport bias_probe(const Split& split, const Dataset& ds, const PopularityTable& pop,
                           const std::map<std::string, PairwiseSelector>& selectors,
                           std::uint64_t seed);

struct HopStat {
  std::size_t n_users = 0;
  std::size_t n_matched = 0;   // keyword detector
  std::size_t n_affirmed = 0;  // optional LLM self-report
  double fraction = 0.0;
};

struct PropagationReport {
  // hop distance (0 = seed) -> stats; -1 collects users unreachable from the seed
  std::map<int, HopStat> per_hop;
};

struct PropagationProbeConfig {
  std::string seed_user;
  std::string special_text;
  std::vector<std::string> keywords;
  std::string question;  // empty disables the LLM self-report pass
};

/// Overwrites the seed user's short-term memory in a fresh store, runs the
/// optimization loop, and reports keyword hits per user-user hop distance in
/// the bipartite train graph.
PropagationReport propagation_probe(const PropagationProbeConfig& probe, const Split& split,
                                    const Dataset& ds, MemoryStore& fresh_store,
                                    const PopularityTable& pop, AgentContext& ctx,
                                    const TrainConfig& train_cfg);

/// User-user hop distance from the seed through shared train items; -1 when
/// unreachable.
std::map<std::string, int> user_hop_distances(const Split& split, const std::string& seed_user);

struct ColdStartCase {
  std::string user_id;  // the adopter whose slate contains the cold item
  std::string item_id;  // the cold item (slate target)
};

struct ColdStartOutcome {
  ColdStartCase cold_case;
  double ndcg_identity = 0.0;
  double ndcg_warmed = 0.0;
  double delta = 0.0;
};

struct ColdStartReport {
  std::vector<ColdStartOutcome> outcomes;
  double mean_delta = 0.0;
};

/// Ranks each cold case twice per repetition (identity-only text vs warmed
/// text, everything else identical) and reports paired NDCG@10 deltas.
ColdStartReport cold_start_eval(
    const std::vector<ColdStartCase>& cases,
    const std::map<std::string, std::string>& warmed_texts, const MemoryStore& store,
    const Split& split, const Dataset& ds, AgentContext& ctx, const EvalSpec& spec);

std::string bias_report_to_json(const BiasProbeReport& report);
std::string propagation_report_to_json(const PropagationReport& report);
std::string cold_start_report_to_json(const ColdStartReport& report);

}  // namespace agentcf
