#include "agentcf/ranker.hpp"

#include <algorithm>
#include <functional>

#include "agentcf/errors.hpp"

namespace agentcf {

namespace {

constexpr const char* kRankingRetryNudge =
    "Your previous answer did not follow the required format. Please answer strictly as a "
    "numbered list, one candidate title per line:\nRanked CDs:\n1. [Title]\n2. [Title]\n...";

std::string entry_line(std::size_t position, const std::string& title,
                       const std::string& text) {
  return std::to_string(position) + ". \"" + title + "\": " + text;
}

std::vector<std::string> slate_titles(const CandidateSlate& slate,
                                      const std::map<std::string, ItemIdentity>& items) {
  std::vector<std::string> titles;
  titles.reserve(slate.candidates.size());
  for (const auto& id : slate.candidates) titles.push_back(items.at(id).title);
  return titles;
}

/// Issues the ranking request, parses the permutation (one re-ask on a
/// malformed answer), and falls back to presentation order.
RankingResult run_ranking(AgentContext& ctx, const CandidateSlate& slate,
                          const std::map<std::string, ItemIdentity>& items,
                          std::string prompt, Strategy strategy, std::size_t repetition) {
  RankingResult result;
  result.slate = slate;
  result.strategy = strategy;
  result.repetition = repetition;
  result.prompt_digest = sha256_hex(prompt);

  ChatRequest req = ChatRequest::make(TaskKind::Inference, std::move(prompt));
  ChatResponse resp = ctx.gateway.complete(req);

  const auto titles = slate_titles(slate, items);
  std::map<std::string, std::string> title_to_id;
  for (std::size_t i = 0; i < titles.size(); ++i) title_to_id[titles[i]] = slate.candidates[i];

  ParsedRanking parsed;
  bool ok = false;
  try {
    parsed = parse_ranking(resp.text, titles);
    ok = true;
  } catch (const UnparsableRanking&) {
    req.messages.push_back({Role::Assistant, resp.text.empty() ? "(empty)" : resp.text});
    req.messages.push_back({Role::User, kRankingRetryNudge});
    resp = ctx.gateway.complete(req);
    try {
      parsed = parse_ranking(resp.text, titles);
      ok = true;
    } catch (const UnparsableRanking&) {
      ok = false;
    }
  }

  if (ok) {
    for (const auto& title : parsed.ordered_titles) {
      result.permutation.push_back(title_to_id.at(title));
    }
  } else {
    // Deterministic fallback keeps replay runs reproducible.
    result.permutation = slate.candidates;
    result.fallback = true;
  }
  return result;
}

std::vector<std::string> capped_history(const std::vector<std::string>& history,
                                        std::size_t cap) {
  if (cap == 0 || history.size() <= cap) return history;
  return {history.end() - static_cast<long>(cap), history.end()};
}

}  // namespace

std::string candidate_block(const CandidateSlate& slate,
                            const std::map<std::string, ItemIdentity>& items,
                            const std::map<std::string, std::string>& texts) {
  std::string block;
  for (std::size_t i = 0; i < slate.candidates.size(); ++i) {
    const auto& id = slate.candidates[i];
    if (i) block.push_back('\n');
    block += entry_line(i + 1, items.at(id).title, texts.at(id));
  }
  return block;
}

namespace {

std::map<std::string, std::string> memory_texts(const MemoryStore& store,
                                                const CandidateSlate& slate) {
  std::map<std::string, std::string> texts;
  for (const auto& id : slate.candidates) texts[id] = store.item(id).text;
  return texts;
}

std::string history_block_from(const std::vector<std::string>& ids,
                               const std::map<std::string, ItemIdentity>& items,
                               const std::function<std::string(const std::string&)>& text_of) {
  std::string block;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) block.push_back('\n');
    block += entry_line(i + 1, items.at(ids[i]).title, text_of(ids[i]));
  }
  return block;
}

}  // namespace

RankingResult rank_basic(AgentContext& ctx, const MemoryStore& store,
                         const std::map<std::string, ItemIdentity>& items,
                         const CandidateSlate& slate, std::size_t repetition) {
  const std::string prompt =
      render(ctx.templates.get("rank_basic"),
             {{"user_memory", store.user(slate.user_id).short_term},
              {"candidate_block", candidate_block(slate, items, memory_texts(store, slate))},
              {"n", std::to_string(slate.candidates.size())}});
  return run_ranking(ctx, slate, items, prompt, Strategy::B, repetition);
}

RankingResult rank_with_retrieval(AgentContext& ctx, const MemoryStore& store,
                                  const std::map<std::string, ItemIdentity>& items,
                                  const CandidateSlate& slate, std::size_t retrieval_k,
                                  std::size_t repetition) {
  std::vector<std::string> queries;
  queries.reserve(slate.candidates.size());
  for (const auto& id : slate.candidates) queries.push_back(store.item(id).text);
  const auto retrieved =
      retrieval_k == 0
          ? RetrievedPreference{}
          : store.retrieve_long_term(slate.user_id, queries, retrieval_k);

  const std::string prompt =
      render(ctx.templates.get("rank_retrieval"),
             {{"retrieved", retrieved.rendered},
              {"user_memory", store.user(slate.user_id).short_term},
              {"candidate_block", candidate_block(slate, items, memory_texts(store, slate))},
              {"n", std::to_string(slate.candidates.size())}});
  return run_ranking(ctx, slate, items, prompt, Strategy::B_R, repetition);
}

RankingResult rank_with_history(AgentContext& ctx, const MemoryStore& store,
                                const std::map<std::string, ItemIdentity>& items,
                                const CandidateSlate& slate,
                                const std::vector<std::string>& history,
                                std::size_t history_cap, std::size_t repetition) {
  const auto capped = capped_history(history, history_cap);
  const std::string prompt = render(
      ctx.templates.get("rank_history"),
      {{"user_memory", store.user(slate.user_id).short_term},
       {"history_block", history_block_from(capped, items,
                                            [&](const std::string& id) {
                                              return store.item(id).text;
                                            })},
       {"candidate_block", candidate_block(slate, items, memory_texts(store, slate))},
       {"n", std::to_string(slate.candidates.size())}});
  return run_ranking(ctx, slate, items, prompt, Strategy::B_H, repetition);
}

RankingResult llmrank_zero_shot(AgentContext& ctx,
                                const std::map<std::string, ItemIdentity>& items,
                                const CandidateSlate& slate,
                                const std::vector<std::string>& history,
                                std::size_t history_cap, std::size_t repetition,
                                std::string_view noun) {
  const auto capped = capped_history(history, history_cap);
  auto identity_of = [&](const std::string& id) { return render_identity(items.at(id), noun); };
  std::map<std::string, std::string> texts;
  for (const auto& id : slate.candidates) texts[id] = identity_of(id);

  const std::string prompt =
      render(ctx.templates.get("rank_llmrank"),
             {{"history_block", history_block_from(capped, items, identity_of)},
              {"candidate_block", candidate_block(slate, items, texts)},
              {"n", std::to_string(slate.candidates.size())}});
  return run_ranking(ctx, slate, items, prompt, Strategy::LLMRank, repetition);
}

}  // namespace agentcf
