#pragma once

#include <map>
#include <string>
#include <vector>

#include "agentcf/agents.hpp"
#include "agentcf/corpus.hpp"
#include "agentcf/memory.hpp"
#include "agentcf/slate.hpp"

namespace agentcf {

struct RankerConfig {
  std::size_t retrieval_k = 3;   // long-term entries pulled into B+R prompts
  std::size_t history_cap = 20;  // hard cap on history entries in B+H prompts
};

/// Candidate lines as presented in ranking prompts: `N. "Title": text`.
std::string candidate_block(const CandidateSlate& slate,
                            const std::map<std::string, ItemIdentity>& items,
                            const std::map<std::string, std::string>& texts);

/// Basic strategy: short-term memory plus candidate memories, slate order.
RankingResult rank_basic(AgentContext& ctx, const MemoryStore& store,
                         const std::map<std::string, ItemIdentity>& items,
                         const CandidateSlate& slate, std::size_t repetition = 0);

/// Retrieval strategy: candidate memories are the query against the user's
/// long-term pool; the retrieved block precedes the short-term memory.
RankingResult rank_with_retrieval(AgentContext& ctx, const MemoryStore& store,
                                  const std::map<std::string, ItemIdentity>& items,
                                  const CandidateSlate& slate, std::size_t retrieval_k = 3,
                                  std::size_t repetition = 0);

/// History strategy: short-term memory plus chronological history memories.
RankingResult rank_with_history(AgentContext& ctx, const MemoryStore& store,
                                const std::map<std::string, ItemIdentity>& items,
                                const CandidateSlate& slate,
                                const std::vector<std::string>& history,
                                std::size_t history_cap = 20, std::size_t repetition = 0);

/// Zero-shot sequential baseline over identity texts only; reads no learned
/// memories at all.
RankingResult llmrank_zero_shot(AgentContext& ctx,
                                const std::map<std::string, ItemIdentity>& items,
                                const CandidateSlate& slate,
                                const std::vector<std::string>& history,
                                std::size_t history_cap = 20, std::size_t repetition = 0,
                                std::string_view noun = "CD");

}  // namespace agentcf
