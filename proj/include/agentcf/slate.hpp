#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace agentcf {

struct CandidateSlate {
  std::string user_id;
  std::vector<std::string> candidates;  // presentation order
  std::string target;
  std::size_t n = 10;
};

enum class Strategy { B, B_R, B_H, LLMRank, Pop, BM25, BPR, Random };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

struct RankingResult {
  CandidateSlate slate;
  std::vector<std::string> permutation;  // item ids, best first
  Strategy strategy = Strategy::B;
  std::size_t repetition = 0;
  std::string prompt_digest;  // audit trail for LLM-backed strategies
  bool fallback = false;      // presentation order after a double parse failure

  /// 1-based rank of the slate target inside the permutation.
  std::size_t target_rank() const;
};

}  // namespace agentcf
