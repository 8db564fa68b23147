#include "agentcf/slate.hpp"

#include <algorithm>

#include "agentcf/errors.hpp"

namespace agentcf {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::B: return "agentcf-b";
    case Strategy::B_R: return "agentcf-b+r";
    case Strategy::B_H: return "agentcf-b+h";
    case Strategy::LLMRank: return "llmrank";
    case Strategy::Pop: return "pop";
    case Strategy::BM25: return "bm25";
    case Strategy::BPR: return "bpr";
    case Strategy::Random: return "random";
  }
  return "agentcf-b";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "agentcf-b") return Strategy::B;
  if (s == "agentcf-b+r") return Strategy::B_R;
  if (s == "agentcf-b+h") return Strategy::B_H;
  if (s == "llmrank") return Strategy::LLMRank;
  if (s == "pop") return Strategy::Pop;
  if (s == "bm25") return Strategy::BM25;
  if (s == "bpr") return Strategy::BPR;
  if (s == "random") return Strategy::Random;
  throw ConfigError("unknown strategy: " + std::string(s));
}

std::size_t RankingResult::target_rank() const {
  auto it = std::find(permutation.begin(), permutation.end(), slate.target);
  if (it == permutation.end()) throw Error("permutation is missing the slate target");
  return static_cast<std::size_t>(it - permutation.begin()) + 1;
}

}  // namespace agentcf
