#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agentcf/corpus.hpp"
#include "agentcf/gateway.hpp"
#include "agentcf/memory.hpp"
#include "agentcf/prompts.hpp"

namespace agentcf {

/// Everything an agent behavior needs to talk to the model.
struct AgentContext {
  Gateway& gateway;
  const TemplateCatalog& templates;
};

/// One side of a contrastive pair as displayed to the user agent.
struct PairCandidate {
  std::string item_id;
  std::string title;
  std::string memory;
};

struct SelectionOutcome {
  std::string chosen_item;
  std::string chosen_title;
  std::string explanation;
  bool correct = false;
};

/// Presents two candidates in exactly the given display order and parses the
/// agent's choice. `positive_position` is 1 or 2. Re-asks once on a malformed
/// answer, then propagates UnparsableChoice.
SelectionOutcome select_pairwise(AgentContext& ctx, const std::string& user_short,
                                 const PairCandidate& first, const PairCandidate& second,
                                 int positive_position);

struct ReflectionResult {
  std::string new_user_short;          // old text when the user side failed to parse
  std::string new_positive_item_text;  // old text when the item side failed to parse
  bool user_parsed = true;
  bool item_parsed = true;
};

/// Failure path: user reflection plus item reflection. Only the positive
/// item's description is ever returned; the negative item agent is never
/// modified.
ReflectionResult reflect_on_failure(AgentContext& ctx, const std::string& user_short,
                                    const PairCandidate& negative,
                                    const PairCandidate& positive,
                                    const SelectionOutcome& outcome);

struct ConsolidationResult {
  std::string new_user_short;
  bool parsed = true;
};

/// Success path: the user agent confirms its choice and prunes stale content.
/// Item memories are untouched on this path.
ConsolidationResult consolidate_on_success(AgentContext& ctx, const std::string& user_short,
                                           const PairCandidate& negative,
                                           const PairCandidate& positive);

enum class ReviewPolarity { Positive, Negative };

std::string_view to_string(ReviewPolarity polarity);

struct Review {
  std::string author_id;
  std::string item_id;
  ReviewPolarity polarity = ReviewPolarity::Positive;
  std::string text;
};

/// Append-only on-disk review log, one JSON record per line.
class ReviewLog {
 public:
  explicit ReviewLog(std::filesystem::path path);
  void append(const Review& review);
  static std::vector<Review> read_all(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
};

/// Asks a user agent to review an item it adopted (or regretted).
/// `max_words` > 0 truncates overlong completions.
std::string write_review(AgentContext& ctx, const std::string& user_short,
                         const std::string& item_memory, ReviewPolarity polarity,
                         std::size_t max_words = 0);

struct ReviewDecision {
  ParsedYesNo before;
  ParsedYesNo after;
  bool attitude_changed = false;
  bool valid = true;
};

/// Two-stage purchase decision: first without reviews, then after reading
/// them (skipped when `reviews` is empty).
ReviewDecision decide_with_reviews(AgentContext& ctx, const std::string& user_short,
                                   const std::string& item_title,
                                   const std::string& item_memory,
                                   const std::vector<std::string>& reviews);

enum class WarmupSimilarity { Similar, Distinct };

/// Picks warmup partners for a cold item by BM25 over identity texts:
/// the best-matching popular items for Similar, the worst-matching for
/// Distinct. Returns item ids from `popular` in score order.
std::vector<std::string> select_warmup_neighbors(const ItemIdentity& cold,
                                                 const std::vector<ItemIdentity>& popular,
                                                 WarmupSimilarity mode, std::size_t k = 4,
                                                 std::string_view noun = "CD");

/// Cold item reads popular items' memories and rewrites its own description.
/// Returns the identity-only text when there are no neighbors or the model
/// answers with nothing.
std::string warmup_cold_item(AgentContext& ctx, const ItemIdentity& cold,
                             const std::vector<std::string>& neighbor_memories,
                             std::string_view noun = "CD");

/// Asks the agent a yes/no question answered from its own memory.
ParsedYesNo query_preference(AgentContext& ctx, const std::string& user_short,
                             const std::string& question);

}  // namespace agentcf
