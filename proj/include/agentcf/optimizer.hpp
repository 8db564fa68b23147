#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "agentcf/agents.hpp"
#include "agentcf/corpus.hpp"
#include "agentcf/memory.hpp"

namespace agentcf {

struct Attempt {
  int round = 0;  // 0 = initial selection, 1.. = post-reflection re-selections
  std::string chosen;
  bool correct = false;
};

struct StepRecord {
  std::string user_id;
  std::size_t step_index = 0;  // per-user position within the train sequence
  std::uint64_t wall_index = 0;
  std::string positive;
  std::string negative;
  bool negative_first = true;  // display order, auditable from the trace
  std::vector<Attempt> attempts;
  bool final_correct = false;
  bool parse_failed = false;  // selection unparsable twice; step skipped
};

enum class TrainOrdering { GlobalChronological, PerUser };

TrainOrdering ordering_from_string(std::string_view s);
std::string_view to_string(TrainOrdering ordering);

enum class NegPosition { First, Second };

struct TrainConfig {
  int max_rounds = 2;  // reflection rounds per step
  NegPosition neg_position = NegPosition::First;
  TrainOrdering ordering = TrainOrdering::GlobalChronological;
  std::uint64_t neg_seed = 0;
  std::size_t checkpoint_every = 50;          // steps; 0 disables
  std::filesystem::path checkpoint_dir = {};  // empty disables
  std::size_t start_offset = 0;               // wall steps to skip on resume
};

/// Runs the collaborative optimization loop over the training split.
///
/// Per step: sample a popular negative (user history excluded), display it
/// first, select; while wrong and rounds remain, reflect (user short-term +
/// positive item memory) and re-select; consolidate only when the very first
/// attempt was correct; finally append the pre-step short-term memory to the
/// long-term pool. No long-term retrieval happens during training.
std::vector<StepRecord> optimize(const Split& split, const Dataset& ds, MemoryStore& store,
                                 const PopularityTable& pop, AgentContext& ctx,
                                 const TrainConfig& cfg);

struct AlignmentPoint {
  std::size_t step = 0;  // 1-based position within the last-n window
  double first_attempt_acc = 0.0;
  double final_acc = 0.0;
  std::size_t n_users = 0;
};

/// Per-position accuracy over each user's last `last_n` steps: fraction of
/// users correct on their first attempt and after reflection.
std::vector<AlignmentPoint> alignment_curve(std::span<const StepRecord> trace,
                                            std::size_t last_n = 3);

std::string trace_to_jsonl(std::span<const StepRecord> trace);
std::vector<StepRecord> trace_from_jsonl(const std::string& text);

/// Checkpoint layout: <dir>/memory.json, <dir>/trace.jsonl, <dir>/offset.
void write_checkpoint(const std::filesystem::path& dir, const MemoryStore& store,
                      std::span<const StepRecord> trace_so_far, std::uint64_t next_offset);
struct Checkpoint {
  MemoryStore store;
  std::vector<StepRecord> trace;
  std::uint64_t next_offset = 0;
};
Checkpoint read_checkpoint(const std::filesystem::path& dir);

}  // namespace agentcf
