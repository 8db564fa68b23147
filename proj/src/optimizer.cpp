#include "agentcf/optimizer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentcf/errors.hpp"

namespace agentcf {

namespace {

using json = nlohmann::json;

constexpr int kTraceSchema = 1;

struct WallStep {
  std::string user_id;
  std::size_t step_index;
  std::int64_t timestamp;
};

std::vector<WallStep> build_ordering(const Split& split, const Dataset& ds,
                                     TrainOrdering ordering) {
  std::vector<WallStep> steps;
  for (const auto& [user, items] : split.train) {
    const auto& seq = ds.sequences.at(user);
    for (std::size_t i = 0; i < items.size(); ++i) {
      steps.push_back({user, i, seq[i].timestamp});
    }
  }
  if (ordering == TrainOrdering::GlobalChronological) {
    std::stable_sort(steps.begin(), steps.end(), [](const WallStep& a, const WallStep& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      if (a.user_id != b.user_id) return a.user_id < b.user_id;
      return a.step_index < b.step_index;
    });
  }
  // PerUser keeps the natural (user-sorted, then per-user chronological) order
  // inherited from the map walk above.
  return steps;
}

PairCandidate make_candidate(const Dataset& ds, const MemoryStore& store,
                             const std::string& item_id) {
  return PairCandidate{item_id, ds.items.at(item_id).title, store.item(item_id).text};
}

}  // namespace

TrainOrdering ordering_from_string(std::string_view s) {
  if (s == "global-chronological") return TrainOrdering::GlobalChronological;
  if (s == "per-user") return TrainOrdering::PerUser;
  throw ConfigError("unknown train ordering: " + std::string(s));
}

std::string_view to_string(TrainOrdering ordering) {
  return ordering == TrainOrdering::GlobalChronological ? "global-chronological" : "per-user";
}

std::vector<StepRecord> optimize(const Split& split, const Dataset& ds, MemoryStore& store,
                                 const PopularityTable& pop, AgentContext& ctx,
                                 const TrainConfig& cfg) {
  if (cfg.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  for (const auto& [user, _] : split.train) {
    if (!store.has_user(user)) throw DataError("store missing user: " + user);
  }

  const auto ordering = build_ordering(split, ds, cfg.ordering);
  std::vector<StepRecord> trace;
  trace.reserve(ordering.size());

  for (std::uint64_t wall = cfg.start_offset; wall < ordering.size(); ++wall) {
    const WallStep& step = ordering[wall];
    const std::string& positive = split.train.at(step.user_id)[step.step_index];

    // Per-step generator keyed by (seed, user, step) so a resumed run draws
    // the same negatives without replaying earlier steps.
    Rng rng(mix_seed(cfg.neg_seed, fnv1a64(step.user_id), step.step_index));
    std::set<std::string> exclude = ds.user_item_set(step.user_id);
    exclude.insert(positive);
    const std::string negative = sample_negative(pop, exclude, rng);

    StepRecord record;
    record.user_id = step.user_id;
    record.step_index = step.step_index;
    record.wall_index = wall;
    record.positive = positive;
    record.negative = negative;
    record.negative_first = cfg.neg_position == NegPosition::First;

    const std::string pre_step_short = store.user(step.user_id).short_term;

    try {
      // Default display order puts the popular negative first: deliberate
      // position + popularity bias in the contrastive pair.
      for (int round = 0; round <= cfg.max_rounds; ++round) {
        PairCandidate neg = make_candidate(ds, store, negative);
        PairCandidate pos = make_candidate(ds, store, positive);
        PairCandidate first = record.negative_first ? neg : pos;
        PairCandidate second = record.negative_first ? pos : neg;
        SelectionOutcome outcome;
        try {
          outcome = select_pairwise(ctx, store.user(step.user_id).short_term, first, second,
                                    record.negative_first ? 2 : 1);
        } catch (const UnparsableChoice&) {
          record.parse_failed = true;
          break;
        }
        record.attempts.push_back({round, outcome.chosen_item, outcome.correct});

        if (outcome.correct) {
          if (round == 0) {
            auto consolidated = consolidate_on_success(
                ctx, store.user(step.user_id).short_term, neg, pos);
            if (consolidated.parsed) {
              store.set_user_short_term(step.user_id, consolidated.new_user_short);
            }
          }
          break;
        }
        if (round == cfg.max_rounds) break;

        auto reflected =
            reflect_on_failure(ctx, store.user(step.user_id).short_term, neg, pos, outcome);
        if (reflected.user_parsed) {
          store.set_user_short_term(step.user_id, reflected.new_user_short);
        }
        if (reflected.item_parsed) {
          store.set_item_text(positive, reflected.new_positive_item_text);
        }
      }
    } catch (const GatewayError&) {
      if (!cfg.checkpoint_dir.empty()) {
        write_checkpoint(cfg.checkpoint_dir, store, trace, wall);
      }
      throw;
    }

    record.final_correct = !record.attempts.empty() && record.attempts.back().correct;
    store.append_long_term(step.user_id, pre_step_short);
    trace.push_back(std::move(record));

    if (!cfg.checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
        (wall + 1) % cfg.checkpoint_every == 0) {
      write_checkpoint(cfg.checkpoint_dir, store, trace, wall + 1);
    }
  }

  if (!cfg.checkpoint_dir.empty()) {
    write_checkpoint(cfg.checkpoint_dir, store, trace, ordering.size());
  }
  return trace;
}

std::vector<AlignmentPoint> alignment_curve(std::span<const StepRecord> trace,
                                            std::size_t last_n) {
  if (trace.empty()) throw DataError("alignment_curve: empty trace");
  if (last_n == 0) throw DataError("alignment_curve: last_n must be positive");

  std::map<std::string, std::vector<const StepRecord*>> per_user;
  for (const auto& record : trace) per_user[record.user_id].push_back(&record);
  for (auto& [_, records] : per_user) {
    std::sort(records.begin(), records.end(), [](const StepRecord* a, const StepRecord* b) {
      return a->step_index < b->step_index;
    });
  }

  std::vector<AlignmentPoint> curve(last_n);
  for (std::size_t pos = 0; pos < last_n; ++pos) curve[pos].step = pos + 1;

  for (const auto& [_, records] : per_user) {
    const std::size_t take = std::min(last_n, records.size());
    const std::size_t begin = records.size() - take;
    for (std::size_t i = 0; i < take; ++i) {
      const StepRecord* record = records[begin + i];
      if (record->attempts.empty()) continue;
      AlignmentPoint& point = curve[i];
      ++point.n_users;
      if (record->attempts.front().correct) point.first_attempt_acc += 1.0;
      if (record->final_correct) point.final_acc += 1.0;
    }
  }
  for (auto& point : curve) {
    if (point.n_users > 0) {
      point.first_attempt_acc /= static_cast<double>(point.n_users);
      point.final_acc /= static_cast<double>(point.n_users);
    }
  }
  return curve;
}

std::string trace_to_jsonl(std::span<const StepRecord> trace) {
  std::string out;
  for (const auto& record : trace) {
    json rec;
    rec["v"] = kTraceSchema;
    rec["user"] = record.user_id;
    rec["step"] = record.step_index;
    rec["wall"] = record.wall_index;
    rec["positive"] = record.positive;
    rec["negative"] = record.negative;
    rec["negative_first"] = record.negative_first;
    json attempts = json::array();
    for (const auto& attempt : record.attempts) {
      attempts.push_back(
          {{"round", attempt.round}, {"chosen", attempt.chosen}, {"correct", attempt.correct}});
    }
    rec["attempts"] = std::move(attempts);
    rec["final_correct"] = record.final_correct;
    rec["parse_failed"] = record.parse_failed;
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<StepRecord> trace_from_jsonl(const std::string& text) {
  std::vector<StepRecord> trace;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw SnapshotError("trace line " + std::to_string(line_no) + ": bad record");
    }
    if (rec.value("v", -1) != kTraceSchema) {
      throw SnapshotError("trace line " + std::to_string(line_no) + ": unsupported schema");
    }
    StepRecord record;
    record.user_id = rec.at("user").get<std::string>();
    record.step_index = rec.at("step").get<std::size_t>();
    record.wall_index = rec.at("wall").get<std::uint64_t>();
    record.positive = rec.at("positive").get<std::string>();
    record.negative = rec.at("negative").get<std::string>();
    record.negative_first = rec.value("negative_first", true);
    for (const auto& attempt : rec.at("attempts")) {
      record.attempts.push_back({attempt.at("round").get<int>(),
                                 attempt.at("chosen").get<std::string>(),
                                 attempt.at("correct").get<bool>()});
    }
    record.final_correct = rec.at("final_correct").get<bool>();
    record.parse_failed = rec.at("parse_failed").get<bool>();
    trace.push_back(std::move(record));
  }
  return trace;
}

void write_checkpoint(const std::filesystem::path& dir, const MemoryStore& store,
                      std::span<const StepRecord> trace_so_far, std::uint64_t next_offset) {
  std::filesystem::create_directories(dir);
  { std::ofstream(dir / "memory.json") << store.snapshot(); }
  { std::ofstream(dir / "trace.jsonl") << trace_to_jsonl(trace_so_far); }
  { std::ofstream(dir / "offset") << next_offset << "\n"; }
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
  auto read_file = [](const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  Checkpoint cp;
  cp.store = MemoryStore::load(read_file(dir / "memory.json"));
  cp.trace = trace_from_jsonl(read_file(dir / "trace.jsonl"));
  cp.next_offset = std::stoull(read_file(dir / "offset"));
  return cp;
}

}  // namespace agentcf
