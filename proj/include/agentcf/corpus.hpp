#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "agentcf/rng.hpp"

namespace agentcf {

struct RawRecord {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
  std::optional<std::string> review_text;
  std::optional<double> rating;
};

struct ItemIdentity {
  std::string item_id;
  std::string title;
  std::vector<std::string> categories;
};

/// Deterministic identity sentence used to seed item memories, e.g.
///   The CD is called "Brainwashed". The category of this CD is: "Classic
///   Rock; Album-Oriented Rock (AOR)".
std::string render_identity(const ItemIdentity& identity, std::string_view noun = "CD");

struct Interaction {
  std::string item_id;
  std::int64_t timestamp = 0;
};

struct Dataset {
  std::set<std::string> users;
  std::map<std::string, ItemIdentity> items;
  // Chronologically ordered per user; timestamp ties keep input order.
  std::map<std::string, std::vector<Interaction>> sequences;
  std::string domain_noun = "CD";

  std::size_t interaction_count() const;
  /// All item ids the user ever touched (train and target alike).
  std::set<std::string> user_item_set(const std::string& user_id) const;
};

struct DatasetStats {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_inters = 0;
  double sparsity = 0.0;
  double avg_words = 0.0;
};

struct PopularityTable {
  std::map<std::string, std::int64_t> counts;
  std::map<std::string, double> probabilities;
};

struct Split {
  std::map<std::string, std::vector<std::string>> train;
  std::map<std::string, std::string> test_target;
};

struct IngestOptions {
  std::size_t max_records = 0;  // 0 = unlimited
  bool strict = false;
};

struct IngestReport {
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Parses newline-delimited review records (reviewerID/asin/unixReviewTime).
std::vector<RawRecord> load_reviews(const std::filesystem::path& path,
                                    const IngestOptions& opts = {},
                                    IngestReport* report = nullptr);

/// Parses newline-delimited item metadata records (asin/title/category).
std::map<std::string, ItemIdentity> load_item_metadata(const std::filesystem::path& path,
                                                       const IngestOptions& opts = {},
                                                       IngestReport* report = nullptr);

/// Assembles a Dataset from records plus metadata. Items that appear in the
/// log but not in the metadata get a bare identity (title = id) and a warning,
/// or a DataError in strict mode.
Dataset build_dataset(const std::vector<RawRecord>& records,
                      const std::map<std::string, ItemIdentity>& metadata,
                      bool strict = false, IngestReport* report = nullptr,
                      std::string domain_noun = "CD");

Dataset ingest(const std::filesystem::path& reviews_path,
               const std::filesystem::path& metadata_path,
               const IngestOptions& opts = {}, IngestReport* report = nullptr,
               std::string domain_noun = "CD");

enum class SubsetMode { Dense, Sparse };

SubsetMode subset_mode_from_string(std::string_view s);
std::string_view to_string(SubsetMode mode);

/// Draws an n_users subset. Sparse picks users uniformly; dense grows a pool
/// greedily from one random seed user, always adding the user with maximal
/// item overlap against the items collected so far (random tie-break).
Dataset sample_subset(const Dataset& ds, std::size_t n_users, SubsetMode mode,
                      std::uint64_t seed);

DatasetStats compute_stats(const Dataset& ds);

/// Leave-one-out split: last interaction per user becomes the test target.
/// Users with fewer than two interactions are dropped with a warning, or
/// rejected in strict mode.
Split leave_one_out(const Dataset& ds, bool strict = false,
                    std::vector<std::string>* dropped = nullptr);

PopularityTable popularity_table(const Dataset& ds);

/// Popularity-proportional draw restricted to non-excluded items.
std::string sample_negative(const PopularityTable& pop,
                            const std::set<std::string>& exclude, Rng& rng);

/// Dataset snapshot document (schema-versioned JSON text).
std::string dataset_snapshot(const Dataset& ds);
Dataset dataset_load(const std::string& doc);

/// Flat key=value rendering of DatasetStats.
std::string format_stats(const DatasetStats& stats);

}  // namespace agentcf
