#include "agentcf/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentcf/errors.hpp"
#include "agentcf/text.hpp"

namespace agentcf {

namespace {

using json = nlohmann::json;

constexpr int kDatasetSchema = 1;

void report_problem(const std::string& message, bool strict, IngestReport* report,
                    std::size_t* skipped) {
  if (strict) throw DataError(message);
  if (report) {
    report->warnings.push_back(message);
    if (skipped) ++*skipped;
  }
}

}  // namespace

std::string render_identity(const ItemIdentity& identity, std::string_view noun) {
  std::string cats = join(identity.categories, "; ");
  std::string out;
  out.append("The ").append(noun).append(" is called \"").append(identity.title);
  out.append("\". The category of this ").append(noun).append(" is: \"");
  out.append(cats).append("\".");
  return out;
}

std::size_t Dataset::interaction_count() const {
  std::size_t n = 0;
  for (const auto& [_, seq] : sequences) n += seq.size();
  return n;
}

std::set<std::string> Dataset::user_item_set(const std::string& user_id) const {
  std::set<std::string> out;
  auto it = sequences.find(user_id);
  if (it == sequences.end()) return out;
  for (const auto& inter : it->second) out.insert(inter.item_id);
  return out;
}

std::vector<RawRecord> load_reviews(const std::filesystem::path& path,
                                    const IngestOptions& opts, IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open review file: " + path.string());

  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (opts.max_records && records.size() >= opts.max_records) break;

    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      report_problem("line " + std::to_string(line_no) + ": not a valid record",
                     opts.strict, report, report ? &report->skipped : nullptr);
      continue;
    }
    RawRecord rec;
    rec.user_id = obj.value("reviewerID", "");
    rec.item_id = obj.value("asin", "");
    if (rec.user_id.empty() || rec.item_id.empty()) {
      report_problem("line " + std::to_string(line_no) + ": missing reviewerID or asin",
                     opts.strict, report, report ? &report->skipped : nullptr);
      continue;
    }
    if (!obj.contains("unixReviewTime") || !obj["unixReviewTime"].is_number()) {
      report_problem("line " + std::to_string(line_no) + ": missing unixReviewTime",
                     opts.strict, report, report ? &report->skipped : nullptr);
      continue;
    }
    rec.timestamp = obj["unixReviewTime"].get<std::int64_t>();
    if (rec.timestamp < 0) {
      report_problem("line " + std::to_string(line_no) + ": negative timestamp",
                     opts.strict, report, report ? &report->skipped : nullptr);
      continue;
    }
    if (obj.contains("overall") && obj["overall"].is_number()) {
      rec.rating = obj["overall"].get<double>();
    }
    if (obj.contains("reviewText") && obj["reviewText"].is_string()) {
      rec.review_text = obj["reviewText"].get<std::string>();
    }
    records.push_back(std::move(rec));
    if (report) ++report->parsed;
  }
  return records;
}

std::map<std::string, ItemIdentity> load_item_metadata(const std::filesystem::path& path,
                                                       const IngestOptions& opts,
                                                       IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open metadata file: " + path.string());

  std::map<std::string, ItemIdentity> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      report_problem("metadata line " + std::to_string(line_no) + ": not a valid record",
                     opts.strict, report, report ? &report->skipped : nullptr);
      continue;
    }
    ItemIdentity identity;
    identity.item_id = obj.value("asin", "");
    identity.title = obj.value("title", "");
    if (identity.item_id.empty() || identity.title.empty()) {
      report_problem("metadata line " + std::to_string(line_no) + ": missing asin or title",
                     opts.strict, report, report ? &report->skipped : nullptr);
      continue;
    }
    if (obj.contains("category") && obj["category"].is_array()) {
      for (const auto& c : obj["category"]) {
        if (c.is_string()) identity.categories.push_back(c.get<std::string>());
      }
    }
    items[identity.item_id] = std::move(identity);
  }
  return items;
}

Dataset build_dataset(const std::vector<RawRecord>& records,
                      const std::map<std::string, ItemIdentity>& metadata, bool strict,
                      IngestReport* report, std::string domain_noun) {
  Dataset ds;
  ds.domain_noun = std::move(domain_noun);

  for (const auto& rec : records) {
    ds.users.insert(rec.user_id);
    ds.sequences[rec.user_id].push_back({rec.item_id, rec.timestamp});
    if (!ds.items.contains(rec.item_id)) {
      auto meta_it = metadata.find(rec.item_id);
      if (meta_it != metadata.end()) {
        ds.items[rec.item_id] = meta_it->second;
      } else {
        if (strict) throw DataError("item without metadata: " + rec.item_id);
        if (report) report->warnings.push_back("item without metadata: " + rec.item_id);
        ds.items[rec.item_id] = ItemIdentity{rec.item_id, rec.item_id, {}};
      }
    }
  }

  // Stable sort keeps input order for equal timestamps.
  for (auto& [_, seq] : ds.sequences) {
    std::stable_sort(seq.begin(), seq.end(), [](const Interaction& a, const Interaction& b) {
      return a.timestamp < b.timestamp;
    });
  }
  return ds;
}

Dataset ingest(const std::filesystem::path& reviews_path,
               const std::filesystem::path& metadata_path, const IngestOptions& opts,
               IngestReport* report, std::string domain_noun) {
  auto records = load_reviews(reviews_path, opts, report);
  std::map<std::string, ItemIdentity> metadata;
  if (!metadata_path.empty()) metadata = load_item_metadata(metadata_path, opts, report);
  return build_dataset(records, metadata, opts.strict, report, std::move(domain_noun));
}

SubsetMode subset_mode_from_string(std::string_view s) {
  if (s == "dense") return SubsetMode::Dense;
  if (s == "sparse") return SubsetMode::Sparse;
  throw ConfigError("unknown subset mode: " + std::string(s));
}

std::string_view to_string(SubsetMode mode) {
  return mode == SubsetMode::Dense ? "dense" : "sparse";
}

namespace {

Dataset restrict_to_users(const Dataset& ds, const std::set<std::string>& keep) {
  Dataset out;
  out.domain_noun = ds.domain_noun;
  for (const auto& user : keep) {
    out.users.insert(user);
    const auto& seq = ds.sequences.at(user);
    out.sequences[user] = seq;
    for (const auto& inter : seq) {
      auto it = ds.items.find(inter.item_id);
      if (it != ds.items.end()) out.items[inter.item_id] = it->second;
    }
  }
  return out;
}

}  // namespace

Dataset sample_subset(const Dataset& ds, std::size_t n_users, SubsetMode mode,
                      std::uint64_t seed) {
  std::vector<std::string> all_users(ds.users.begin(), ds.users.end());
  if (n_users > all_users.size()) {
    throw DataError("requested " + std::to_string(n_users) + " users but only " +
                    std::to_string(all_users.size()) + " available");
  }

  Rng rng(mix_seed(seed, fnv1a64(to_string(mode))));
  std::set<std::string> chosen;

  if (mode == SubsetMode::Sparse) {
    shuffle_in_place(all_users, rng);
    chosen.insert(all_users.begin(), all_users.begin() + static_cast<long>(n_users));
    return restrict_to_users(ds, chosen);
  }

  // Dense: greedy max-overlap growth from one random seed user.
  std::set<std::string> item_pool;
  std::vector<std::string> remaining = all_users;
  std::size_t seed_idx = uniform_index(rng, remaining.size());
  const std::string seed_user = remaining[seed_idx];
  chosen.insert(seed_user);
  for (const auto& item : ds.user_item_set(seed_user)) item_pool.insert(item);
  remaining.erase(remaining.begin() + static_cast<long>(seed_idx));

  while (chosen.size() < n_users) {
    std::size_t best_overlap = 0;
    std::vector<std::size_t> best_indices;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      std::size_t overlap = 0;
      for (const auto& inter : ds.sequences.at(remaining[i])) {
        if (item_pool.contains(inter.item_id)) ++overlap;
      }
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best_indices.assign(1, i);
      } else if (overlap == best_overlap) {
        best_indices.push_back(i);
      }
    }
    std::size_t pick = best_indices[uniform_index(rng, best_indices.size())];
    const std::string user = remaining[pick];
    chosen.insert(user);
    for (const auto& item : ds.user_item_set(user)) item_pool.insert(item);
    remaining.erase(remaining.begin() + static_cast<long>(pick));
  }
  return restrict_to_users(ds, chosen);
}

DatasetStats compute_stats(const Dataset& ds) {
  if (ds.users.empty() || ds.items.empty()) throw DataError("compute_stats: empty dataset");
  DatasetStats stats;
  stats.n_users = ds.users.size();
  stats.n_items = ds.items.size();
  stats.n_inters = ds.interaction_count();
  stats.sparsity = 1.0 - static_cast<double>(stats.n_inters) /
                             (static_cast<double>(stats.n_users) *
                              static_cast<double>(stats.n_items));
  std::size_t total_words = 0;
  for (const auto& [_, identity] : ds.items) {
    total_words += count_words(render_identity(identity, ds.domain_noun));
  }
  stats.avg_words = static_cast<double>(total_words) / static_cast<double>(stats.n_items);
  return stats;
}

Split leave_one_out(const Dataset& ds, bool strict, std::vector<std::string>* dropped) {
  Split split;
  for (const auto& [user, seq] : ds.sequences) {
    if (seq.size() < 2) {
      if (strict) throw DataError("user with fewer than 2 interactions: " + user);
      if (dropped) dropped->push_back(user);
      continue;
    }
    std::vector<std::string> train;
    train.reserve(seq.size() - 1);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) train.push_back(seq[i].item_id);
    split.train[user] = std::move(train);
    split.test_target[user] = seq.back().item_id;
  }
  return split;
}

PopularityTable popularity_table(const Dataset& ds) {
  PopularityTable table;
  std::int64_t total = 0;
  for (const auto& [_, seq] : ds.sequences) {
    for (const auto& inter : seq) {
      ++table.counts[inter.item_id];
      ++total;
    }
  }
  if (total == 0) throw DataError("popularity_table: empty dataset");
  for (const auto& [item, count] : table.counts) {
    table.probabilities[item] = static_cast<double>(count) / static_cast<double>(total);
  }
  return table;
}

std::string sample_negative(const PopularityTable& pop, const std::set<std::string>& exclude,
                            Rng& rng) {
  std::vector<const std::string*> ids;
  std::vector<double> weights;
  ids.reserve(pop.counts.size());
  weights.reserve(pop.counts.size());
  for (const auto& [item, count] : pop.counts) {
    if (count <= 0 || exclude.contains(item)) continue;
    ids.push_back(&item);
    weights.push_back(static_cast<double>(count));
  }
  if (ids.empty()) throw DataError("sample_negative: all candidate mass excluded");
  return *ids[discrete_sample(rng, weights)];
}

std::string dataset_snapshot(const Dataset& ds) {
  json doc;
  doc["schema"] = kDatasetSchema;
  doc["domain_noun"] = ds.domain_noun;
  doc["users"] = json::array();
  for (const auto& user : ds.users) doc["users"].push_back(user);
  json items = json::object();
  for (const auto& [id, identity] : ds.items) {
    items[id] = {{"title", identity.title}, {"categories", identity.categories}};
  }
  doc["items"] = std::move(items);
  json sequences = json::object();
  for (const auto& [user, seq] : ds.sequences) {
    json arr = json::array();
    for (const auto& inter : seq) {
      arr.push_back({{"item", inter.item_id}, {"ts", inter.timestamp}});
    }
    sequences[user] = std::move(arr);
  }
  doc["sequences"] = std::move(sequences);
  return doc.dump(2) + "\n";
}

Dataset dataset_load(const std::string& doc_text) {
  json doc = json::parse(doc_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw SnapshotError("dataset snapshot: not valid JSON");
  if (doc.value("schema", -1) != kDatasetSchema) {
    throw SnapshotError("dataset snapshot: unsupported schema version");
  }
  Dataset ds;
  ds.domain_noun = doc.value("domain_noun", "CD");
  for (const auto& user : doc.at("users")) ds.users.insert(user.get<std::string>());
  for (const auto& [id, meta] : doc.at("items").items()) {
    ItemIdentity identity;
    identity.item_id = id;
    identity.title = meta.value("title", "");
    for (const auto& c : meta.value("categories", json::array())) {
      identity.categories.push_back(c.get<std::string>());
    }
    ds.items[id] = std::move(identity);
  }
  for (const auto& [user, arr] : doc.at("sequences").items()) {
    std::vector<Interaction> seq;
    for (const auto& entry : arr) {
      seq.push_back({entry.at("item").get<std::string>(), entry.at("ts").get<std::int64_t>()});
    }
    ds.sequences[user] = std::move(seq);
  }
  return ds;
}

std::string format_stats(const DatasetStats& stats) {
  char buf[64];
  std::string out;
  out += "n_users=" + std::to_string(stats.n_users) + "\n";
  out += "n_items=" + std::to_string(stats.n_items) + "\n";
  out += "n_inters=" + std::to_string(stats.n_inters) + "\n";
  std::snprintf(buf, sizeof buf, "%.4f", stats.sparsity * 100.0);
  out += "sparsity_pct=" + std::string(buf) + "\n";
  std::snprintf(buf, sizeof buf, "%.2f", stats.avg_words);
  out += "avg_words=" + std::string(buf) + "\n";
  return out;
}

}  // namespace agentcf
