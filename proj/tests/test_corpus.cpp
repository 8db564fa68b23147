#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "agentcf/corpus.hpp"
#include "agentcf/errors.hpp"

using namespace agentcf;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << content;
  return path;
}

/// Synthetic dataset: n_users users, sequences over a shared item pool.
Dataset toy_dataset(std::size_t n_users, std::size_t n_items, std::size_t per_user) {
  Dataset ds;
  for (std::size_t u = 0; u < n_users; ++u) {
    std::string user = "u" + std::to_string(u);
    ds.users.insert(user);
    for (std::size_t i = 0; i < per_user; ++i) {
      std::string item = "i" + std::to_string((u * 3 + i * 7) % n_items);
      // Keep per-user items distinct by probing forward.
      while (std::any_of(ds.sequences[user].begin(), ds.sequences[user].end(),
                         [&](const Interaction& x) { return x.item_id == item; })) {
        item = "i" + std::to_string((std::stoul(item.substr(1)) + 1) % n_items);
      }
      ds.sequences[user].push_back({item, static_cast<std::int64_t>(100 * u + i)});
    }
  }
  for (const auto& [_, seq] : ds.sequences) {
    for (const auto& inter : seq) {
      if (!ds.items.contains(inter.item_id)) {
        ds.items[inter.item_id] = ItemIdentity{inter.item_id, "Title " + inter.item_id, {"Cat"}};
      }
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("render_identity matches the initialization sentence") {
  ItemIdentity identity{"b001", "Brainwashed", {"Classic Rock", "Album-Oriented Rock (AOR)"}};
  CHECK(render_identity(identity) ==
        "The CD is called \"Brainwashed\". The category of this CD is: "
        "\"Classic Rock; Album-Oriented Rock (AOR)\".");
  ItemIdentity no_cats{"x", "X", {}};
  CHECK(render_identity(no_cats, "Office Product") ==
        "The Office Product is called \"X\". The category of this Office Product is: \"\".");
}

TEST_CASE("ingest sorts per-user sequences by timestamp, ties keep input order") {
  auto reviews = write_temp("agentcf_reviews.jsonl", R"({"reviewerID":"u1","asin":"a","unixReviewTime":30}
{"reviewerID":"u2","asin":"b","unixReviewTime":10}
{"reviewerID":"u1","asin":"c","unixReviewTime":10}
)");
  auto meta = write_temp("agentcf_meta.jsonl", R"({"asin":"a","title":"A","category":["C1"]}
{"asin":"b","title":"B","category":["C1"]}
{"asin":"c","title":"C","category":["C2"]}
)");
  Dataset ds = ingest(reviews, meta);
  CHECK(ds.users.size() == 2);
  REQUIRE(ds.sequences.at("u1").size() == 2);
  CHECK(ds.sequences.at("u1")[0].item_id == "c");
  CHECK(ds.sequences.at("u1")[1].item_id == "a");
  CHECK(ds.sequences.at("u2")[0].item_id == "b");
}

TEST_CASE("ingest in strict mode rejects a malformed line by number") {
  auto reviews = write_temp("agentcf_bad.jsonl",
                            "{\"reviewerID\":\"u1\",\"asin\":\"a\",\"unixReviewTime\":1}\n"
                            "{\"reviewerID\":\"u2\",\"unixReviewTime\":2}\n");
  IngestOptions opts;
  opts.strict = true;
  CHECK_THROWS_WITH_AS(load_reviews(reviews, opts), doctest::Contains("line 2"), DataError);

  // Non-strict skips with a warning instead.
  IngestReport report;
  auto records = load_reviews(reviews, {}, &report);
  CHECK(records.size() == 1);
  CHECK(report.skipped == 1);
}

TEST_CASE("ingest order matches an independent stable sort on 1000 shuffled records") {
  // Oracle: records sorted with std::stable_sort by (user, timestamp).
  std::vector<RawRecord> records;
  std::string blob;
  Rng rng(12345);
  for (int i = 0; i < 1000; ++i) {
    RawRecord rec;
    rec.user_id = "u" + std::to_string(uniform_index(rng, 20));
    rec.item_id = "it" + std::to_string(i);  // unique items keep the oracle simple
    rec.timestamp = static_cast<std::int64_t>(uniform_index(rng, 50));
    records.push_back(rec);
    blob += "{\"reviewerID\":\"" + rec.user_id + "\",\"asin\":\"" + rec.item_id +
            "\",\"unixReviewTime\":" + std::to_string(rec.timestamp) + "}\n";
  }
  auto path = write_temp("agentcf_shuffled.jsonl", blob);
  Dataset ds = ingest(path, "");

  auto oracle = records;
  std::stable_sort(oracle.begin(), oracle.end(), [](const RawRecord& a, const RawRecord& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.timestamp < b.timestamp;
  });
  std::vector<std::pair<std::string, std::string>> expected, actual;
  for (const auto& rec : oracle) expected.emplace_back(rec.user_id, rec.item_id);
  for (const auto& [user, seq] : ds.sequences) {
    for (const auto& inter : seq) actual.emplace_back(user, inter.item_id);
  }
  CHECK(actual == expected);
}

TEST_CASE("sample_subset identity case and determinism") {
  Dataset ds = toy_dataset(8, 12, 3);
  Dataset all = sample_subset(ds, 8, SubsetMode::Sparse, 1);
  CHECK(all.users == ds.users);
  CHECK(all.interaction_count() == ds.interaction_count());

  Dataset a = sample_subset(ds, 4, SubsetMode::Dense, 9);
  Dataset b = sample_subset(ds, 4, SubsetMode::Dense, 9);
  CHECK(dataset_snapshot(a) == dataset_snapshot(b));

  CHECK_THROWS_AS(sample_subset(ds, 9, SubsetMode::Sparse, 1), DataError);
}

TEST_CASE("dense sampling yields fewer distinct items than sparse at equal interactions") {
  // Block-structured source: users inside a block share an item pool, so a
  // greedy overlap sampler must stay inside far fewer items than a uniform one.
  Dataset ds;
  Rng rng(777);
  for (std::size_t u = 0; u < 60; ++u) {
    std::string user = "u" + std::to_string(u);
    ds.users.insert(user);
    std::size_t block = u / 10;
    for (std::size_t i = 0; i < 5; ++i) {
      std::string item =
          "i" + std::to_string(block * 8 + uniform_index(rng, 8));
      ds.sequences[user].push_back({item, static_cast<std::int64_t>(i)});
    }
  }
  for (const auto& [_, seq] : ds.sequences) {
    for (const auto& inter : seq) {
      ds.items.emplace(inter.item_id, ItemIdentity{inter.item_id, "T" + inter.item_id, {}});
    }
  }
  Dataset dense = sample_subset(ds, 12, SubsetMode::Dense, 5);
  Dataset sparse = sample_subset(ds, 12, SubsetMode::Sparse, 5);
  CHECK(dense.interaction_count() == sparse.interaction_count());
  CHECK(dense.items.size() < sparse.items.size());
}

TEST_CASE("compute_stats reproduces the published sparsity figures") {
  struct Row {
    std::size_t users, items, inters;
    double pct;
  };
  // (users, items, inters) -> sparsity percent, all six reference rows.
  const Row rows[] = {
      {93653, 64032, 1178439, 99.98}, {100, 704, 800, 98.86}, {100, 269, 800, 97.03},
      {86530, 25842, 675683, 99.97},  {100, 561, 600, 98.93}, {100, 188, 600, 96.81},
  };
  for (const auto& row : rows) {
    double sparsity =
        1.0 - static_cast<double>(row.inters) /
                  (static_cast<double>(row.users) * static_cast<double>(row.items));
    CHECK(std::abs(sparsity * 100.0 - row.pct) < 0.005);
  }

  Dataset one;
  one.users.insert("u");
  one.items["i"] = ItemIdentity{"i", "T", {}};
  one.sequences["u"].push_back({"i", 0});
  DatasetStats stats = compute_stats(one);
  CHECK(stats.sparsity == doctest::Approx(0.0));
}

TEST_CASE("leave_one_out splits and reassembles exactly") {
  Dataset ds = toy_dataset(5, 9, 4);
  Split split = leave_one_out(ds);
  CHECK(split.test_target.size() == 5);
  for (const auto& [user, seq] : ds.sequences) {
    std::vector<std::string> rebuilt = split.train.at(user);
    rebuilt.push_back(split.test_target.at(user));
    std::vector<std::string> original;
    for (const auto& inter : seq) original.push_back(inter.item_id);
    CHECK(rebuilt == original);
  }
  CHECK(ds.interaction_count() ==
        split.test_target.size() +
            [&] {
              std::size_t n = 0;
              for (const auto& [_, items] : split.train) n += items.size();
              return n;
            }());
}

TEST_CASE("leave_one_out drops or rejects single-interaction users") {
  Dataset ds = toy_dataset(2, 5, 3);
  ds.users.insert("loner");
  ds.sequences["loner"].push_back({"i0", 0});

  std::vector<std::string> dropped;
  Split split = leave_one_out(ds, false, &dropped);
  CHECK(dropped == std::vector<std::string>{"loner"});
  CHECK(!split.train.contains("loner"));

  CHECK_THROWS_WITH_AS(leave_one_out(ds, true), doctest::Contains("loner"), DataError);
}

TEST_CASE("popularity_table normalizes counts") {
  Dataset ds;
  ds.users = {"u1", "u2"};
  ds.items["a"] = {"a", "A", {}};
  ds.items["b"] = {"b", "B", {}};
  ds.sequences["u1"] = {{"a", 0}, {"a", 1}, {"b", 2}};
  ds.sequences["u2"] = {{"a", 0}};
  PopularityTable pop = popularity_table(ds);
  CHECK(pop.counts.at("a") == 3);
  CHECK(pop.counts.at("b") == 1);
  CHECK(pop.probabilities.at("a") == doctest::Approx(0.75));
  CHECK(pop.probabilities.at("b") == doctest::Approx(0.25));

  double total = 0;
  for (const auto& [_, p] : pop.probabilities) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sample_negative follows the popularity distribution") {
  PopularityTable pop;
  pop.counts = {{"a", 3}, {"b", 1}};
  pop.probabilities = {{"a", 0.75}, {"b", 0.25}};

  Rng rng(42);
  int hits_a = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    if (sample_negative(pop, {}, rng) == "a") ++hits_a;
  }
  CHECK(std::abs(static_cast<double>(hits_a) / draws - 0.75) < 0.01);

  CHECK(sample_negative(pop, {"a"}, rng) == "b");
  CHECK_THROWS_AS(sample_negative(pop, {"a", "b"}, rng), DataError);
}

TEST_CASE("sample_negative passes chi-square against a 10-item table") {
  PopularityTable pop;
  std::int64_t total = 0;
  for (int i = 0; i < 10; ++i) {
    pop.counts["item" + std::to_string(i)] = i + 1;
    total += i + 1;
  }
  for (const auto& [item, count] : pop.counts) {
    pop.probabilities[item] = static_cast<double>(count) / static_cast<double>(total);
  }
  Rng rng(2024);
  std::map<std::string, int> observed;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++observed[sample_negative(pop, {}, rng)];

  double chi2 = 0.0;
  for (const auto& [item, p] : pop.probabilities) {
    double expected = p * draws;
    double diff = observed[item] - expected;
    chi2 += diff * diff / expected;
  }
  // 0.01 upper critical value of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 21.666);
}

TEST_CASE("dataset snapshot round-trips byte-identically") {
  Dataset ds = toy_dataset(3, 7, 3);
  std::string doc = dataset_snapshot(ds);
  Dataset loaded = dataset_load(doc);
  CHECK(dataset_snapshot(loaded) == doc);
  CHECK_THROWS_AS(dataset_load("{\"schema\": 999}"), SnapshotError);
}
