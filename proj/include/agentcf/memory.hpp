#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "agentcf/corpus.hpp"

namespace agentcf {

struct UserMemory {
  std::string short_term;
  std::vector<std::string> long_term;

  bool operator==(const UserMemory&) const = default;
};

struct ItemMemory {
  std::string text;

  bool operator==(const ItemMemory&) const = default;
};

struct RetrievedEntry {
  std::size_t index = 0;
  double score = 0.0;
  std::string text;
};

struct RetrievedPreference {
  std::vector<RetrievedEntry> entries;  // descending score, ties by lower index
  std::string rendered;                 // entry texts joined in that order
};

/// Single-writer store of all agent memories. Every mutation bumps the
/// version counter, including writes that leave the text unchanged.
class MemoryStore {
 public:
  UserMemory& init_user(const std::string& user_id, std::string seed_text);
  ItemMemory& init_item(const ItemIdentity& identity, std::string_view noun = "CD");

  void set_user_short_term(const std::string& user_id, std::string text);
  void set_item_text(const std::string& item_id, std::string text);
  void append_long_term(const std::string& user_id, std::string previous_short);

  RetrievedPreference retrieve_long_term(const std::string& user_id,
                                         std::span<const std::string> queries,
                                         std::size_t k) const;

  bool has_user(const std::string& user_id) const { return users_.contains(user_id); }
  bool has_item(const std::string& item_id) const { return items_.contains(item_id); }
  const UserMemory& user(const std::string& user_id) const;
  const ItemMemory& item(const std::string& item_id) const;
  const std::map<std::string, UserMemory>& users() const { return users_; }
  const std::map<std::string, ItemMemory>& items() const { return items_; }
  std::uint64_t version() const { return version_; }

  std::string snapshot() const;
  static MemoryStore load(const std::string& doc);

  bool operator==(const MemoryStore&) const = default;

 private:
  std::map<std::string, UserMemory> users_;
  std::map<std::string, ItemMemory> items_;
  std::uint64_t version_ = 0;
};

/// Seeds memories for every user and item in the dataset.
MemoryStore init_store(const Dataset& ds, const std::string& user_seed_text);

}  // namespace agentcf
