#include "agentcf/memory.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "agentcf/bm25.hpp"
#include "agentcf/errors.hpp"
#include "agentcf/text.hpp"

namespace agentcf {

namespace {

using json = nlohmann::json;

constexpr int kMemorySchema = 1;

}  // namespace

UserMemory& MemoryStore::init_user(const std::string& user_id, std::string seed_text) {
  if (trim(seed_text).empty()) throw DataError("init_user: empty seed text for " + user_id);
  if (users_.contains(user_id)) throw DataError("init_user: duplicate user " + user_id);
  ++version_;
  auto [it, _] = users_.emplace(user_id, UserMemory{std::move(seed_text), {}});
  return it->second;
}

ItemMemory& MemoryStore::init_item(const ItemIdentity& identity, std::string_view noun) {
  if (identity.title.empty()) throw DataError("init_item: empty title for " + identity.item_id);
  ++version_;
  auto [it, inserted] = items_.emplace(identity.item_id,
                                       ItemMemory{render_identity(identity, noun)});
  if (!inserted) throw DataError("init_item: duplicate item " + identity.item_id);
  return it->second;
}

void MemoryStore::set_user_short_term(const std::string& user_id, std::string text) {
  auto it = users_.find(user_id);
  if (it == users_.end()) throw DataError("unknown user: " + user_id);
  if (trim(text).empty()) throw DataError("set_user_short_term: empty text for " + user_id);
  ++version_;
  it->second.short_term = std::move(text);
}

void MemoryStore::set_item_text(const std::string& item_id, std::string text) {
  auto it = items_.find(item_id);
  if (it == items_.end()) throw DataError("unknown item: " + item_id);
  if (trim(text).empty()) throw DataError("set_item_text: empty text for " + item_id);
  ++version_;
  it->second.text = std::move(text);
}

void MemoryStore::append_long_term(const std::string& user_id, std::string previous_short) {
  auto it = users_.find(user_id);
  if (it == users_.end()) throw DataError("unknown user: " + user_id);
  ++version_;
  it->second.long_term.push_back(std::move(previous_short));
}

RetrievedPreference MemoryStore::retrieve_long_term(const std::string& user_id,
                                                    std::span<const std::string> queries,
                                                    std::size_t k) const {
  auto it = users_.find(user_id);
  if (it == users_.end()) throw DataError("unknown user: " + user_id);
  if (queries.empty()) throw DataError("retrieve_long_term: no queries");

  RetrievedPreference result;
  const auto& pool = it->second.long_term;
  if (pool.empty() || k == 0) return result;

  std::string query;
  for (const auto& q : queries) {
    if (!query.empty()) query.push_back('\n');
    query += q;
  }

  Bm25Index index(pool);
  auto scores = index.scores(query);
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];  // ties keep lower index first
  });

  const std::size_t take = std::min(k, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    result.entries.push_back({order[i], scores[order[i]], pool[order[i]]});
    if (i) result.rendered.push_back('\n');
    result.rendered += pool[order[i]];
  }
  return result;
}

const UserMemory& MemoryStore::user(const std::string& user_id) const {
  auto it = users_.find(user_id);
  if (it == users_.end()) throw DataError("unknown user: " + user_id);
  return it->second;
}

const ItemMemory& MemoryStore::item(const std::string& item_id) const {
  auto it = items_.find(item_id);
  if (it == items_.end()) throw DataError("unknown item: " + item_id);
  return it->second;
}

std::string MemoryStore::snapshot() const {
  json doc;
  doc["schema"] = kMemorySchema;
  doc["version"] = version_;
  json users = json::object();
  for (const auto& [id, mem] : users_) {
    users[id] = {{"short", mem.short_term}, {"long", mem.long_term}};
  }
  doc["users"] = std::move(users);
  json items = json::object();
  for (const auto& [id, mem] : items_) {
    items[id] = {{"text", mem.text}};
  }
  doc["items"] = std::move(items);
  return doc.dump(2) + "\n";
}

MemoryStore MemoryStore::load(const std::string& doc_text) {
  json doc = json::parse(doc_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SnapshotError("memory snapshot: not valid JSON");
  }
  if (doc.value("schema", -1) != kMemorySchema) {
    throw SnapshotError("memory snapshot: unsupported schema version");
  }
  MemoryStore store;
  store.version_ = doc.value("version", 0);
  for (const auto& [id, mem] : doc.at("users").items()) {
    UserMemory user;
    user.short_term = mem.at("short").get<std::string>();
    for (const auto& entry : mem.at("long")) user.long_term.push_back(entry.get<std::string>());
    store.users_[id] = std::move(user);
  }
  for (const auto& [id, mem] : doc.at("items").items()) {
    store.items_[id] = ItemMemory{mem.at("text").get<std::string>()};
  }
  return store;
}

MemoryStore init_store(const Dataset& ds, const std::string& user_seed_text) {
  MemoryStore store;
  for (const auto& user : ds.users) store.init_user(user, user_seed_text);
  for (const auto& [_, identity] : ds.items) store.init_item(identity, ds.domain_noun);
  return store;
}

}  // namespace agentcf
