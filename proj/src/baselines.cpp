#include "agentcf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "agentcf/bm25.hpp"
#include "agentcf/errors.hpp"
#include "agentcf/rng.hpp"
#include "agentcf/slate.hpp"

namespace agentcf {

namespace {

using json = nlohmann::json;

constexpr int kModelSchema = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Stable argsort by descending score; equal scores keep presentation order.
RankingResult rank_by_scores(const CandidateSlate& slate, const std::vector<double>& scores,
                             Strategy strategy) {
  std::vector<std::size_t> order(slate.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankingResult result;
  result.slate = slate;
  result.strategy = strategy;
  result.permutation.reserve(order.size());
  for (std::size_t idx : order) result.permutation.push_back(slate.candidates[idx]);
  return result;
}

}  // namespace

RankingResult pop_rank(const CandidateSlate& slate, const PopularityTable& pop) {
  std::vector<double> scores;
  scores.reserve(slate.candidates.size());
  for (const auto& item : slate.candidates) {
    auto it = pop.counts.find(item);
    scores.push_back(it == pop.counts.end() ? 0.0 : static_cast<double>(it->second));
  }
  return rank_by_scores(slate, scores, Strategy::Pop);
}

RankingResult bm25_rank(const CandidateSlate& slate,
                        const std::vector<std::string>& history_texts,
                        const std::map<std::string, std::string>& item_texts) {
  std::vector<std::string> docs;
  docs.reserve(slate.candidates.size());
  for (const auto& item : slate.candidates) {
    auto it = item_texts.find(item);
    docs.push_back(it == item_texts.end() ? std::string{} : it->second);
  }
  std::string query;
  for (const auto& text : history_texts) {
    if (!query.empty()) query.push_back('\n');
    query += text;
  }
  Bm25Index index(docs);
  return rank_by_scores(slate, index.scores(query), Strategy::BM25);
}

double bpr_triple_loss(std::span<const double> params, std::size_t dim, double l2_reg) {
  auto user = params.subspan(0, dim);
  auto pos = params.subspan(dim, dim);
  auto neg = params.subspan(2 * dim, dim);
  double diff = 0.0, norm = 0.0;
  for (std::size_t f = 0; f < dim; ++f) {
    diff += user[f] * (pos[f] - neg[f]);
    norm += user[f] * user[f] + pos[f] * pos[f] + neg[f] * neg[f];
  }
  return -std::log(sigmoid(diff)) + l2_reg * norm;
}

void bpr_triple_grad(std::span<const double> params, std::size_t dim, double l2_reg,
                     std::span<double> grad) {
  auto user = params.subspan(0, dim);
  auto pos = params.subspan(dim, dim);
  auto neg = params.subspan(2 * dim, dim);
  double diff = 0.0;
  for (std::size_t f = 0; f < dim; ++f) diff += user[f] * (pos[f] - neg[f]);
  const double coeff = -sigmoid(-diff);  // d(-ln sigma(x))/dx = -sigma(-x)
  for (std::size_t f = 0; f < dim; ++f) {
    grad[f] = coeff * (pos[f] - neg[f]) + 2.0 * l2_reg * user[f];
    grad[dim + f] = coeff * user[f] + 2.0 * l2_reg * pos[f];
    grad[2 * dim + f] = -coeff * user[f] + 2.0 * l2_reg * neg[f];
  }
}

MFModel bpr_train(const std::map<std::string, std::vector<std::string>>& train,
                  const BPRConfig& cfg) {
  if (train.empty()) throw DataError("bpr_train: empty training data");
  if (cfg.dim == 0) throw ConfigError("bpr_train: dim must be positive");

  // Flatten interactions and collect the item universe.
  std::vector<std::pair<const std::string*, const std::string*>> interactions;
  std::set<std::string> item_set;
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& [user, items] : train) {
    for (const auto& item : items) {
      interactions.emplace_back(&user, &item);
      item_set.insert(item);
      seen[user].insert(item);
    }
  }
  std::vector<std::string> item_list(item_set.begin(), item_set.end());

  MFModel model;
  model.dim = cfg.dim;
  Rng rng(mix_seed(cfg.seed, 0x62707221ULL));
  const double sigma = 0.1 / std::sqrt(static_cast<double>(cfg.dim));
  auto init_vec = [&](std::vector<double>& v) {
    v.resize(cfg.dim);
    for (auto& x : v) {
      // Box-Muller; hand-rolled for cross-platform determinism.
      double u1 = next_double(rng);
      double u2 = next_double(rng);
      if (u1 < 1e-300) u1 = 1e-300;
      x = sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
  };
  for (const auto& [user, _] : train) init_vec(model.user_vecs[user]);
  for (const auto& item : item_list) init_vec(model.item_vecs[item]);

  const std::size_t steps_per_epoch = interactions.size();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const auto& [user, pos_item] = interactions[uniform_index(rng, interactions.size())];
      const auto& user_seen = seen.at(*user);
      if (user_seen.size() >= item_list.size()) continue;  // user saw everything

      const std::string* neg_item = nullptr;
      do {
        neg_item = &item_list[uniform_index(rng, item_list.size())];
      } while (user_seen.contains(*neg_item));

      auto& u = model.user_vecs.at(*user);
      auto& p = model.item_vecs.at(*pos_item);
      auto& q = model.item_vecs.at(*neg_item);
      double diff = 0.0;
      for (std::size_t f = 0; f < cfg.dim; ++f) diff += u[f] * (p[f] - q[f]);
      const double coeff = sigmoid(-diff);
      const double lr = cfg.learning_rate;
      const double reg = 2.0 * cfg.l2_reg;
      for (std::size_t f = 0; f < cfg.dim; ++f) {
        const double uf = u[f], pf = p[f], qf = q[f];
        u[f] += lr * (coeff * (pf - qf) - reg * uf);
        p[f] += lr * (coeff * uf - reg * pf);
        q[f] += lr * (-coeff * uf - reg * qf);
      }
    }
  }
  return model;
}

double bpr_score(const MFModel& model, const std::string& user_id,
                 const std::string& item_id) {
  auto user_it = model.user_vecs.find(user_id);
  auto item_it = model.item_vecs.find(item_id);
  if (user_it == model.user_vecs.end() || item_it == model.item_vecs.end()) return 0.0;
  double score = 0.0;
  for (std::size_t f = 0; f < model.dim; ++f) {
    score += user_it->second[f] * item_it->second[f];
  }
  return score;
}

RankingResult bpr_rank(const MFModel& model, const CandidateSlate& slate) {
  std::vector<double> scores;
  scores.reserve(slate.candidates.size());
  for (const auto& item : slate.candidates) {
    scores.push_back(bpr_score(model, slate.user_id, item));
  }
  return rank_by_scores(slate, scores, Strategy::BPR);
}

std::string mf_snapshot(const MFModel& model) {
  json doc;
  doc["schema"] = kModelSchema;
  doc["dim"] = model.dim;
  json users = json::object();
  for (const auto& [id, vec] : model.user_vecs) users[id] = vec;
  doc["users"] = std::move(users);
  json items = json::object();
  for (const auto& [id, vec] : model.item_vecs) items[id] = vec;
  doc["items"] = std::move(items);
  return doc.dump(2) + "\n";
}

MFModel mf_load(const std::string& doc_text) {
  json doc = json::parse(doc_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw SnapshotError("model snapshot: not valid JSON");
  if (doc.value("schema", -1) != kModelSchema) {
    throw SnapshotError("model snapshot: unsupported schema version");
  }
  MFModel model;
  model.dim = doc.at("dim").get<std::size_t>();
  for (const auto& [id, vec] : doc.at("users").items()) {
    model.user_vecs[id] = vec.get<std::vector<double>>();
  }
  for (const auto& [id, vec] : doc.at("items").items()) {
    model.item_vecs[id] = vec.get<std::vector<double>>();
  }
  return model;
}

}  // namespace agentcf
