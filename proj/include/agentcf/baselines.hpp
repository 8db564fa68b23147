#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "agentcf/corpus.hpp"
#include "agentcf/slate.hpp"

namespace agentcf {

struct MFModel {
  std::map<std::string, std::vector<double>> user_vecs;
  std::map<std::string, std::vector<double>> item_vecs;
  std::size_t dim = 0;
};

struct BPRConfig {
  std::size_t dim = 64;
  double learning_rate = 0.01;
  double l2_reg = 1e-4;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
};

/// Candidates sorted by descending interaction count; ties keep presentation
/// order. Items absent from the table count as zero.
RankingResult pop_rank(const CandidateSlate& slate, const PopularityTable& pop);

/// Candidates scored by BM25 against the concatenated history texts, with the
/// slate's candidate texts as the IDF corpus. Ties keep presentation order.
RankingResult bm25_rank(const CandidateSlate& slate,
                        const std::vector<std::string>& history_texts,
                        const std::map<std::string, std::string>& item_texts);

/// Matrix factorization trained with SGD on the BPR objective over uniformly
/// sampled (user, positive, negative) triples. Reproducible for a fixed seed.
MFModel bpr_train(const std::map<std::string, std::vector<std::string>>& train,
                  const BPRConfig& cfg);

/// Dot-product preference score; ids missing from the model score 0.
double bpr_score(const MFModel& model, const std::string& user_id,
                 const std::string& item_id);

RankingResult bpr_rank(const MFModel& model, const CandidateSlate& slate);

/// Single-triple objective and its analytic gradient, exposed so tests can
/// check the gradient against central finite differences. Layout of `params`
/// and `grad`: [user | pos_item | neg_item], each of length dim.
double bpr_triple_loss(std::span<const double> params, std::size_t dim, double l2_reg);
void bpr_triple_grad(std::span<const double> params, std::size_t dim, double l2_reg,
                     std::span<double> grad);

std::string mf_snapshot(const MFModel& model);
MFModel mf_load(const std::string& doc);

}  // namespace agentcf
