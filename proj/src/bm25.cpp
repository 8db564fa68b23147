#include "agentcf/bm25.hpp"

#include <cmath>

#include "agentcf/text.hpp"

namespace agentcf {

Bm25Index::Bm25Index(const std::vector<std::string>& docs, Bm25Params params)
    : params_(params) {
  doc_terms_.reserve(docs.size());
  doc_lens_.reserve(docs.size());
  std::size_t total_len = 0;
  for (const auto& doc : docs) {
    std::map<std::string, std::size_t> terms;
    auto tokens = tokenize(doc);
    for (auto& t : tokens) ++terms[t];
    doc_lens_.push_back(tokens.size());
    total_len += tokens.size();
    for (const auto& [term, _] : terms) ++doc_freq_[term];
    doc_terms_.push_back(std::move(terms));
  }
  avg_len_ = docs.empty() ? 0.0 : static_cast<double>(total_len) / static_cast<double>(docs.size());
}

double Bm25Index::score(std::string_view query, std::size_t doc) const {
  if (doc >= doc_terms_.size() || avg_len_ == 0.0) return 0.0;
  const auto& terms = doc_terms_[doc];
  const double len_norm =
      params_.k1 * (1.0 - params_.b +
                    params_.b * static_cast<double>(doc_lens_[doc]) / avg_len_);
  const double n_docs = static_cast<double>(doc_terms_.size());

  double total = 0.0;
  for (const auto& token : tokenize(query)) {
    auto tf_it = terms.find(token);
    if (tf_it == terms.end()) continue;
    const double tf = static_cast<double>(tf_it->second);
    const double df = static_cast<double>(doc_freq_.at(token));
    const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
    total += idf * tf * (params_.k1 + 1.0) / (tf + len_norm);
  }
  return total;
}

std::vector<double> Bm25Index::scores(std::string_view query) const {
  std::vector<double> out(doc_terms_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = score(query, i);
  return out;
}

}  // namespace agentcf
