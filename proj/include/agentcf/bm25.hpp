#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace agentcf {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Okapi BM25 over a fixed document list. IDF uses the smoothed form
/// ln(1 + (N - n + 0.5) / (n + 0.5)) so scores stay non-negative on tiny
/// corpora. Tokenization is lowercased alphanumeric runs.
class Bm25Index {
 public:
  explicit Bm25Index(const std::vector<std::string>& docs, Bm25Params params = {});

  std::size_t size() const { return doc_terms_.size(); }
  double score(std::string_view query, std::size_t doc) const;
  std::vector<double> scores(std::string_view query) const;

 private:
  Bm25Params params_;
  std::vector<std::map<std::string, std::size_t>> doc_terms_;
  std::vector<std::size_t> doc_lens_;
  std::map<std::string, std::size_t> doc_freq_;
  double avg_len_ = 0.0;
};

}  // namespace agentcf
