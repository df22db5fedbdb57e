// Corpus agreement filtering: keep the sentences on which two independent
// parses of the same text are identical.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dlmparse/corpus.hpp"

namespace dlmparse {

struct AgreementReport {
  std::size_t total = 0;
  std::size_t agreed = 0;
  double agreement_rate = 0.0;
  double mean_length_agreed = 0.0;
  double mean_length_all = 0.0;

  std::string record() const;
  std::string text() const;
};

// Heads (and labels when `labeled`) equal at every position. Throws
// AlignmentError carrying `index` when lengths or forms differ.
bool agree(const Sentence& a, const Sentence& b, bool labeled = true, std::size_t index = 0);

// Streaming form of filter().
class AgreementFilter {
 public:
  explicit AgreementFilter(bool labeled = true) : labeled_(labeled) {}

  bool offer(const Sentence& a, const Sentence& b);
  AgreementReport report() const;

 private:
  bool labeled_;
  std::size_t total_ = 0, agreed_ = 0, tokens_all_ = 0, tokens_agreed_ = 0;
};

struct FilterResult {
  Treebank kept;  // annotations taken from the first corpus
  AgreementReport report;
  std::vector<std::size_t> indices;  // positions of the kept sentences
};

FilterResult filter(const Treebank& parsed_a, const Treebank& parsed_b, bool labeled = true);

}  // namespace dlmparse
