#include "dlmparse/agreement.hpp"

#include <algorithm>
#include <cstdio>

#include "dlmparse/error.hpp"

namespace dlmparse {

std::string AgreementReport::record() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "total=%zu agreed=%zu agreement_rate=%.4f mean_length_agreed=%.2f "
                "mean_length_all=%.2f",
                total, agreed, agreement_rate, mean_length_agreed, mean_length_all);
  return buf;
}

std::string AgreementReport::text() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "  %zu of %zu sentences agree (%.2f %%)\n"
                "  mean length: agreed %.2f tokens, all %.2f tokens\n",
                agreed, total, 100.0 * agreement_rate, mean_length_agreed, mean_length_all);
  return buf;
}

bool agree(const Sentence& a, const Sentence& b, bool labeled, std::size_t index) {
  if (a.size() != b.size())
    throw AlignmentError(index, "token counts differ (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Token& x = a.tokens[i];
    const Token& y = b.tokens[i];
    if (x.form != y.form)
      throw AlignmentError(index, "token " + std::to_string(i + 1) + " form differs ('" + x.form +
                                      "' vs '" + y.form + "')");
    if (x.head != y.head || (labeled && x.deprel != y.deprel)) same = false;
  }
  return same;
}

bool AgreementFilter::offer(const Sentence& a, const Sentence& b) {
  const bool ok = agree(a, b, labeled_, total_);
  ++total_;
  tokens_all_ += a.size();
  if (ok) {
    ++agreed_;
    tokens_agreed_ += a.size();
  }
  return ok;
}

AgreementReport AgreementFilter::report() const {
  AgreementReport r;
  r.total = total_;
  r.agreed = agreed_;
  r.agreement_rate = total_ ? static_cast<double>(agreed_) / static_cast<double>(total_) : 0.0;
  r.mean_length_agreed =
      agreed_ ? static_cast<double>(tokens_agreed_) / static_cast<double>(agreed_) : 0.0;
  r.mean_length_all = total_ ? static_cast<double>(tokens_all_) / static_cast<double>(total_) : 0.0;
  return r;
}

FilterResult filter(const Treebank& parsed_a, const Treebank& parsed_b, bool labeled) {
  if (parsed_a.size() != parsed_b.size())
    throw AlignmentError(std::min(parsed_a.size(), parsed_b.size()),
                         "corpora have " + std::to_string(parsed_a.size()) + " and " +
                             std::to_string(parsed_b.size()) + " sentences");
  FilterResult out;
  out.kept.source_tag = parsed_a.source_tag;
  AgreementFilter f(labeled);
  for (std::size_t i = 0; i < parsed_a.size(); ++i) {
    if (f.offer(parsed_a.sentences[i], parsed_b.sentences[i])) {
      out.kept.sentences.push_back(parsed_a.sentences[i]);
      out.indices.push_back(i);
    }
  }
  out.report = f.report();
  return out;
}

}  // namespace dlmparse
