// Attachment scores with punctuation exclusion, plus POS accuracy.
#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>

#include "dlmparse/corpus.hpp"

namespace dlmparse {

enum class PunctRule { GoldPos, UnicodeForm, None };
std::string_view to_string(PunctRule r);
PunctRule parse_punct_rule(std::string_view s);  // "gold-pos" | "unicode" | "none"

struct PunctConfig {
  PunctRule rule = PunctRule::GoldPos;
  // Gold fine POS tags treated as punctuation under PunctRule::GoldPos.
  std::set<std::string> tags = {"``", "''", ":", ",", "."};
};

// True iff `form` is valid UTF-8 and every code point is in a Unicode P*
// category.
bool is_unicode_punctuation(std::string_view form);

bool is_excluded(const Token& gold, const PunctConfig& punct);

// Percentage of num/den rounded half-up to two decimals; 100 when den == 0.
double percent(std::size_t num, std::size_t den);

struct EvalReport {
  double las = 100.0;
  double uas = 100.0;
  double pos_acc = 100.0;
  std::size_t scored_tokens = 0;
  std::size_t excluded_tokens = 0;
  std::size_t head_correct = 0;
  std::size_t labeled_correct = 0;
  std::size_t pos_correct = 0;
  PunctRule rule = PunctRule::GoldPos;

  std::size_t total_tokens() const noexcept { return scored_tokens + excluded_tokens; }
  // Single line of key=value pairs.
  std::string record() const;
  std::string text() const;
};

// Streaming accumulator; sentences are added pairwise in corpus order.
class Evaluator {
 public:
  explicit Evaluator(PunctConfig punct = {}) : punct_(std::move(punct)) {}

  // Throws AlignmentError when the pair differs in length or forms.
  void add(const Sentence& gold, const Sentence& pred);
  EvalReport report() const;
  std::size_t sentences() const noexcept { return sentences_; }

 private:
  PunctConfig punct_;
  std::size_t sentences_ = 0;
  EvalReport counts_;
};

EvalReport evaluate(const Treebank& gold, const Treebank& pred, const PunctConfig& punct = {});

}  // namespace dlmparse
