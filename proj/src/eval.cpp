#include "dlmparse/eval.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <utility>

#include "dlmparse/error.hpp"

namespace dlmparse {

namespace {

constexpr std::pair<char32_t, char32_t> kPunctRanges[] = {
#include "unicode_punct.inc"
};

bool in_punct_table(char32_t cp) {
  auto it = std::upper_bound(std::begin(kPunctRanges), std::end(kPunctRanges), cp,
                             [](char32_t v, const auto& r) { return v < r.first; });
  if (it == std::begin(kPunctRanges)) return false;
  --it;
  return cp <= it->second;
}

// Decodes one code point at `i`, advancing it; returns false on bad UTF-8.
bool next_code_point(std::string_view s, std::size_t& i, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int extra = 0;
  if (b0 < 0x80) { cp = b0; extra = 0; }
  else if ((b0 & 0xE0) == 0xC0) { cp = b0 & 0x1F; extra = 1; }
  else if ((b0 & 0xF0) == 0xE0) { cp = b0 & 0x0F; extra = 2; }
  else if ((b0 & 0xF8) == 0xF0) { cp = b0 & 0x07; extra = 3; }
  else return false;
  if (i + static_cast<std::size_t>(extra) >= s.size()) return false;
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b & 0xC0) != 0x80) return false;
    cp = (cp << 6) | (b & 0x3F);
  }
  i += 1 + static_cast<std::size_t>(extra);
  return true;
}

}  // namespace

std::string_view to_string(PunctRule r) {
  switch (r) {
    case PunctRule::GoldPos: return "gold-pos";
    case PunctRule::UnicodeForm: return "unicode";
    case PunctRule::None: return "none";
  }
  return "?";
}

PunctRule parse_punct_rule(std::string_view s) {
  if (s == "gold-pos") return PunctRule::GoldPos;
  if (s == "unicode") return PunctRule::UnicodeForm;
  if (s == "none") return PunctRule::None;
  throw ContractViolation("unknown punctuation rule '" + std::string(s) + "'");
}

bool is_unicode_punctuation(std::string_view form) {
  if (form.empty()) return false;
  std::size_t i = 0;
  while (i < form.size()) {
    char32_t cp = 0;
    if (!next_code_point(form, i, cp) || !in_punct_table(cp)) return false;
  }
  return true;
}

bool is_excluded(const Token& gold, const PunctConfig& punct) {
  switch (punct.rule) {
    case PunctRule::GoldPos: return punct.tags.count(gold.pos) > 0;
    case PunctRule::UnicodeForm: return is_unicode_punctuation(gold.form);
    case PunctRule::None: return false;
  }
  return false;
}

double percent(std::size_t num, std::size_t den) {
  if (den == 0) return 100.0;
  const std::uint64_t hundredths = (20000ULL * num + den) / (2ULL * den);
  return static_cast<double>(hundredths) / 100.0;
}

std::string EvalReport::record() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "las=%.2f uas=%.2f pos_acc=%.2f scored=%zu excluded=%zu total=%zu punct=%s", las,
                uas, pos_acc, scored_tokens, excluded_tokens, total_tokens(),
                std::string(to_string(rule)).c_str());
  return buf;
}

std::string EvalReport::text() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "  Labeled   attachment score: %zu / %zu * 100 = %.2f %%\n"
                "  Unlabeled attachment score: %zu / %zu * 100 = %.2f %%\n"
                "  POS accuracy (all tokens):  %zu / %zu * 100 = %.2f %%\n"
                "  Excluded tokens (punctuation rule %s): %zu\n",
                labeled_correct, scored_tokens, las, head_correct, scored_tokens, uas,
                pos_correct, total_tokens(), pos_acc, std::string(to_string(rule)).c_str(),
                excluded_tokens);
  return buf;
}

void Evaluator::add(const Sentence& gold, const Sentence& pred) {
  const std::size_t index = sentences_++;
  if (gold.size() != pred.size())
    throw AlignmentError(index, "gold has " + std::to_string(gold.size()) +
                                    " tokens, prediction has " + std::to_string(pred.size()));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Token& g = gold.tokens[i];
    const Token& p = pred.tokens[i];
    if (g.form != p.form)
      throw AlignmentError(index, "token " + std::to_string(i + 1) + " form differs ('" + g.form +
                                      "' vs '" + p.form + "')");
    counts_.pos_correct += g.pos == p.pos ? 1 : 0;
    if (is_excluded(g, punct_)) {
      ++counts_.excluded_tokens;
      continue;
    }
    ++counts_.scored_tokens;
    if (g.head == p.head) {
      ++counts_.head_correct;
      if (g.deprel == p.deprel) ++counts_.labeled_correct;
    }
  }
}

EvalReport Evaluator::report() const {
  EvalReport r = counts_;
  r.rule = punct_.rule;
  r.las = percent(r.labeled_correct, r.scored_tokens);
  r.uas = percent(r.head_correct, r.scored_tokens);
  r.pos_acc = percent(r.pos_correct, r.total_tokens());
  return r;
}

EvalReport evaluate(const Treebank& gold, const Treebank& pred, const PunctConfig& punct) {
  if (gold.size() != pred.size())
    throw AlignmentError(std::min(gold.size(), pred.size()),
                         "gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                             std::to_string(pred.size()));
  Evaluator ev(punct);
  for (std::size_t i = 0; i < gold.size(); ++i) ev.add(gold.sentences[i], pred.sentences[i]);
  return ev.report();
}

}  // namespace dlmparse
