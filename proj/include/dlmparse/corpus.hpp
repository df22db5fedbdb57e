// CoNLL-X treebank reading, writing and tree validation.
//
// Only columns 1-8 are modeled. FEATS (6) is ignored on read; FEATS, PHEAD and
// PDEPREL are written back as "_". Sentences may be non-projective or carry
// several root-attached tokens; validation checks treeness only.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dlmparse {

struct Token {
  int id = 0;
  std::string form;
  std::string lemma = "_";
  std::string cpos = "_";
  std::string pos = "_";
  int head = 0;  // 0 = artificial root
  std::string deprel = "_";

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  // 1-based access, matching CoNLL ids.
  const Token& at(int id) const { return tokens.at(static_cast<std::size_t>(id - 1)); }
  Token& at(int id) { return tokens.at(static_cast<std::size_t>(id - 1)); }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Treebank {
  std::vector<Sentence> sentences;
  std::string source_tag;

  std::size_t size() const noexcept { return sentences.size(); }

  // Provenance is not part of the data; equality compares sentences only.
  friend bool operator==(const Treebank& a, const Treebank& b) {
    return a.sentences == b.sentences;
  }
};

// Returns an empty string when `s` is a valid tree, else a description of the
// first violation found.
std::string tree_violation(const Sentence& s);

// Throws ValidationError carrying `index` when the sentence is not a tree.
void validate(const Sentence& s, std::size_t index = 0);

// Number of tokens attached to the artificial root.
std::size_t root_count(const Sentence& s);

// True iff no two arcs cross when drawn above the sentence, counting the
// root-0 arcs.
bool is_projective(const Sentence& s);

// Streaming reader: yields one validated sentence at a time so corpora never
// have to be fully resident.
class ConllReader {
 public:
  // With `heads_optional`, a HEAD of "_" reads as 0 so that unparsed text can
  // be fed to the parser.
  explicit ConllReader(std::istream& in, bool heads_optional = false, std::string source = "")
      : in_(in), heads_optional_(heads_optional), source_(std::move(source)) {}

  std::optional<Sentence> next();

  std::size_t sentences_read() const noexcept { return count_; }
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::istream& in_;
  bool heads_optional_ = false;
  std::string source_;  // file name used in error messages
  std::size_t line_ = 0;
  std::size_t count_ = 0;
};

Treebank read_conll(std::istream& in, const std::string& source = "");
Treebank read_conll_file(const std::string& path);

// Writes one sentence followed by a blank line.
void write_sentence(std::ostream& out, const Sentence& s);
void write_conll(std::ostream& out, const Treebank& tb);
void write_conll_file(const std::string& path, const Treebank& tb);

}  // namespace dlmparse
