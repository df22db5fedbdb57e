// Head-outward generative grammar producing projective, single-rooted,
// labeled trees over a small synthetic lexicon.
//
//   ROOT -> VB
//   VB   left (outward):  [RB advmod p=.2] NP nsubj
//        right (outward): [NP dobj if transitive] [PP prep]{0..2} [RB advmod p=.15] [. punct p=.9]
//   NN   left (outward):  [JJ amod]{0..2} [DT det p=.7]
//        right:           [PP prep p=.3, depth < 2]
//   IN   right:           NP pobj
//
// Every verb and noun selects a fixed subset of three prepositions, and the PPs
// it generates are headed by one of them, so prepositional attachment is
// lexically conditioned: the word pair decides it, the POS sequence does not.
// The lexicon is fixed; only sentence generation consumes randomness.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dlmparse/corpus.hpp"

namespace dlmparse {

struct GrammarOptions {
  int nouns = 60;
  int verbs = 30;
  int adjectives = 20;
  int determiners = 4;
  int prepositions = 10;
  int adverbs = 10;
};

class SyntheticGrammar {
 public:
  explicit SyntheticGrammar(GrammarOptions opts = {});

  Sentence generate(std::mt19937_64& rng) const;
  Treebank generate(std::size_t count, std::uint64_t seed) const;

  // Prepositions selected by verb `v` / noun `n` (indices into the lexicon).
  const std::vector<int>& verb_preps(int v) const { return verb_preps_.at(static_cast<std::size_t>(v)); }
  const std::vector<int>& noun_preps(int n) const { return noun_preps_.at(static_cast<std::size_t>(n)); }
  bool transitive(int v) const { return transitive_.at(static_cast<std::size_t>(v)); }

 private:
  struct Node;

  GrammarOptions opts_;
  std::vector<std::vector<int>> verb_preps_, noun_preps_;
  std::vector<bool> transitive_;
};

}  // namespace dlmparse
