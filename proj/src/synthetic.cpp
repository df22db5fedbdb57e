#include "dlmparse/synthetic.hpp"

#include <algorithm>
#include <functional>
#include <memory>

namespace dlmparse {

namespace {

std::vector<int> select_preps(int index, int salt, int prepositions) {
  std::vector<int> out;
  for (int k = 0; out.size() < 3 && k < 64; ++k) {
    const int p = static_cast<int>((static_cast<unsigned>(index) * 7u + static_cast<unsigned>(salt) +
                                    static_cast<unsigned>(k) * 3u + static_cast<unsigned>(k * k)) %
                                   static_cast<unsigned>(prepositions));
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

int uniform(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

bool coin(std::mt19937_64& rng, double p) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

}  // namespace

// Subtree under construction; dependents are listed outward from the head.
struct SyntheticGrammar::Node {
  std::string form, pos, deprel;
  std::vector<std::unique_ptr<Node>> left, right;
};

SyntheticGrammar::SyntheticGrammar(GrammarOptions opts) : opts_(opts) {
  for (int v = 0; v < opts_.verbs; ++v) {
    verb_preps_.push_back(select_preps(v, 1, opts_.prepositions));
    transitive_.push_back(v % 10 < 7);
  }
  for (int n = 0; n < opts_.nouns; ++n) noun_preps_.push_back(select_preps(n, 4, opts_.prepositions));
}

Sentence SyntheticGrammar::generate(std::mt19937_64& rng) const {
  using NodePtr = std::unique_ptr<Node>;
  auto leaf = [](std::string form, std::string pos, std::string deprel) {
    auto n = std::make_unique<Node>();
    n->form = std::move(form);
    n->pos = std::move(pos);
    n->deprel = std::move(deprel);
    return n;
  };

  std::function<NodePtr(const std::string&, int)> noun_phrase;
  auto prep_phrase = [&](int prep, int depth) {
    auto p = leaf("p" + std::to_string(prep), "IN", "prep");
    p->right.push_back(noun_phrase("pobj", depth + 1));
    return p;
  };
  noun_phrase = [&](const std::string& deprel, int depth) {
    const int noun = uniform(rng, opts_.nouns);
    auto n = leaf("n" + std::to_string(noun), "NN", deprel);
    if (coin(rng, 0.4)) {
      n->left.push_back(leaf("a" + std::to_string(uniform(rng, opts_.adjectives)), "JJ", "amod"));
      if (coin(rng, 0.35))
        n->left.push_back(leaf("a" + std::to_string(uniform(rng, opts_.adjectives)), "JJ", "amod"));
    }
    if (coin(rng, 0.7))
      n->left.push_back(leaf("d" + std::to_string(uniform(rng, opts_.determiners)), "DT", "det"));
    if (depth < 2 && coin(rng, 0.3)) {
      const auto& preps = noun_preps_[static_cast<std::size_t>(noun)];
      n->right.push_back(prep_phrase(preps[static_cast<std::size_t>(uniform(rng, 3))], depth));
    }
    return n;
  };

  const int verb = uniform(rng, opts_.verbs);
  auto root = leaf("v" + std::to_string(verb), "VB", "root");
  if (coin(rng, 0.2))
    root->left.push_back(leaf("r" + std::to_string(uniform(rng, opts_.adverbs)), "RB", "advmod"));
  root->left.push_back(noun_phrase("nsubj", 0));
  if (transitive_[static_cast<std::size_t>(verb)]) root->right.push_back(noun_phrase("dobj", 0));
  const auto& preps = verb_preps_[static_cast<std::size_t>(verb)];
  if (coin(rng, 0.5)) {
    root->right.push_back(prep_phrase(preps[static_cast<std::size_t>(uniform(rng, 3))], 0));
    if (coin(rng, 0.5))
      root->right.push_back(prep_phrase(preps[static_cast<std::size_t>(uniform(rng, 3))], 0));
  }
  if (coin(rng, 0.15))
    root->right.push_back(leaf("r" + std::to_string(uniform(rng, opts_.adverbs)), "RB", "advmod"));
  if (coin(rng, 0.9)) root->right.push_back(leaf(".", ".", "punct"));

  // Linearize: left dependents were generated outward, so emit them reversed.
  std::function<int(const Node&)> subtree_size = [&](const Node& node) {
    int size = 1;
    for (const auto& c : node.left) size += subtree_size(*c);
    for (const auto& c : node.right) size += subtree_size(*c);
    return size;
  };
  Sentence s;
  std::function<void(const Node&, int)> emit = [&](const Node& node, int head) {
    int id = static_cast<int>(s.tokens.size()) + 1;
    for (const auto& c : node.left) id += subtree_size(*c);
    for (auto it = node.left.rbegin(); it != node.left.rend(); ++it) emit(**it, id);
    Token t;
    t.id = id;
    t.form = node.form;
    t.cpos = node.pos;
    t.pos = node.pos;
    t.head = head;
    t.deprel = node.deprel;
    s.tokens.push_back(std::move(t));
    for (const auto& r : node.right) emit(*r, id);
  };
  emit(*root, 0);
  return s;
}

Treebank SyntheticGrammar::generate(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Treebank tb;
  tb.source_tag = "synthetic:seed=" + std::to_string(seed);
  tb.sentences.reserve(count);
  for (std::size_t i = 0; i < count; ++i) tb.sentences.push_back(generate(rng));
  return tb;
}

}  // namespace dlmparse
