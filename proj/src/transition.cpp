#include "dlmparse/transition.hpp"

#include <algorithm>
#include <set>

#include "dlmparse/error.hpp"

namespace dlmparse {

LabelSet::LabelSet(std::vector<std::string> labels) {
  for (auto& l : labels) add(l);
}

LabelSet LabelSet::from_treebank(const Treebank& tb) {
  std::set<std::string> seen;
  for (const auto& s : tb.sentences)
    for (const auto& t : s.tokens) seen.insert(t.deprel);
  return LabelSet(std::vector<std::string>(seen.begin(), seen.end()));
}

int LabelSet::add(const std::string& label) {
  auto [it, inserted] = index_.emplace(label, static_cast<int>(labels_.size()));
  if (inserted) labels_.push_back(label);
  return it->second;
}

int LabelSet::find(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

int LabelSet::id(const std::string& label) const {
  int i = find(label);
  if (i < 0) throw ContractViolation("unknown dependency label '" + label + "'");
  return i;
}

Transition Transition::from_index(int index) {
  if (index <= 0) return shift();
  return (index % 2 == 1) ? left((index - 1) / 2) : right((index - 2) / 2);
}

std::string to_string(const Transition& t, const LabelSet& labels) {
  switch (t.kind) {
    case TransitionKind::Shift: return "SHIFT";
    case TransitionKind::LeftArc: return "LEFT_ARC(" + labels.name(t.label) + ")";
    case TransitionKind::RightArc: return "RIGHT_ARC(" + labels.name(t.label) + ")";
  }
  return "?";
}

Configuration::Configuration(const Sentence& s)
    : sentence_(&s),
      n_(static_cast<int>(s.size())),
      stack_{0},
      heads_(s.size() + 1, -1),
      labels_(s.size() + 1, -1) {}

std::vector<int> Configuration::buffer() const {
  std::vector<int> out;
  for (int i = buffer_front_; i <= n_; ++i) out.push_back(i);
  return out;
}

std::vector<Arc> Configuration::arcs() const {
  std::vector<Arc> out;
  for (int d = 1; d <= n_; ++d)
    if (heads_[static_cast<std::size_t>(d)] >= 0)
      out.push_back({heads_[static_cast<std::size_t>(d)], d, labels_[static_cast<std::size_t>(d)]});
  return out;
}

int Configuration::leftmost_dependent(int token) const {
  for (int d = 1; d < token; ++d)
    if (heads_[static_cast<std::size_t>(d)] == token) return d;
  return -1;
}

int Configuration::rightmost_dependent(int token) const {
  for (int d = n_; d > token; --d)
    if (heads_[static_cast<std::size_t>(d)] == token) return d;
  return -1;
}

int Configuration::dependent_count(int token) const {
  return static_cast<int>(std::count(heads_.begin() + 1, heads_.end(), token));
}

bool Configuration::is_legal(const Transition& t) const {
  switch (t.kind) {
    case TransitionKind::Shift: return !buffer_empty();
    case TransitionKind::LeftArc: return stack_.size() >= 2 && stack_at(1) != 0;
    case TransitionKind::RightArc: return stack_.size() >= 2;
  }
  return false;
}

void Configuration::advance(const Transition& t) {
  if (!is_legal(t)) throw ContractViolation("illegal transition in current configuration");
  switch (t.kind) {
    case TransitionKind::Shift:
      stack_.push_back(buffer_front_++);
      break;
    case TransitionKind::LeftArc: {
      const int s0 = stack_at(0), s1 = stack_at(1);
      heads_[static_cast<std::size_t>(s1)] = s0;
      labels_[static_cast<std::size_t>(s1)] = t.label;
      stack_.erase(stack_.end() - 2);
      break;
    }
    case TransitionKind::RightArc: {
      const int s0 = stack_at(0), s1 = stack_at(1);
      heads_[static_cast<std::size_t>(s0)] = s1;
      labels_[static_cast<std::size_t>(s0)] = t.label;
      stack_.pop_back();
      break;
    }
  }
}

Configuration initial(const Sentence& s) { return Configuration(s); }

std::vector<TransitionKind> legal(const Configuration& c) {
  std::vector<TransitionKind> out;
  for (auto k : {TransitionKind::Shift, TransitionKind::LeftArc, TransitionKind::RightArc})
    if (c.is_legal({k, 0})) out.push_back(k);
  return out;
}

std::vector<Transition> legal_transitions(const Configuration& c, int num_labels) {
  std::vector<Transition> out;
  const int count = transition_count(num_labels);
  for (int i = 0; i < count; ++i) {
    auto t = Transition::from_index(i);
    if (c.is_legal(t)) out.push_back(t);
  }
  return out;
}

Configuration apply(const Configuration& c, const Transition& t) {
  Configuration next = c;
  next.advance(t);
  return next;
}

bool is_terminal(const Configuration& c) {
  return c.buffer_empty() && c.stack_height() == 1;
}

std::vector<Transition> oracle(const Sentence& s, const LabelSet& labels) {
  if (!is_projective(s)) throw OracleError("sentence is not projective");
  const int n = static_cast<int>(s.size());
  std::vector<int> gold_label(static_cast<std::size_t>(n) + 1, -1);
  std::vector<int> pending(static_cast<std::size_t>(n) + 1, 0);  // unattached gold dependents
  for (const auto& t : s.tokens) {
    gold_label[static_cast<std::size_t>(t.id)] = labels.find(t.deprel);
    if (gold_label[static_cast<std::size_t>(t.id)] < 0)
      throw OracleError("label '" + t.deprel + "' is not in the label set");
    ++pending[static_cast<std::size_t>(t.head)];
  }
  auto gold_head = [&](int tok) { return s.at(tok).head; };

  std::vector<Transition> seq;
  seq.reserve(2 * static_cast<std::size_t>(n));
  Configuration c(s);
  while (!is_terminal(c)) {
    Transition next = Transition::shift();
    if (c.stack_height() >= 2) {
      const int s0 = c.stack_at(0), s1 = c.stack_at(1);
      if (s1 != 0 && gold_head(s1) == s0) {
        next = Transition::left(gold_label[static_cast<std::size_t>(s1)]);
      } else if (gold_head(s0) == s1 && pending[static_cast<std::size_t>(s0)] == 0) {
        next = Transition::right(gold_label[static_cast<std::size_t>(s0)]);
      }
    }
    if (!c.is_legal(next)) throw OracleError("oracle reached a dead end");
    if (next.kind == TransitionKind::LeftArc) --pending[static_cast<std::size_t>(c.stack_at(0))];
    if (next.kind == TransitionKind::RightArc) --pending[static_cast<std::size_t>(c.stack_at(1))];
    c.advance(next);
    seq.push_back(next);
  }
  return seq;
}

Configuration replay(const Sentence& s, const std::vector<Transition>& seq) {
  Configuration c(s);
  for (const auto& t : seq) c.advance(t);
  return c;
}

Sentence to_tree(const Configuration& c, const LabelSet& labels) {
  Sentence out = c.sentence();
  for (auto& t : out.tokens) {
    const int h = c.head(t.id);
    t.head = h < 0 ? 0 : h;
    t.deprel = h < 0 ? "_" : labels.name(c.label(t.id));
  }
  return out;
}

}  // namespace dlmparse
