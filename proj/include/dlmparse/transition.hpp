// Labeled arc-standard transition system.
//
//   SHIFT         moves the buffer front onto the stack.
//   LEFT_ARC(l)   adds s0 -l-> s1 and removes s1; illegal when s1 is the root.
//   RIGHT_ARC(l)  adds s1 -l-> s0 and pops s0.
//
// A sentence of n tokens is always parsed in exactly 2n transitions.
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dlmparse/corpus.hpp"

namespace dlmparse {

// Dependency label alphabet. Ids are dense, assigned in insertion order.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  // Sorted, de-duplicated DEPREL values of a treebank.
  static LabelSet from_treebank(const Treebank& tb);

  int add(const std::string& label);
  // -1 when absent.
  int find(const std::string& label) const;
  int id(const std::string& label) const;  // throws ContractViolation when absent
  const std::string& name(int id) const { return labels_.at(static_cast<std::size_t>(id)); }
  int size() const noexcept { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& names() const noexcept { return labels_; }

  friend bool operator==(const LabelSet& a, const LabelSet& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

enum class TransitionKind : std::uint8_t { Shift, LeftArc, RightArc };

struct Transition {
  TransitionKind kind = TransitionKind::Shift;
  int label = -1;  // -1 for SHIFT

  static Transition shift() { return {}; }
  static Transition left(int label) { return {TransitionKind::LeftArc, label}; }
  static Transition right(int label) { return {TransitionKind::RightArc, label}; }

  // Dense index: SHIFT = 0, LEFT_ARC(l) = 1 + 2l, RIGHT_ARC(l) = 2 + 2l.
  int index() const noexcept {
    return kind == TransitionKind::Shift ? 0 : (kind == TransitionKind::LeftArc ? 1 : 2) + 2 * label;
  }
  static Transition from_index(int index);

  friend bool operator==(const Transition&, const Transition&) = default;
};

inline int transition_count(int num_labels) { return 1 + 2 * num_labels; }

std::string to_string(const Transition& t, const LabelSet& labels);

struct Arc {
  int head;
  int dependent;
  int label;
  friend bool operator==(const Arc&, const Arc&) = default;
};

// Parser state. The buffer is the contiguous suffix [buffer_front, n] of the
// sentence; heads/labels of unattached tokens are -1.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(const Sentence& s);

  const Sentence& sentence() const noexcept { return *sentence_; }
  int size() const noexcept { return n_; }

  const std::vector<int>& stack() const noexcept { return stack_; }
  std::size_t stack_height() const noexcept { return stack_.size(); }
  // i-th element from the top (0 = s0); -1 when absent.
  int stack_at(std::size_t i) const noexcept {
    return i < stack_.size() ? stack_[stack_.size() - 1 - i] : -1;
  }
  std::vector<int> buffer() const;
  bool buffer_empty() const noexcept { return buffer_front_ > n_; }
  // i-th buffer element (0 = b0); -1 when absent.
  int buffer_at(int i) const noexcept {
    return buffer_front_ + i <= n_ ? buffer_front_ + i : -1;
  }

  int head(int token) const noexcept { return heads_[static_cast<std::size_t>(token)]; }
  int label(int token) const noexcept { return labels_[static_cast<std::size_t>(token)]; }
  // Arcs ordered by dependent.
  std::vector<Arc> arcs() const;

  // Leftmost / rightmost attached dependent of `token`, -1 if none.
  int leftmost_dependent(int token) const;
  int rightmost_dependent(int token) const;
  int dependent_count(int token) const;

  bool is_legal(const Transition& t) const;
  // Mutating application; throws ContractViolation on an illegal move.
  void advance(const Transition& t);

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.sentence_ == b.sentence_ && a.stack_ == b.stack_ &&
           a.buffer_front_ == b.buffer_front_ && a.heads_ == b.heads_ && a.labels_ == b.labels_;
  }

 private:
  const Sentence* sentence_ = nullptr;
  int n_ = 0;
  std::vector<int> stack_;
  int buffer_front_ = 1;
  std::vector<int> heads_;   // index 0 unused
  std::vector<int> labels_;
};

Configuration initial(const Sentence& s);

// Transition kinds permitted in `c` (labels are free for arc kinds).
std::vector<TransitionKind> legal(const Configuration& c);
// Every fully labeled legal transition, in index order.
std::vector<Transition> legal_transitions(const Configuration& c, int num_labels);

// Value-semantics application; the input is left untouched.
Configuration apply(const Configuration& c, const Transition& t);

bool is_terminal(const Configuration& c);

// Static oracle. Requires a projective tree whose labels are all in `labels`;
// throws OracleError otherwise.
std::vector<Transition> oracle(const Sentence& s, const LabelSet& labels);

// Runs `seq` from initial(s); throws ContractViolation on an illegal move.
Configuration replay(const Sentence& s, const std::vector<Transition>& seq);

// Copy of `c.sentence()` with HEAD/DEPREL replaced by the configuration's
// arcs. Unattached tokens (only possible before termination) get head 0.
Sentence to_tree(const Configuration& c, const LabelSet& labels);

}  // namespace dlmparse
