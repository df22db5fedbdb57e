// Sparse hashed features for (configuration, transition) pairs.
//
// A feature id is 64 bits: the upper 48 bits hash a template id together
// with its values, the lower 16 bits hold a slot that conjoins the feature
// with the decision being scored. Baseline templates use the transition index
// as slot, so every baseline template is conjoined with the full transition.
// The DLM templates carry the dependency label instead (0 for SHIFT, 1 + l for
// label l), since the label is one of their values.
//
// Baseline atoms: word/POS of s0, s1, s2, b0, b1, b2; POS of the leftmost and
// rightmost attached dependents of s0 and s1; dependent-count buckets of s0 and
// s1 (0, 1, 2, 3+); s0-s1 distance bucket (1..4, 5+). Missing positions take
// "<NONE>", the artificial root takes "<ROOT>". The full and words-only
// template lists live in features.cpp.
//
// DLM templates, per table NO in the DLM set and with phi0/phi1 the bucket
// classes of s0/s1:
//   <NO, phi0, phi1, label>
//   <NO, phi0, phi1, label, s0_pos>
//   <NO, phi0, phi1, label, s0_word>
//   <NO, phi0, phi1, label, s1_pos>
//   <NO, phi0, phi1, label, s1_word>
//   <NO, phi0, phi1, label, s0_pos, s1_pos>
//   <NO, phi0, phi1, label, s0_word, s1_word>
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dlmparse/dlm.hpp"
#include "dlmparse/transition.hpp"

namespace dlmparse {

using FeatureId = std::uint64_t;

inline constexpr int kSlotBits = 16;
inline constexpr std::uint64_t kSlotMask = (std::uint64_t{1} << kSlotBits) - 1;
inline constexpr int kDlmTemplatesPerTable = 7;

constexpr FeatureId make_feature_id(std::uint64_t key48, int slot) noexcept {
  return (key48 << kSlotBits) | (static_cast<std::uint64_t>(slot) & kSlotMask);
}
constexpr std::uint64_t feature_key(FeatureId id) noexcept { return id >> kSlotBits; }
constexpr int feature_slot(FeatureId id) noexcept { return static_cast<int>(id & kSlotMask); }

// Slot of the DLM templates for a transition.
constexpr int label_slot(const Transition& t) noexcept {
  return t.kind == TransitionKind::Shift ? 0 : 1 + t.label;
}

struct FeatureVector {
  std::vector<FeatureId> ids;  // sorted, unique

  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }
  void normalize();
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector merge(const FeatureVector& a, const FeatureVector& b);

enum class TemplateSet : std::uint8_t { Full, WordsOnly };
std::string_view to_string(TemplateSet t);
TemplateSet parse_template_set(std::string_view s);

struct FeatureConfig {
  TemplateSet templates = TemplateSet::Full;
  bool dlm_on_shift = true;
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

// Registry version written into model files; bump when any template changes.
inline constexpr std::string_view kTemplateRegistryVersion = "templates-v1";

// Ordered DLM tables; the position of a table is its NO_DLM index.
class DlmSet {
 public:
  DlmSet() = default;
  // Throws ContractViolation when two tables share an order.
  explicit DlmSet(std::vector<std::shared_ptr<const DlmTable>> tables);

  std::size_t size() const noexcept { return tables_.size(); }
  bool empty() const noexcept { return tables_.empty(); }
  const DlmTable& operator[](std::size_t i) const { return *tables_[i]; }
  const std::vector<std::shared_ptr<const DlmTable>>& tables() const noexcept { return tables_; }

 private:
  std::vector<std::shared_ptr<const DlmTable>> tables_;
};

// Records the canonical text behind every 48-bit key it sees and counts keys
// that were produced by two different texts.
class FeatureAudit {
 public:
  void record(std::uint64_t key48, std::string canonical);
  std::size_t distinct() const noexcept { return seen_.size(); }
  std::size_t collisions() const noexcept { return collisions_; }

 private:
  std::unordered_map<std::uint64_t, std::string> seen_;
  std::size_t collisions_ = 0;
};

// Transition-independent baseline keys for `c` (one per template).
std::vector<std::uint64_t> baseline_keys(const Configuration& c, TemplateSet templates,
                                         FeatureAudit* audit = nullptr);

// Transition-independent DLM keys, grouped by the decision they apply to.
// Each non-empty group holds 7 * |ds| keys. `left`/`right` are empty when
// the move is illegal; `shift` is empty when SHIFT is illegal or DLM features
// are disabled on SHIFT.
struct DlmKeys {
  std::vector<std::uint64_t> shift, left, right;
};
DlmKeys dlm_keys(const Configuration& c, const DlmSet& ds, const FeatureConfig& cfg,
                 FeatureAudit* audit = nullptr);

FeatureVector baseline_features(const Configuration& c, const Transition& t,
                                TemplateSet templates = TemplateSet::Full);

// Bucket class of `token` under `d`. The head is `overlay_head` when given,
// else the head already assigned in `c`; PU when there is none (or when
// token < 0, i.e. an empty stack slot).
BucketClass dlm_class(const Configuration& c, int token, const DlmTable& d,
                      std::optional<int> overlay_head = std::nullopt);

FeatureVector dlm_features(const Configuration& c, const Transition& t, const DlmSet& ds,
                           const FeatureConfig& cfg = {});

// Baseline plus DLM features.
FeatureVector features(const Configuration& c, const Transition& t, const DlmSet& ds,
                       const FeatureConfig& cfg = {});

}  // namespace dlmparse
