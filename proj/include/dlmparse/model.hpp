// Linear model over hashed features and its versioned text container.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "dlmparse/dlm.hpp"
#include "dlmparse/features.hpp"
#include "dlmparse/transition.hpp"

namespace dlmparse {

inline constexpr int kModelFormatVersion = 1;

// Weights addressed by feature id, stored as one dense row of slots per
// 48-bit key so that all transitions of a configuration are scored with one
// lookup per template.
class SlotWeights {
 public:
  explicit SlotWeights(int slots = 1) : slots_(slots) {}

  int slots() const noexcept { return slots_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  // nullptr when the key has never been written.
  const double* row(std::uint64_t key48) const {
    auto it = rows_.find(key48);
    return it == rows_.end() ? nullptr : it->second.data();
  }
  double* mutable_row(std::uint64_t key48);

  double get(FeatureId id) const;
  void add(FeatureId id, double delta);
  void set(FeatureId id, double value);

  // Non-zero weights sorted by feature id.
  std::vector<std::pair<FeatureId, double>> nonzero() const;

  friend bool operator==(const SlotWeights& a, const SlotWeights& b) {
    return a.slots_ == b.slots_ && a.nonzero() == b.nonzero();
  }

 private:
  int slots_;
  std::unordered_map<std::uint64_t, std::vector<double>> rows_;
};

struct ModelConfig {
  int beam_width = 40;
  FeatureConfig features;
  UnitMode unit_mode = UnitMode::Form;
  std::string registry = std::string(kTemplateRegistryVersion);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct DlmManifestEntry {
  int order = 1;
  std::string digest;
  friend bool operator==(const DlmManifestEntry&, const DlmManifestEntry&) = default;
};

struct Model {
  ModelConfig config;
  LabelSet labels;
  SlotWeights weights;
  SlotWeights averaged;
  std::vector<DlmManifestEntry> dlm_manifest;

  Model() = default;
  Model(ModelConfig cfg, LabelSet label_set);

  int transitions() const noexcept { return transition_count(labels.size()); }

  friend bool operator==(const Model&, const Model&) = default;
};

// Manifest describing `ds`, in NO_DLM order.
std::vector<DlmManifestEntry> make_manifest(const DlmSet& ds);
// Throws ContractViolation naming the first mismatch between the model's
// manifest and the supplied DLMs.
void check_manifest(const Model& m, const DlmSet& ds);

// Sum of the weights of `fv`; absent ids contribute 0.
double score(const Model& m, const FeatureVector& fv, bool averaged);

void save_model(const Model& m, std::ostream& out);
Model load_model(std::istream& in);
void save_model_file(const Model& m, const std::string& path);
Model load_model_file(const std::string& path);

}  // namespace dlmparse
