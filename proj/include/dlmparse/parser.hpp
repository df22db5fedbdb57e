// Beam-search decoding and averaged structured-perceptron training with early
// update.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "dlmparse/corpus.hpp"
#include "dlmparse/features.hpp"
#include "dlmparse/model.hpp"
#include "dlmparse/transition.hpp"

namespace dlmparse {

struct BeamItem {
  Configuration config;
  std::vector<Transition> history;
  double score = 0.0;
};

struct DecodeResult {
  Sentence tree;
  BeamItem best;
};

// Scores of every transition index in `c` under `w`; entries of illegal
// transitions are left at 0 and must be masked by the caller.
std::vector<double> transition_scores(const SlotWeights& w, const Configuration& c,
                                      int num_labels, const DlmSet& ds, const FeatureConfig& cfg);

// Beam search over the arc-standard system. At each step every item is
// expanded with every legal transition, and the best `beam_width` candidates
// by cumulative score survive; equal scores keep their expansion order.
// `beam_width` <= 0 uses the model's configured beam.
DecodeResult decode(const Model& m, const Sentence& s, int beam_width, const DlmSet& ds,
                    bool averaged = true);

// Decodes every sentence of `input` on `threads` workers; output order follows
// input order and does not depend on `threads`.
std::vector<Sentence> decode_all(const Model& m, const std::vector<Sentence>& input,
                                 int beam_width, const DlmSet& ds, unsigned threads = 1);

// Feature counts summed along a transition sequence applied from initial(s).
std::map<FeatureId, double> sequence_features(const Model& m, const Sentence& s,
                                              const std::vector<Transition>& seq,
                                              const DlmSet& ds);
double sequence_score(const Model& m, const Sentence& s, const std::vector<Transition>& seq,
                      const DlmSet& ds, bool averaged);

struct EpochStats {
  int epoch = 0;
  std::size_t sentences = 0;
  std::size_t updates = 0;
  std::size_t early_updates = 0;
  std::size_t exact = 0;  // sentences whose top item was the gold sequence
  std::size_t correct_arcs = 0;  // labeled arcs of the top item, full parses only
  std::size_t total_arcs = 0;

  double exact_rate() const { return sentences ? 100.0 * exact / sentences : 0.0; }
};

struct TrainConfig {
  int beam_width = 40;
  int epochs = 10;
  std::uint64_t seed = 1;
  bool shuffle = true;
  FeatureConfig features;
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainReport {
  std::size_t used = 0;
  std::size_t skipped_nonprojective = 0;
  std::size_t skipped_multiroot = 0;
  std::vector<EpochStats> epochs;
};

// What one perceptron step did.
struct UpdateInfo {
  bool updated = false;
  bool early = false;
  std::size_t step = 0;  // length of the compared prefixes
  std::vector<Transition> gold;
  std::vector<Transition> predicted;
};

// Online trainer. Averaging is over instances: the averaged weights are the
// mean of the raw weights after each call to learn().
class Trainer {
 public:
  Trainer(LabelSet labels, const TrainConfig& cfg, const DlmSet& ds);

  // One early-update perceptron step on a projective, single-rooted sentence.
  UpdateInfo learn(const Sentence& s);

  // Current raw weights (averaged weights are not maintained until finalize).
  const Model& model() const noexcept { return model_; }
  std::size_t instances() const noexcept { return instances_; }

  Model finalize() const;

 private:
  void update(const Sentence& s, const std::vector<Transition>& gold,
              const std::vector<Transition>& predicted);

  TrainConfig cfg_;
  const DlmSet& ds_;
  Model model_;
  SlotWeights accum_;
  std::size_t instances_ = 0;
};

// Trains on every projective single-rooted sentence of `tb`; others are
// skipped and counted in `report`. Throws TrainingError when nothing usable
// remains.
Model train(const Treebank& tb, const TrainConfig& cfg, const DlmSet& ds,
            TrainReport* report = nullptr);

}  // namespace dlmparse
