#include "dlmparse/parser.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <thread>

#include "dlmparse/error.hpp"

namespace dlmparse {

namespace {

struct Candidate {
  std::size_t parent;
  Transition transition;
  double score;
  bool gold;
};

struct SearchState {
  std::vector<BeamItem> beam;
  std::vector<bool> gold;  // parallel to beam
};

struct SearchResult {
  std::vector<BeamItem> beam;  // best first
  bool best_is_gold = false;
  bool gold_fell_out = false;
  std::size_t steps = 0;  // transitions applied to the surviving items
};

// Beam search. When `gold` is given, stops right after the step at which no
// surviving item follows it any more.
SearchResult search(const SlotWeights& w, int num_labels, const Sentence& s, int beam_width,
                    const DlmSet& ds, const FeatureConfig& cfg,
                    const std::vector<Transition>* gold) {
  if (num_labels < 1) throw ContractViolation("model has an empty label alphabet");
  const std::size_t width = static_cast<std::size_t>(std::max(1, beam_width));
  SearchState state;
  state.beam.push_back({Configuration(s), {}, 0.0});
  state.gold.push_back(gold != nullptr);

  const std::size_t total_steps = 2 * s.size();
  std::vector<Candidate> cands;
  for (std::size_t step = 0; step < total_steps; ++step) {
    cands.clear();
    for (std::size_t i = 0; i < state.beam.size(); ++i) {
      const BeamItem& item = state.beam[i];
      const auto scores = transition_scores(w, item.config, num_labels, ds, cfg);
      for (int t = 0; t < static_cast<int>(scores.size()); ++t) {
        const Transition tr = Transition::from_index(t);
        if (!item.config.is_legal(tr)) continue;
        const bool on_gold = state.gold[i] && (*gold)[step] == tr;
        cands.push_back({i, tr, item.score + scores[static_cast<std::size_t>(t)], on_gold});
      }
    }
    const std::size_t keep = std::min(width, cands.size());
    // Candidates are generated in insertion order; ties keep that order.
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    SearchState next;
    next.beam.reserve(keep);
    bool gold_alive = false;
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& c = cands[k];
      BeamItem item = state.beam[c.parent];
      item.config.advance(c.transition);
      item.history.push_back(c.transition);
      item.score = c.score;
      next.beam.push_back(std::move(item));
      next.gold.push_back(c.gold);
      gold_alive = gold_alive || c.gold;
    }
    state = std::move(next);
    if (gold && !gold_alive) {
      SearchResult r;
      r.beam = std::move(state.beam);
      r.gold_fell_out = true;
      r.steps = step + 1;
      return r;
    }
  }
  SearchResult r;
  r.best_is_gold = !state.gold.empty() && state.gold.front();
  r.beam = std::move(state.beam);
  r.steps = total_steps;
  return r;
}

void add_step_features(std::map<FeatureId, double>& acc, const Configuration& c,
                       const Transition& t, const DlmSet& ds, const FeatureConfig& cfg,
                       double sign) {
  for (auto k : baseline_keys(c, cfg.templates)) acc[make_feature_id(k, t.index())] += sign;
  if (ds.empty()) return;
  const DlmKeys keys = dlm_keys(c, ds, cfg);
  const auto& group = t.kind == TransitionKind::Shift
                          ? keys.shift
                          : (t.kind == TransitionKind::LeftArc ? keys.left : keys.right);
  for (auto k : group) acc[make_feature_id(k, label_slot(t))] += sign;
}

void accumulate_suffix(std::map<FeatureId, double>& acc, Configuration c,
                       const std::vector<Transition>& seq, std::size_t from, const DlmSet& ds,
                       const FeatureConfig& cfg, double sign) {
  for (std::size_t i = from; i < seq.size(); ++i) {
    add_step_features(acc, c, seq[i], ds, cfg, sign);
    c.advance(seq[i]);
  }
}

}  // namespace

std::vector<double> transition_scores(const SlotWeights& w, const Configuration& c,
                                      int num_labels, const DlmSet& ds, const FeatureConfig& cfg) {
  const int count = transition_count(num_labels);
  std::vector<double> scores(static_cast<std::size_t>(count), 0.0);
  const int slots = std::min(count, w.slots());
  for (auto key : baseline_keys(c, cfg.templates)) {
    if (const double* row = w.row(key))
      for (int t = 0; t < slots; ++t) scores[static_cast<std::size_t>(t)] += row[t];
  }
  if (ds.empty()) return scores;
  const DlmKeys keys = dlm_keys(c, ds, cfg);
  for (auto key : keys.shift)
    if (const double* row = w.row(key)) scores[0] += row[0];
  for (auto key : keys.left)
    if (const double* row = w.row(key))
      for (int l = 0; l < num_labels && 1 + l < w.slots(); ++l)
        scores[static_cast<std::size_t>(1 + 2 * l)] += row[1 + l];
  for (auto key : keys.right)
    if (const double* row = w.row(key))
      for (int l = 0; l < num_labels && 1 + l < w.slots(); ++l)
        scores[static_cast<std::size_t>(2 + 2 * l)] += row[1 + l];
  return scores;
}

DecodeResult decode(const Model& m, const Sentence& s, int beam_width, const DlmSet& ds,
                    bool averaged) {
  if (beam_width <= 0) beam_width = m.config.beam_width;
  auto r = search(averaged ? m.averaged : m.weights, m.labels.size(), s, beam_width, ds,
                  m.config.features, nullptr);
  DecodeResult out;
  out.best = std::move(r.beam.front());
  out.tree = to_tree(out.best.config, m.labels);
  return out;
}

std::vector<Sentence> decode_all(const Model& m, const std::vector<Sentence>& input,
                                 int beam_width, const DlmSet& ds, unsigned threads) {
  std::vector<Sentence> out(input.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(input.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < input.size(); i = next++)
      out[i] = decode(m, input[i], beam_width, ds).tree;
  };
  if (threads <= 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

std::map<FeatureId, double> sequence_features(const Model& m, const Sentence& s,
                                              const std::vector<Transition>& seq,
                                              const DlmSet& ds) {
  std::map<FeatureId, double> acc;
  accumulate_suffix(acc, Configuration(s), seq, 0, ds, m.config.features, 1.0);
  return acc;
}

double sequence_score(const Model& m, const Sentence& s, const std::vector<Transition>& seq,
                      const DlmSet& ds, bool averaged) {
  const SlotWeights& w = averaged ? m.averaged : m.weights;
  double total = 0.0;
  for (const auto& [id, count] : sequence_features(m, s, seq, ds)) total += count * w.get(id);
  return total;
}

Trainer::Trainer(LabelSet labels, const TrainConfig& cfg, const DlmSet& ds)
    : cfg_(cfg), ds_(ds) {
  if (cfg.beam_width < 1) throw ContractViolation("beam width must be >= 1");
  ModelConfig mc;
  mc.beam_width = cfg.beam_width;
  mc.features = cfg.features;
  if (!ds.empty()) mc.unit_mode = ds[0].unit_mode();
  model_ = Model(mc, std::move(labels));
  model_.dlm_manifest = make_manifest(ds);
  accum_ = SlotWeights(model_.transitions());
}

UpdateInfo Trainer::learn(const Sentence& s) {
  ++instances_;
  UpdateInfo info;
  info.gold = oracle(s, model_.labels);
  auto r = search(model_.weights, model_.labels.size(), s, cfg_.beam_width, ds_,
                  cfg_.features, &info.gold);
  if (r.gold_fell_out) {
    info.updated = info.early = true;
    info.step = r.steps;
    info.gold.resize(r.steps);
    info.predicted = r.beam.front().history;
  } else if (!r.best_is_gold) {
    info.updated = true;
    info.step = r.steps;
    info.predicted = r.beam.front().history;
  } else {
    info.step = r.steps;
    info.predicted = info.gold;
  }
  if (info.updated) update(s, info.gold, info.predicted);
  return info;
}

void Trainer::update(const Sentence& s, const std::vector<Transition>& gold,
                     const std::vector<Transition>& predicted) {
  std::size_t shared = 0;
  while (shared < gold.size() && shared < predicted.size() && gold[shared] == predicted[shared])
    ++shared;
  Configuration c(s);
  for (std::size_t i = 0; i < shared; ++i) c.advance(gold[i]);
  std::map<FeatureId, double> delta;
  accumulate_suffix(delta, c, gold, shared, ds_, cfg_.features, 1.0);
  accumulate_suffix(delta, c, predicted, shared, ds_, cfg_.features, -1.0);
  const double age = static_cast<double>(instances_ - 1);
  for (const auto& [id, d] : delta) {
    if (d == 0.0) continue;
    model_.weights.add(id, d);
    accum_.add(id, age * d);
  }
}

Model Trainer::finalize() const {
  Model out = model_;
  out.averaged = SlotWeights(model_.transitions());
  if (instances_ == 0) return out;
  const double n = static_cast<double>(instances_);
  for (const auto& [id, w] : model_.weights.nonzero()) out.averaged.set(id, w - accum_.get(id) / n);
  for (const auto& [id, u] : accum_.nonzero())
    if (model_.weights.get(id) == 0.0) out.averaged.set(id, -u / n);
  return out;
}

Model train(const Treebank& tb, const TrainConfig& cfg, const DlmSet& ds, TrainReport* report) {
  if (cfg.epochs < 1) throw ContractViolation("epochs must be >= 1");
  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};
  std::vector<const Sentence*> usable;
  for (const auto& s : tb.sentences) {
    if (s.empty()) continue;
    if (root_count(s) != 1) {
      ++rep.skipped_multiroot;
    } else if (!is_projective(s)) {
      ++rep.skipped_nonprojective;
    } else {
      usable.push_back(&s);
    }
  }
  rep.used = usable.size();
  if (usable.empty()) throw TrainingError("no usable (projective, single-rooted) training sentences");

  Trainer trainer(LabelSet::from_treebank(tb), cfg, ds);
  std::vector<std::size_t> order(usable.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle)
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    EpochStats stats;
    stats.epoch = epoch;
    for (auto idx : order) {
      const Sentence& s = *usable[idx];
      const UpdateInfo info = trainer.learn(s);
      ++stats.sentences;
      stats.updates += info.updated ? 1 : 0;
      stats.early_updates += info.early ? 1 : 0;
      stats.exact += info.updated ? 0 : 1;
      if (!info.early) {
        const Configuration c = replay(s, info.predicted);
        for (const auto& t : s.tokens) {
          ++stats.total_arcs;
          if (c.head(t.id) == t.head && trainer.model().labels.name(c.label(t.id)) == t.deprel)
            ++stats.correct_arcs;
        }
      }
    }
    rep.epochs.push_back(stats);
    if (cfg.on_epoch) cfg.on_epoch(stats);
  }
  return trainer.finalize();
}

}  // namespace dlmparse
