#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dlmparse/error.hpp"
#include "dlmparse/model.hpp"
#include "dlmparse/parser.hpp"
#include "dlmparse/synthetic.hpp"
#include "support/oracles.hpp"

using namespace dlmparse;
using dlmparse::testing::make_sentence;

namespace {

std::string saved(const Model& m) {
  std::ostringstream out;
  save_model(m, out);
  return out.str();
}

Model reload(const std::string& text) {
  std::istringstream in(text);
  return load_model(in);
}

// Every legal terminal transition sequence for `s`.
void enumerate(const Configuration& c, int num_labels, std::vector<Transition>& prefix,
               std::vector<std::vector<Transition>>& out) {
  if (is_terminal(c)) {
    out.push_back(prefix);
    return;
  }
  for (const auto& t : legal_transitions(c, num_labels)) {
    prefix.push_back(t);
    enumerate(apply(c, t), num_labels, prefix, out);
    prefix.pop_back();
  }
}

std::vector<std::vector<Transition>> all_sequences(const Sentence& s, int num_labels) {
  std::vector<std::vector<Transition>> out;
  std::vector<Transition> prefix;
  enumerate(initial(s), num_labels, prefix, out);
  return out;
}

DlmSet small_dlms(const Treebank& tb) {
  std::vector<std::shared_ptr<const DlmTable>> tables;
  for (int order = 1; order <= 2; ++order)
    tables.push_back(std::make_shared<const DlmTable>(build(tb, DlmConfig{order, UnitMode::Form, 1})));
  return DlmSet(tables);
}

std::size_t labeled_correct(const Sentence& gold, const Sentence& pred) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < gold.size(); ++i)
    n += gold.tokens[i].head == pred.tokens[i].head && gold.tokens[i].deprel == pred.tokens[i].deprel;
  return n;
}

}  // namespace

TEST_CASE("score") {
  Model m(ModelConfig{}, LabelSet({"a"}));
  CHECK(score(m, FeatureVector{}, true) == 0.0);
  const FeatureId x = make_feature_id(11, 0), y = make_feature_id(12, 1), z = make_feature_id(13, 2);
  m.averaged.set(x, 2.5);
  CHECK(score(m, FeatureVector{{x}}, true) == 2.5);
  CHECK(score(m, FeatureVector{{x}}, false) == 0.0);
  m.averaged.set(y, -1.25);
  m.averaged.set(z, 4.0);
  CHECK(score(m, FeatureVector{{x, y, z}}, true) == 2.5 - 1.25 + 4.0);
  CHECK(score(m, FeatureVector{{x, make_feature_id(99, 0)}}, true) == 2.5);
}

TEST_CASE("SlotWeights") {
  SlotWeights w(3);
  const FeatureId a = make_feature_id(5, 2);
  CHECK(w.row(5) == nullptr);
  w.add(a, 1.5);
  w.add(a, 1.0);
  CHECK(w.get(a) == 2.5);
  CHECK(w.get(make_feature_id(5, 0)) == 0.0);
  REQUIRE(w.row(5) != nullptr);
  CHECK(w.row(5)[2] == 2.5);
  w.set(make_feature_id(4, 0), -1.0);
  auto nz = w.nonzero();
  REQUIRE(nz.size() == 2);
  CHECK(nz[0].first < nz[1].first);
}

TEST_CASE("fast transition scoring agrees with explicit feature vectors") {
  Treebank tb = SyntheticGrammar().generate(40, 17);
  const DlmSet ds = small_dlms(tb);
  TrainConfig cfg;
  cfg.beam_width = 4;
  cfg.epochs = 2;
  const Model m = train(tb, cfg, ds);
  const int L = m.labels.size();
  for (const auto& s : tb.sentences) {
    Configuration c = initial(s);
    for (const auto& gold : oracle(s, m.labels)) {
      const auto fast = transition_scores(m.averaged, c, L, ds, m.config.features);
      for (const auto& t : legal_transitions(c, L))
        CHECK(fast[static_cast<std::size_t>(t.index())] ==
              doctest::Approx(score(m, features(c, t, ds, m.config.features), true)).epsilon(1e-12));
      c.advance(gold);
    }
  }
}

TEST_CASE("beam 1 equals greedy decoding") {
  Treebank tb = SyntheticGrammar().generate(60, 23);
  const DlmSet ds = small_dlms(tb);
  TrainConfig cfg;
  cfg.beam_width = 2;
  cfg.epochs = 2;
  const Model m = train(tb, cfg, ds);
  Treebank test = SyntheticGrammar().generate(30, 24);
  for (const auto& s : test.sentences) {
    Configuration c = initial(s);
    while (!is_terminal(c)) {
      Transition best = Transition::shift();
      double best_score = -INFINITY;
      for (const auto& t : legal_transitions(c, m.labels.size())) {
        const double v = score(m, features(c, t, ds, m.config.features), true);
        if (v > best_score) {
          best_score = v;
          best = t;
        }
      }
      c.advance(best);
    }
    const Sentence greedy = to_tree(c, m.labels);
    CHECK(decode(m, s, 1, ds).tree == greedy);
  }
}

TEST_CASE("wide beam equals exhaustive argmax on short sentences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  Treebank tb = SyntheticGrammar().generate(20, 3);
  const DlmSet ds = small_dlms(tb);
  for (int round = 0; round < 30; ++round) {
    const int n = 1 + round % 3;
    Sentence s = tb.sentences[static_cast<std::size_t>(round) % tb.sentences.size()];
    s.tokens.resize(static_cast<std::size_t>(n));
    for (auto& t : s.tokens) t.head = 0;
    Model m(ModelConfig{}, LabelSet({"x", "y"}));
    const auto seqs = all_sequences(s, 2);
    for (const auto& seq : seqs)
      for (const auto& [id, count] : sequence_features(m, s, seq, ds))
        if (m.averaged.get(id) == 0.0) m.averaged.set(id, normal(rng));
    double best = -INFINITY;
    const std::vector<Transition>* argmax = nullptr;
    for (const auto& seq : seqs) {
      const double v = sequence_score(m, s, seq, ds, true);
      if (v > best) {
        best = v;
        argmax = &seq;
      }
    }
    const auto r = decode(m, s, static_cast<int>(seqs.size()) * 8, ds);
    CHECK(r.best.score == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.best.history == *argmax);
    CHECK(r.best.score == doctest::Approx(sequence_score(m, s, r.best.history, ds, true)).epsilon(1e-12));
  }
}

TEST_CASE("single-token sentence decodes to the unique tree") {
  Model m(ModelConfig{}, LabelSet({"root"}));
  Sentence s = make_sentence({0}, {"root"});
  const auto r = decode(m, s, 4, DlmSet{});
  CHECK(r.tree.tokens[0].head == 0);
  CHECK(r.tree.tokens[0].deprel == "root");
  CHECK(decode(m, Sentence{}, 4, DlmSet{}).tree.empty());
}

TEST_CASE("decoded trees are valid and thread count does not matter") {
  Treebank tb = SyntheticGrammar().generate(80, 31);
  const DlmSet ds = small_dlms(tb);
  TrainConfig cfg;
  cfg.beam_width = 4;
  cfg.epochs = 2;
  const Model m = train(tb, cfg, ds);
  Treebank test = SyntheticGrammar().generate(40, 32);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i)
    test.sentences.push_back(dlmparse::testing::random_sentence(rng, 1 + static_cast<int>(rng() % 12), 30, 6, {"x"}));
  const auto one = decode_all(m, test.sentences, 4, ds, 1);
  for (const auto& s : one) {
    CHECK(tree_violation(s).empty());
    CHECK(is_projective(s));
  }
  CHECK(decode_all(m, test.sentences, 4, ds, 3) == one);
  CHECK(decode_all(m, {}, 4, ds, 3).empty());
}

TEST_CASE("training memorizes a single sentence") {
  Treebank tb = SyntheticGrammar().generate(1, 77);
  REQUIRE(tb.sentences[0].size() >= 3);
  TrainConfig cfg;
  cfg.beam_width = 4;
  cfg.epochs = 30;
  const Model m = train(tb, cfg, DlmSet{});
  CHECK(decode(m, tb.sentences[0], 4, DlmSet{}).tree == tb.sentences[0]);
}

TEST_CASE("training skips unusable sentences and rejects empty input") {
  Treebank tb;
  tb.sentences.push_back(make_sentence({2, 0}, {"a", "root"}));
  tb.sentences.push_back(make_sentence({0, 0}, {"root", "root"}));
  tb.sentences.push_back(make_sentence({3, 4, 0, 3}, {"a", "a", "root", "a"}));
  TrainReport report;
  TrainConfig cfg;
  cfg.epochs = 1;
  train(tb, cfg, DlmSet{}, &report);
  CHECK(report.used == 1);
  CHECK(report.skipped_multiroot == 1);
  CHECK(report.skipped_nonprojective == 1);
  CHECK(report.epochs.size() == 1);

  Treebank bad;
  bad.sentences.push_back(make_sentence({0, 0}, {"root", "root"}));
  CHECK_THROWS_AS(train(bad, cfg, DlmSet{}), TrainingError);
  CHECK_THROWS_AS(train(Treebank{}, cfg, DlmSet{}), TrainingError);
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(tb, cfg, DlmSet{}), ContractViolation);
}

TEST_CASE("same seed gives byte-identical models") {
  Treebank tb = SyntheticGrammar().generate(50, 8);
  const DlmSet ds = small_dlms(tb);
  TrainConfig cfg;
  cfg.beam_width = 3;
  cfg.epochs = 3;
  cfg.seed = 99;
  CHECK(saved(train(tb, cfg, ds)) == saved(train(tb, cfg, ds)));
}

TEST_CASE("early update raises the gold prefix by the squared update norm") {
  Treebank tb = SyntheticGrammar().generate(60, 41);
  const DlmSet ds = small_dlms(tb);
  TrainConfig cfg;
  cfg.beam_width = 2;
  Trainer trainer(LabelSet::from_treebank(tb), cfg, ds);
  std::size_t checked = 0, early = 0;
  for (int epoch = 0; epoch < 2; ++epoch) {
    for (const auto& s : tb.sentences) {
      const Model before = trainer.model();
      const bool fresh = before.weights.empty();
      const UpdateInfo info = trainer.learn(s);
      if (!info.updated) continue;
      ++checked;
      early += info.early;
      CHECK(info.gold.size() == info.step);
      CHECK(info.predicted.size() == info.step);
      CHECK(info.gold != info.predicted);
      auto diff = [&](const Model& m) {
        return sequence_score(m, s, info.gold, ds, false) - sequence_score(m, s, info.predicted, ds, false);
      };
      const double old_diff = diff(before);
      CHECK(old_diff <= 1e-9);
      std::map<FeatureId, double> delta = sequence_features(before, s, info.gold, ds);
      for (const auto& [id, c] : sequence_features(before, s, info.predicted, ds)) delta[id] -= c;
      double norm2 = 0.0;
      for (const auto& [id, d] : delta) norm2 += d * d;
      CHECK(norm2 > 0.0);
      const double new_diff = diff(trainer.model());
      CHECK(new_diff == doctest::Approx(old_diff + norm2).epsilon(1e-9));
      if (fresh) CHECK(new_diff > 0.0);
    }
  }
  CHECK(checked > 10);
  CHECK(early > 0);
}

TEST_CASE("averaged weights are the mean of the raw weights over instances") {
  Treebank tb = SyntheticGrammar().generate(25, 12);
  TrainConfig cfg;
  cfg.beam_width = 2;
  Trainer trainer(LabelSet::from_treebank(tb), cfg, DlmSet{});
  SUBCASE("exactly one update") {
    Sentence s = make_sentence({0, 1}, {"root", "dobj"});
    Trainer t(LabelSet({"dobj", "root"}), cfg, DlmSet{});
    REQUIRE(t.learn(s).updated);
    const Model m = t.finalize();
    CHECK_FALSE(m.weights.empty());
    for (const auto& [id, w] : m.weights.nonzero()) CHECK(m.averaged.get(id) == doctest::Approx(w));
    CHECK(m.averaged.nonzero().size() == m.weights.nonzero().size());
  }
  SUBCASE("many instances") {
    std::map<FeatureId, double> sum;
    for (int epoch = 0; epoch < 3; ++epoch)
      for (const auto& s : tb.sentences) {
        trainer.learn(s);
        for (const auto& [id, w] : trainer.model().weights.nonzero()) sum[id] += w;
      }
    const Model m = trainer.finalize();
    const double n = static_cast<double>(trainer.instances());
    for (const auto& [id, total] : sum) CHECK(m.averaged.get(id) == doctest::Approx(total / n).epsilon(1e-9));
    for (const auto& [id, a] : m.averaged.nonzero()) CHECK(sum.count(id) == 1);
  }
}

TEST_CASE("model save and load") {
  SUBCASE("trained model round-trips with identical decoding") {
    Treebank tb = SyntheticGrammar().generate(40, 2);
    const DlmSet ds = small_dlms(tb);
    TrainConfig cfg;
    cfg.beam_width = 3;
    cfg.epochs = 2;
    const Model m = train(tb, cfg, ds);
    const std::string text = saved(m);
    const Model back = reload(text);
    CHECK(back == m);
    CHECK(saved(back) == text);
    CHECK(back.dlm_manifest.size() == 2);
    Treebank test = SyntheticGrammar().generate(20, 3);
    CHECK(decode_all(back, test.sentences, 3, ds) == decode_all(m, test.sentences, 3, ds));
  }
  SUBCASE("empty model round-trips") {
    Model m(ModelConfig{}, LabelSet({"a", "b"}));
    CHECK(reload(saved(m)) == m);
  }
  SUBCASE("truncated file") {
    Treebank tb = SyntheticGrammar().generate(10, 2);
    TrainConfig cfg;
    cfg.epochs = 1;
    const std::string text = saved(train(tb, cfg, DlmSet{}));
    CHECK_THROWS_AS(reload(text.substr(0, text.size() / 2)), FormatError);
    CHECK_THROWS_AS(reload(text.substr(0, text.size() - 4)), FormatError);
    CHECK_THROWS_AS(reload(""), FormatError);
  }
  SUBCASE("version and magic") {
    Model m(ModelConfig{}, LabelSet({"a"}));
    std::string text = saved(m);
    const auto eol = text.find('\n');
    CHECK_THROWS_AS(reload("dlmparse-model\t2" + text.substr(eol)), VersionError);
    CHECK_THROWS_AS(reload("not-a-model\t1" + text.substr(eol)), FormatError);
  }
}

TEST_CASE("manifest check") {
  Treebank tb = SyntheticGrammar().generate(30, 4);
  const DlmSet ds = small_dlms(tb);
  Model m(ModelConfig{}, LabelSet({"a"}));
  m.dlm_manifest = make_manifest(ds);
  CHECK_NOTHROW(check_manifest(m, ds));
  CHECK_THROWS_AS(check_manifest(m, DlmSet{}), ContractViolation);
  Treebank other = SyntheticGrammar().generate(30, 5);
  CHECK_THROWS_AS(check_manifest(m, small_dlms(other)), ContractViolation);
}

TEST_CASE("training accuracy on a small synthetic corpus") {
  Treebank tb = SyntheticGrammar().generate(100, 42);
  TrainConfig cfg;
  cfg.beam_width = 8;
  cfg.epochs = 12;
  const Model m = train(tb, cfg, DlmSet{});
  std::size_t correct = 0, total = 0;
  for (const auto& s : tb.sentences) {
    correct += labeled_correct(s, decode(m, s, 8, DlmSet{}).tree);
    total += s.size();
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.99);
}
