#include <algorithm>
#include <memory>
#include <random>

#include "doctest.h"
#include "dlmparse/error.hpp"
#include "dlmparse/features.hpp"
#include "dlmparse/synthetic.hpp"
#include "support/oracles.hpp"

using namespace dlmparse;
using dlmparse::testing::make_sentence;

namespace {

std::shared_ptr<const DlmTable> table_with(const NGramKey& k) {
  DlmCounter counter(DlmConfig{k.order, UnitMode::Form, 1});
  counter.add(k, 3);
  return std::make_shared<const DlmTable>(counter.finish());
}

bool disjoint(const FeatureVector& a, const FeatureVector& b) {
  std::vector<FeatureId> both;
  std::set_intersection(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(),
                        std::back_inserter(both));
  return both.empty();
}

DlmSet three_tables(const Treebank& tb) {
  std::vector<std::shared_ptr<const DlmTable>> tables;
  for (int order = 1; order <= 3; ++order)
    tables.push_back(std::make_shared<const DlmTable>(build(tb, DlmConfig{order, UnitMode::Form, 1})));
  return DlmSet(tables);
}

// Every configuration reached along the gold sequences of `tb`.
template <class F>
void for_each_config(const Treebank& tb, const LabelSet& labels, F&& f) {
  for (const auto& s : tb.sentences) {
    Configuration c = initial(s);
    for (const auto& t : oracle(s, labels)) {
      f(c);
      c.advance(t);
    }
  }
}

}  // namespace

TEST_CASE("feature id layout") {
  const FeatureId id = make_feature_id(0xABCDEF123456ull, 37);
  CHECK(feature_key(id) == 0xABCDEF123456ull);
  CHECK(feature_slot(id) == 37);
  CHECK(label_slot(Transition::shift()) == 0);
  CHECK(label_slot(Transition::left(4)) == 5);
  CHECK(label_slot(Transition::right(4)) == 5);
}

TEST_CASE("FeatureVector normalize and merge") {
  FeatureVector v{{5, 1, 5, 3}};
  v.normalize();
  CHECK(v.ids == std::vector<FeatureId>{1, 3, 5});
  CHECK(merge(v, FeatureVector{{2, 3}}).ids == std::vector<FeatureId>{1, 2, 3, 5});
}

TEST_CASE("DlmSet rejects duplicate orders") {
  auto a = table_with(NGramKey{1, Side::Left, "h", {}, "c"});
  auto b = table_with(NGramKey{1, Side::Right, "h", {}, "c"});
  CHECK_THROWS_AS(DlmSet({a, b}), ContractViolation);
}

TEST_CASE("template set names") {
  CHECK(parse_template_set(to_string(TemplateSet::Full)) == TemplateSet::Full);
  CHECK(parse_template_set("words_only") == TemplateSet::WordsOnly);
  CHECK_THROWS_AS(parse_template_set("bogus"), ContractViolation);
}

TEST_CASE("baseline features are deterministic and conjoined with the transition") {
  Sentence s = make_sentence({2, 0, 2}, {}, {"the", "dog", "ran"}, {"DT", "NN", "VB"});
  Configuration c = apply(apply(initial(s), Transition::shift()), Transition::shift());
  CHECK(baseline_features(c, Transition::left(0)) == baseline_features(c, Transition::left(0)));
  CHECK(disjoint(baseline_features(c, Transition::left(0)), baseline_features(c, Transition::left(1))));
  CHECK(disjoint(baseline_features(c, Transition::left(0)), baseline_features(c, Transition::right(0))));
  CHECK(disjoint(baseline_features(c, Transition::shift()), baseline_features(c, Transition::right(0))));
  const auto keys = baseline_keys(c, TemplateSet::Full);
  CHECK(baseline_features(c, Transition::shift()).size() == keys.size());
}

TEST_CASE("initial configuration: absent positions fire with the reserved value") {
  Sentence s = make_sentence({0}, {}, {"x"}, {"NN"});
  Configuration c = initial(s);
  FeatureAudit audit;
  const auto keys = baseline_keys(c, TemplateSet::Full, &audit);
  CHECK(keys.size() == audit.distinct());
  CHECK(baseline_features(c, Transition::shift()).size() == keys.size());
  // A different sentence whose s1/s2 are also absent shares every s1-only key.
  Sentence other = make_sentence({0}, {}, {"y"}, {"JJ"});
  const auto other_keys = baseline_keys(initial(other), TemplateSet::Full);
  std::vector<std::uint64_t> a = keys, b = other_keys, shared;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
  CHECK(shared.size() > 0);
  CHECK(shared.size() < keys.size());
}

TEST_CASE("dlm_class") {
  Sentence s = make_sentence({2, 0}, {}, {"a", "b"});
  Configuration c = apply(apply(initial(s), Transition::shift()), Transition::shift());
  auto d = table_with(NGramKey{1, Side::Left, "b", {}, "a"});
  CHECK(dlm_class(c, 1, *d) == BucketClass::PU);
  CHECK(dlm_class(c, -1, *d) == BucketClass::PU);
  CHECK(dlm_class(c, 1, *d, 2) == BucketClass::PH);
  CHECK(dlm_class(c, 2, *d, 1) == BucketClass::PO);
  CHECK(dlm_class(c, 2, *d, 0) == BucketClass::PO);

  Configuration attached = apply(c, Transition::left(0));
  CHECK(dlm_class(attached, 1, *d) == BucketClass::PH);
  CHECK(dlm_class(attached, 2, *d) == BucketClass::PU);
}

TEST_CASE("dlm_class conditions on closer siblings already attached") {
  // c x h: attach x to h first, then score c -> h with a bigram table.
  Sentence s = make_sentence({3, 3, 0}, {}, {"c", "x", "h"});
  auto d = table_with(NGramKey{2, Side::Left, "h", {"x"}, "c"});
  Configuration c = replay(s, {Transition::shift(), Transition::shift(), Transition::shift(),
                               Transition::left(0)});
  CHECK(c.stack_at(0) == 3);
  CHECK(c.stack_at(1) == 1);
  CHECK(dlm_class(c, 1, *d, 3) == BucketClass::PH);
  Configuration before = replay(s, {Transition::shift(), Transition::shift()});
  CHECK(dlm_class(before, 1, *d, 3) == BucketClass::PO);
}

TEST_CASE("DLM feature counts") {
  Treebank tb = SyntheticGrammar().generate(50, 3);
  const LabelSet labels = LabelSet::from_treebank(tb);
  const DlmSet ds = three_tables(tb);
  const DlmSet none;
  std::size_t checked = 0;
  for_each_config(tb, labels, [&](const Configuration& c) {
    for (const auto& t : legal_transitions(c, labels.size())) {
      CHECK(dlm_features(c, t, ds).size() == 21);
      CHECK(dlm_features(c, t, none).empty());
      ++checked;
    }
  });
  CHECK(checked > 1000);

  FeatureConfig off;
  off.dlm_on_shift = false;
  Configuration c = initial(tb.sentences[0]);
  CHECK(dlm_features(c, Transition::shift(), ds, off).empty());
  CHECK(dlm_features(c, Transition::shift(), ds).size() == 21);
}

TEST_CASE("DLM features are strictly additive") {
  Treebank tb = SyntheticGrammar().generate(30, 5);
  const LabelSet labels = LabelSet::from_treebank(tb);
  const DlmSet ds = three_tables(tb);
  for (TemplateSet ts : {TemplateSet::Full, TemplateSet::WordsOnly}) {
    FeatureConfig cfg;
    cfg.templates = ts;
    for_each_config(tb, labels, [&](const Configuration& c) {
      for (const auto& t : legal_transitions(c, labels.size())) {
        const FeatureVector base = baseline_features(c, t, ts);
        CHECK(features(c, t, DlmSet{}, cfg) == base);
        const FeatureVector dlm = dlm_features(c, t, ds, cfg);
        CHECK(disjoint(base, dlm));
        CHECK(features(c, t, ds, cfg) == merge(base, dlm));
      }
    });
  }
}

TEST_CASE("no hash collisions on synthetic data") {
  Treebank tb = SyntheticGrammar().generate(300, 11);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i)
    tb.sentences.push_back(dlmparse::testing::random_sentence(rng, 1 + static_cast<int>(rng() % 12), 50, 8, {"root"}));
  LabelSet labels = LabelSet::from_treebank(tb);
  Treebank projective;
  for (const auto& s : tb.sentences)
    if (is_projective(s)) projective.sentences.push_back(s);
  const DlmSet ds = three_tables(projective);
  FeatureAudit audit;
  for_each_config(projective, labels, [&](const Configuration& c) {
    baseline_keys(c, TemplateSet::Full, &audit);
    baseline_keys(c, TemplateSet::WordsOnly, &audit);
    dlm_keys(c, ds, FeatureConfig{}, &audit);
  });
  MESSAGE("distinct feature keys audited: " << audit.distinct());
  CHECK(audit.distinct() > 10000);
  CHECK(audit.collisions() == 0);
}
