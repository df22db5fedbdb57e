#include "dlmparse/features.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <set>

#include "dlmparse/error.hpp"
#include "dlmparse/hashing.hpp"

namespace dlmparse {

namespace {

constexpr std::string_view kNone = "<NONE>";
constexpr std::string_view kRootValue = "<ROOT>";
constexpr std::array<std::string_view, 4> kCountBuckets = {"0", "1", "2", "3+"};
constexpr std::array<std::string_view, 5> kDistBuckets = {"1", "2", "3", "4", "5+"};
constexpr std::uint64_t kDlmTemplateBase = 1000;

struct Atom {
  std::string_view text;
  std::uint64_t hash = 0;
};

Atom atom(std::string_view text) { return {text, fnv1a(text)}; }

enum AtomId : int {
  S0W, S0P, S1W, S1P, S2W, S2P,
  B0W, B0P, B1W, B1P, B2W, B2P,
  S0LP, S0RP, S1LP, S1RP,
  S0N, S1N, DIST,
  kAtomCount
};

using TemplateList = std::vector<std::vector<int>>;

// Template id = position in the list. Entry 0 is the bias.
const TemplateList& full_templates() {
  static const TemplateList list = {
      {},
      {S0W}, {S0P}, {S0W, S0P}, {S1W}, {S1P}, {S1W, S1P}, {S2W}, {S2P},
      {B0W}, {B0P}, {B0W, B0P}, {B1W}, {B1P}, {B2W}, {B2P},
      {S0W, S1W}, {S0P, S1P}, {S0W, S0P, S1W, S1P}, {S0W, S1P}, {S0P, S1W},
      {S0W, B0W}, {S0P, B0P}, {S1P, B0P}, {B0P, B1P},
      {S0P, S1P, S2P}, {S0P, S1P, B0P}, {S0P, B0P, B1P}, {B0P, B1P, B2P},
      {S1W, S0W, B0W}, {S1W, S0P, B0W},
      {S0P, S0LP}, {S0P, S0RP}, {S1P, S1LP}, {S1P, S1RP},
      {S1P, S0P, S0LP}, {S1P, S0P, S1RP},
      {S0P, S0N}, {S1P, S1N},
      {DIST}, {DIST, S0P, S1P}, {DIST, S0W, S1W},
  };
  return list;
}

// Ids are offset so the two registries never share a key.
const TemplateList& words_only_templates() {
  static const TemplateList list = {
      {},
      {S0W}, {S1W}, {S2W}, {B0W}, {B1W}, {B2W},
      {S0W, S1W}, {S0W, B0W}, {S1W, S0W, B0W},
      {DIST}, {DIST, S0W, S1W},
  };
  return list;
}

std::string_view word_of(const Configuration& c, int index) {
  if (index < 0) return kNone;
  if (index == 0) return kRootValue;
  return c.sentence().at(index).form;
}

std::string_view pos_of(const Configuration& c, int index) {
  if (index < 0) return kNone;
  if (index == 0) return kRootValue;
  return c.sentence().at(index).pos;
}

std::string_view count_bucket(const Configuration& c, int index) {
  if (index < 0) return kNone;
  return kCountBuckets[static_cast<std::size_t>(std::min(c.dependent_count(index), 3))];
}


std::uint64_t key48(std::uint64_t hash) { return hash >> kSlotBits; }

std::array<Atom, kAtomCount> collect_atoms(const Configuration& c) {
  const int s0 = c.stack_at(0), s1 = c.stack_at(1), s2 = c.stack_at(2);
  const int b0 = c.buffer_at(0), b1 = c.buffer_at(1), b2 = c.buffer_at(2);
  auto dep_pos = [&](int head, bool leftmost) -> std::string_view {
    if (head < 0) return kNone;
    const int d = leftmost ? c.leftmost_dependent(head) : c.rightmost_dependent(head);
    return pos_of(c, d);
  };
  std::array<Atom, kAtomCount> a;
  a[S0W] = atom(word_of(c, s0));
  a[S0P] = atom(pos_of(c, s0));
  a[S1W] = atom(word_of(c, s1));
  a[S1P] = atom(pos_of(c, s1));
  a[S2W] = atom(word_of(c, s2));
  a[S2P] = atom(pos_of(c, s2));
  a[B0W] = atom(word_of(c, b0));
  a[B0P] = atom(pos_of(c, b0));
  a[B1W] = atom(word_of(c, b1));
  a[B1P] = atom(pos_of(c, b1));
  a[B2W] = atom(word_of(c, b2));
  a[B2P] = atom(pos_of(c, b2));
  a[S0LP] = atom(dep_pos(s0, true));
  a[S0RP] = atom(dep_pos(s0, false));
  a[S1LP] = atom(dep_pos(s1, true));
  a[S1RP] = atom(dep_pos(s1, false));
  a[S0N] = atom(count_bucket(c, s0));
  a[S1N] = atom(count_bucket(c, s1));
  a[DIST] = atom(s1 < 0 ? kNone
                        : kDistBuckets[static_cast<std::size_t>(std::min(std::abs(s0 - s1), 5) - 1)]);
  return a;
}

// Same-side dependents of `head` strictly between `token` and `head`, nearest
// to `token` first, at most `limit` of them.
std::vector<int> closer_siblings(const Configuration& c, int token, int head, int limit) {
  std::vector<int> out;
  if (token < head) {
    for (int d = token + 1; d < head && static_cast<int>(out.size()) < limit; ++d)
      if (c.head(d) == head) out.push_back(d);
  } else {
    for (int d = token - 1; d > head && static_cast<int>(out.size()) < limit; --d)
      if (c.head(d) == head) out.push_back(d);
  }
  return out;
}

}  // namespace

void FeatureVector::normalize() {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

FeatureVector merge(const FeatureVector& a, const FeatureVector& b) {
  FeatureVector out;
  out.ids.reserve(a.size() + b.size());
  std::set_union(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(),
                 std::back_inserter(out.ids));
  return out;
}

std::string_view to_string(TemplateSet t) {
  return t == TemplateSet::Full ? "full" : "words_only";
}

TemplateSet parse_template_set(std::string_view s) {
  if (s == "full") return TemplateSet::Full;
  if (s == "words_only") return TemplateSet::WordsOnly;
  throw ContractViolation("unknown template set '" + std::string(s) + "'");
}

DlmSet::DlmSet(std::vector<std::shared_ptr<const DlmTable>> tables) : tables_(std::move(tables)) {
  std::set<int> orders;
  for (const auto& t : tables_) {
    if (!t) throw ContractViolation("null DLM table");
    if (!orders.insert(t->order()).second)
      throw ContractViolation("two DLM tables of order " + std::to_string(t->order()));
  }
}

void FeatureAudit::record(std::uint64_t key, std::string text) {
  auto [it, inserted] = seen_.emplace(key, text);
  if (!inserted && it->second != text) ++collisions_;
}

std::vector<std::uint64_t> baseline_keys(const Configuration& c, TemplateSet templates,
                                         FeatureAudit* audit) {
  const auto atoms = collect_atoms(c);
  const bool full = templates == TemplateSet::Full;
  const auto& list = full ? full_templates() : words_only_templates();
  const std::uint64_t offset = full ? 0 : 500;
  std::vector<std::uint64_t> keys;
  keys.reserve(list.size());
  for (std::size_t t = 0; t < list.size(); ++t) {
    FieldHasher h(offset + t);
    for (int a : list[t]) h.add(atoms[static_cast<std::size_t>(a)].hash);
    keys.push_back(key48(h.value()));
    if (audit) {
      std::string text = "B" + std::to_string(offset + t);
      for (int a : list[t]) {
        text += '\x1f';
        text += atoms[static_cast<std::size_t>(a)].text;
      }
      audit->record(keys.back(), std::move(text));
    }
  }
  return keys;
}

BucketClass dlm_class(const Configuration& c, int token, const DlmTable& d,
                      std::optional<int> overlay_head) {
  if (token < 0) return BucketClass::PU;
  const int head = overlay_head ? *overlay_head : (token == 0 ? -1 : c.head(token));
  if (head < 0) return BucketClass::PU;
  const Sentence& s = c.sentence();
  const UnitMode mode = d.unit_mode();
  std::vector<std::string> siblings;
  for (int sib : closer_siblings(c, token, head, d.order() - 1))
    siblings.push_back(unit_at(s, sib, mode));
  return d.lookup(make_key(d.order(), token < head ? Side::Left : Side::Right,
                           unit_at(s, head, mode), siblings, unit_at(s, token, mode)));
}

namespace {

void emit_dlm_group(std::vector<std::uint64_t>& out, std::size_t no, BucketClass phi0,
                    BucketClass phi1, const Atom& s0p, const Atom& s0w, const Atom& s1p,
                    const Atom& s1w, FeatureAudit* audit) {
  const std::array<std::vector<const Atom*>, kDlmTemplatesPerTable> templates = {{
      {}, {&s0p}, {&s0w}, {&s1p}, {&s1w}, {&s0p, &s1p}, {&s0w, &s1w},
  }};
  for (std::size_t t = 0; t < templates.size(); ++t) {
    FieldHasher h(kDlmTemplateBase + t);
    h.add(static_cast<std::uint64_t>(no))
        .add(static_cast<std::uint64_t>(phi0))
        .add(static_cast<std::uint64_t>(phi1));
    for (const Atom* a : templates[t]) h.add(a->hash);
    out.push_back(key48(h.value()));
    if (audit) {
      std::string text = "D" + std::to_string(t) + ":" + std::to_string(no) + ":" +
                         std::string(to_string(phi0)) + ":" + std::string(to_string(phi1));
      for (const Atom* a : templates[t]) {
        text += '\x1f';
        text += a->text;
      }
      audit->record(out.back(), std::move(text));
    }
  }
}

}  // namespace

DlmKeys dlm_keys(const Configuration& c, const DlmSet& ds, const FeatureConfig& cfg,
                 FeatureAudit* audit) {
  DlmKeys keys;
  if (ds.empty()) return keys;
  const int s0 = c.stack_at(0), s1 = c.stack_at(1);
  const Atom s0p = atom(pos_of(c, s0)), s0w = atom(word_of(c, s0));
  const Atom s1p = atom(pos_of(c, s1)), s1w = atom(word_of(c, s1));
  const bool do_shift = cfg.dlm_on_shift && c.is_legal(Transition::shift());
  const bool do_left = c.is_legal(Transition::left(0));
  const bool do_right = c.is_legal(Transition::right(0));
  for (std::size_t no = 0; no < ds.size(); ++no) {
    const DlmTable& d = ds[no];
    const BucketClass phi0 = dlm_class(c, s0, d), phi1 = dlm_class(c, s1, d);
    if (do_shift) emit_dlm_group(keys.shift, no, phi0, phi1, s0p, s0w, s1p, s1w, audit);
    if (do_left)
      emit_dlm_group(keys.left, no, phi0, dlm_class(c, s1, d, s0), s0p, s0w, s1p, s1w, audit);
    if (do_right)
      emit_dlm_group(keys.right, no, dlm_class(c, s0, d, s1), phi1, s0p, s0w, s1p, s1w, audit);
  }
  return keys;
}

FeatureVector baseline_features(const Configuration& c, const Transition& t,
                                TemplateSet templates) {
  FeatureVector fv;
  for (auto k : baseline_keys(c, templates)) fv.ids.push_back(make_feature_id(k, t.index()));
  fv.normalize();
  return fv;
}

FeatureVector dlm_features(const Configuration& c, const Transition& t, const DlmSet& ds,
                           const FeatureConfig& cfg) {
  FeatureVector fv;
  if (ds.empty() || !c.is_legal(t)) return fv;
  const DlmKeys keys = dlm_keys(c, ds, cfg);
  const auto& group = t.kind == TransitionKind::Shift
                          ? keys.shift
                          : (t.kind == TransitionKind::LeftArc ? keys.left : keys.right);
  for (auto k : group) fv.ids.push_back(make_feature_id(k, label_slot(t)));
  fv.normalize();
  return fv;
}

FeatureVector features(const Configuration& c, const Transition& t, const DlmSet& ds,
                       const FeatureConfig& cfg) {
  return merge(baseline_features(c, t, cfg.templates), dlm_features(c, t, ds, cfg));
}

}  // namespace dlmparse
