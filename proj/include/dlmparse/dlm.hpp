// N-gram dependency language models.
//
// An event is a child attached to a head, conditioned on the N-1 nearest
// previously generated same-side siblings (those strictly between the child
// and the head). Probabilities are relative frequencies over the events that
// survive the min-count filter, so every stored context sums to one. Entries
// are then ranked by probability and replaced by a coarse class:
//   PH  top 10% of the ranked entries
//   PM  ranks in (10%, 30%]
//   PL  the rest
// Lookups of unseen events yield PO. PU is produced by the feature extractor
// for tokens that have no head yet and never comes out of a table.
//
// Key conventions:
//   - side is L when the child precedes its head, R otherwise; the artificial
//     root sits at position 0, so root-attached tokens are always R.
//   - prev_units holds the N-1 siblings closest to the child, farthest from the
//     head first (nearest-to-head last), left-padded with "<S>".
//   - the artificial root's unit is "<ROOT>".
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dlmparse/corpus.hpp"

namespace dlmparse {

inline constexpr std::string_view kBoundaryUnit = "<S>";
inline constexpr std::string_view kRootUnit = "<ROOT>";

enum class UnitMode : std::uint8_t { Form, Pos, FormPos };
enum class Side : std::uint8_t { Left, Right };
enum class BucketClass : std::uint8_t { PH, PM, PL, PO, PU };
enum class RootArcs : std::uint8_t { Include, Exclude };

std::string_view to_string(UnitMode m);
std::string_view to_string(BucketClass c);
std::string_view to_string(RootArcs r);
UnitMode parse_unit_mode(std::string_view s);  // throws ContractViolation
BucketClass parse_bucket_class(std::string_view s);
RootArcs parse_root_arcs(std::string_view s);

// form: ASCII-lowercased surface form; pos: fine POS; form_pos: "form/POS".
std::string unit_of(const Token& t, UnitMode mode);
// Unit of sentence position `index`; position 0 is the artificial root.
std::string unit_at(const Sentence& s, int index, UnitMode mode);

struct NGramKey {
  int order = 1;
  Side side = Side::Right;
  std::string head_unit;
  std::vector<std::string> prev_units;
  std::string child_unit;

  friend bool operator==(const NGramKey&, const NGramKey&) = default;
  friend auto operator<=>(const NGramKey&, const NGramKey&) = default;
};

struct NGramKeyHash {
  std::size_t operator()(const NGramKey& k) const noexcept;
};

// Builds a key from the same-side siblings strictly closer to the head,
// ordered from the child towards the head (nearest-to-child first).
NGramKey make_key(int order, Side side, std::string head_unit,
                  const std::vector<std::string>& siblings_from_child, std::string child_unit);

struct DlmEntry {
  std::uint64_t count = 0;
  double prob = 0.0;
  BucketClass cls = BucketClass::PL;

  friend bool operator==(const DlmEntry&, const DlmEntry&) = default;
};

struct DlmConfig {
  int order = 1;
  UnitMode unit_mode = UnitMode::Form;
  std::uint64_t min_count = 3;
  RootArcs root_arcs = RootArcs::Include;

  friend bool operator==(const DlmConfig&, const DlmConfig&) = default;
};

// One key per token of `s` (root-attached tokens skipped when excluded).
std::vector<NGramKey> extract_events(const Sentence& s, int order,
                                     UnitMode mode = UnitMode::Form,
                                     RootArcs root_arcs = RootArcs::Include);

class DlmTable {
 public:
  using Map = std::unordered_map<NGramKey, DlmEntry, NGramKeyHash>;

  DlmTable() = default;
  explicit DlmTable(DlmConfig config, Map entries = {})
      : config_(config), entries_(std::move(entries)) {}

  const DlmConfig& config() const noexcept { return config_; }
  int order() const noexcept { return config_.order; }
  UnitMode unit_mode() const noexcept { return config_.unit_mode; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Map& entries() const noexcept { return entries_; }
  Map& mutable_entries() noexcept { return entries_; }

  const DlmEntry* find(const NGramKey& key) const;
  // Entry class, PO when absent. Throws ContractViolation on an order mismatch.
  BucketClass lookup(const NGramKey& key) const;

  // Entries in rank order: probability descending, then count descending,
  // then key ascending.
  std::vector<std::pair<const NGramKey*, const DlmEntry*>> ranked() const;

  // Sizes of PH, PM, PL.
  std::array<std::size_t, 3> bucket_sizes() const;

  friend bool operator==(const DlmTable& a, const DlmTable& b) {
    return a.config_ == b.config_ && a.entries_ == b.entries_;
  }

 private:
  DlmConfig config_;
  Map entries_;
};

BucketClass lookup(const DlmTable& t, const NGramKey& key);

// Accumulates raw event counts. Counters over disjoint shards can be merged in
// any order; the merged result is independent of sharding.
class DlmCounter {
 public:
  explicit DlmCounter(DlmConfig config) : config_(config) {}

  void add(const Sentence& s);
  void add(const NGramKey& key, std::uint64_t count = 1);
  void merge(const DlmCounter& other);

  const DlmConfig& config() const noexcept { return config_; }
  const std::unordered_map<NGramKey, std::uint64_t, NGramKeyHash>& counts() const noexcept {
    return counts_;
  }

  // Filters by min_count, estimates relative frequencies and assigns buckets.
  DlmTable finish() const;

 private:
  DlmConfig config_;
  std::unordered_map<NGramKey, std::uint64_t, NGramKeyHash> counts_;
};

// Counts `tb` (in `threads` shards when > 1), then estimates and buckets.
DlmTable build(const Treebank& tb, const DlmConfig& config, unsigned threads = 1);
inline DlmTable build(const Treebank& tb, int order, UnitMode mode = UnitMode::Form,
                      std::uint64_t min_count = 3) {
  return build(tb, DlmConfig{order, mode, min_count, RootArcs::Include});
}

// Re-ranks every entry and rewrites its class. No-op on an empty table.
DlmTable assign_buckets(DlmTable t);

// Number of PH and PH+PM entries for a table of k entries.
constexpr std::size_t high_bucket_size(std::size_t k) { return (k + 9) / 10; }
constexpr std::size_t high_and_mid_bucket_size(std::size_t k) { return (3 * k + 9) / 10; }

// Text format: one header line, then one tab-separated line per entry in rank
// order. Unit strings escape '\\', ',', tab and newline.
void save(const DlmTable& t, std::ostream& out);
DlmTable load(std::istream& in);
void save_file(const DlmTable& t, const std::string& path);
DlmTable load_file(const std::string& path);

std::string serialize(const DlmTable& t);
// Digest of the canonical serialization; models record it per attached table.
std::string digest(const DlmTable& t);

}  // namespace dlmparse
