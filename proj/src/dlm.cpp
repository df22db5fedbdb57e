#include "dlmparse/dlm.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "dlmparse/error.hpp"
#include "dlmparse/hashing.hpp"

namespace dlmparse {

namespace {

constexpr std::string_view kHeaderTag = "#dlm";

std::string escape_unit(std::string_view unit) {
  std::string out;
  out.reserve(unit.size());
  for (char c : unit) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ',': out += "\\c"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_unit(std::string_view text, std::size_t line) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (++i == text.size()) throw FormatError(line, "dangling escape in unit");
    switch (text[i]) {
      case '\\': out += '\\'; break;
      case 'c': out += ','; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      default: throw FormatError(line, std::string("unknown escape \\") + text[i]);
    }
  }
  if (out.empty()) throw FormatError(line, "empty unit");
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename Int>
bool parse_uint(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool rank_before(const NGramKey& ka, const DlmEntry& a, const NGramKey& kb, const DlmEntry& b) {
  if (a.prob != b.prob) return a.prob > b.prob;
  if (a.count != b.count) return a.count > b.count;
  return ka < kb;
}

// Context of an event: the key without its child.
struct ContextHash {
  std::size_t operator()(const NGramKey& k) const noexcept { return NGramKeyHash{}(k); }
};

NGramKey context_of(const NGramKey& k) {
  NGramKey c = k;
  c.child_unit.clear();
  return c;
}

}  // namespace

std::string_view to_string(UnitMode m) {
  switch (m) {
    case UnitMode::Form: return "form";
    case UnitMode::Pos: return "pos";
    case UnitMode::FormPos: return "form_pos";
  }
  return "?";
}

std::string_view to_string(BucketClass c) {
  switch (c) {
    case BucketClass::PH: return "PH";
    case BucketClass::PM: return "PM";
    case BucketClass::PL: return "PL";
    case BucketClass::PO: return "PO";
    case BucketClass::PU: return "PU";
  }
  return "?";
}

std::string_view to_string(RootArcs r) {
  return r == RootArcs::Include ? "include" : "exclude";
}

UnitMode parse_unit_mode(std::string_view s) {
  if (s == "form") return UnitMode::Form;
  if (s == "pos") return UnitMode::Pos;
  if (s == "form_pos") return UnitMode::FormPos;
  throw ContractViolation("unknown unit mode '" + std::string(s) + "'");
}

BucketClass parse_bucket_class(std::string_view s) {
  for (auto c : {BucketClass::PH, BucketClass::PM, BucketClass::PL, BucketClass::PO,
                 BucketClass::PU})
    if (to_string(c) == s) return c;
  throw ContractViolation("unknown bucket class '" + std::string(s) + "'");
}

RootArcs parse_root_arcs(std::string_view s) {
  if (s == "include") return RootArcs::Include;
  if (s == "exclude") return RootArcs::Exclude;
  throw ContractViolation("unknown root-arc policy '" + std::string(s) + "'");
}

std::string unit_of(const Token& t, UnitMode mode) {
  auto lower = [](std::string s) {
    for (char& c : s)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
  };
  std::string pos = t.pos.empty() ? "_" : t.pos;
  switch (mode) {
    case UnitMode::Form: return lower(t.form);
    case UnitMode::Pos: return pos;
    case UnitMode::FormPos: return lower(t.form) + "/" + pos;
  }
  return {};
}

std::string unit_at(const Sentence& s, int index, UnitMode mode) {
  return index == 0 ? std::string(kRootUnit) : unit_of(s.at(index), mode);
}

std::size_t NGramKeyHash::operator()(const NGramKey& k) const noexcept {
  FieldHasher h;
  h.add(static_cast<std::uint64_t>(k.order)).add(static_cast<std::uint64_t>(k.side));
  h.add(k.head_unit);
  for (const auto& p : k.prev_units) h.add(p);
  h.add(k.child_unit);
  return static_cast<std::size_t>(h.value());
}

NGramKey make_key(int order, Side side, std::string head_unit,
                  const std::vector<std::string>& siblings_from_child, std::string child_unit) {
  NGramKey key;
  key.order = order;
  key.side = side;
  key.head_unit = std::move(head_unit);
  key.child_unit = std::move(child_unit);
  const std::size_t want = static_cast<std::size_t>(order - 1);
  const std::size_t have = std::min(want, siblings_from_child.size());
  key.prev_units.reserve(want);
  for (std::size_t i = have; i < want; ++i) key.prev_units.emplace_back(kBoundaryUnit);
  for (std::size_t i = 0; i < have; ++i) key.prev_units.push_back(siblings_from_child[i]);
  return key;
}

std::vector<NGramKey> extract_events(const Sentence& s, int order, UnitMode mode,
                                     RootArcs root_arcs) {
  const int n = static_cast<int>(s.size());
  // Dependents of every head in sentence order.
  std::vector<std::vector<int>> deps(static_cast<std::size_t>(n) + 1);
  for (const auto& t : s.tokens) deps[static_cast<std::size_t>(t.head)].push_back(t.id);

  std::vector<NGramKey> events;
  events.reserve(s.size());
  std::vector<std::string> siblings;
  for (int h = 0; h <= n; ++h) {
    if (h == 0 && root_arcs == RootArcs::Exclude) continue;
    const auto& ds = deps[static_cast<std::size_t>(h)];
    if (ds.empty()) continue;
    const std::string head_unit = unit_at(s, h, mode);
    // Position of the first right dependent.
    const auto split_at = static_cast<std::size_t>(
        std::lower_bound(ds.begin(), ds.end(), h) - ds.begin());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      siblings.clear();
      const bool left = i < split_at;
      if (left) {
        for (std::size_t j = i + 1; j < split_at && siblings.size() + 1 < static_cast<std::size_t>(order); ++j)
          siblings.push_back(unit_at(s, ds[j], mode));
      } else {
        for (std::size_t j = i; j-- > split_at && siblings.size() + 1 < static_cast<std::size_t>(order);)
          siblings.push_back(unit_at(s, ds[j], mode));
      }
      events.push_back(make_key(order, left ? Side::Left : Side::Right, head_unit, siblings,
                                unit_at(s, ds[i], mode)));
    }
  }
  return events;
}

const DlmEntry* DlmTable::find(const NGramKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

BucketClass DlmTable::lookup(const NGramKey& key) const {
  if (key.order != config_.order)
    throw ContractViolation("lookup of an order-" + std::to_string(key.order) +
                            " key in an order-" + std::to_string(config_.order) + " table");
  const DlmEntry* e = find(key);
  return e ? e->cls : BucketClass::PO;
}

std::vector<std::pair<const NGramKey*, const DlmEntry*>> DlmTable::ranked() const {
  std::vector<std::pair<const NGramKey*, const DlmEntry*>> out;
  out.reserve(entries_.size());
  for (const auto& [k, e] : entries_) out.emplace_back(&k, &e);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return rank_before(*a.first, *a.second, *b.first, *b.second);
  });
  return out;
}

std::array<std::size_t, 3> DlmTable::bucket_sizes() const {
  std::array<std::size_t, 3> sizes{};
  for (const auto& [k, e] : entries_)
    if (e.cls <= BucketClass::PL) ++sizes[static_cast<std::size_t>(e.cls)];
  return sizes;
}

BucketClass lookup(const DlmTable& t, const NGramKey& key) { return t.lookup(key); }

void DlmCounter::add(const Sentence& s) {
  for (auto& key : extract_events(s, config_.order, config_.unit_mode, config_.root_arcs))
    ++counts_[std::move(key)];
}

void DlmCounter::add(const NGramKey& key, std::uint64_t count) { counts_[key] += count; }

void DlmCounter::merge(const DlmCounter& other) {
  if (!(other.config_ == config_)) throw ContractViolation("merging counters with different configs");
  for (const auto& [k, c] : other.counts_) counts_[k] += c;
}

DlmTable DlmCounter::finish() const {
  DlmTable::Map kept;
  std::unordered_map<NGramKey, std::uint64_t, ContextHash> totals;
  for (const auto& [k, c] : counts_) {
    if (c < config_.min_count) continue;
    kept.emplace(k, DlmEntry{c, 0.0, BucketClass::PL});
    totals[context_of(k)] += c;
  }
  for (auto& [k, e] : kept)
    e.prob = static_cast<double>(e.count) / static_cast<double>(totals.at(context_of(k)));
  return assign_buckets(DlmTable(config_, std::move(kept)));
}

DlmTable build(const Treebank& tb, const DlmConfig& config, unsigned threads) {
  if (config.order < 1) throw ContractViolation("DLM order must be >= 1");
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tb.size())));
  if (threads <= 1) {
    DlmCounter counter(config);
    for (const auto& s : tb.sentences) counter.add(s);
    return counter.finish();
  }
  std::vector<DlmCounter> shards(threads, DlmCounter(config));
  std::vector<std::thread> workers;
  const std::size_t per = (tb.size() + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      const std::size_t begin = w * per, end = std::min(tb.size(), begin + per);
      for (std::size_t i = begin; i < end; ++i) shards[w].add(tb.sentences[i]);
    });
  }
  for (auto& t : workers) t.join();
  for (unsigned w = 1; w < threads; ++w) shards[0].merge(shards[w]);
  return shards[0].finish();
}

DlmTable assign_buckets(DlmTable t) {
  if (t.empty()) return t;
  auto order = t.ranked();
  const std::size_t k = order.size();
  const std::size_t high = high_bucket_size(k), mid = high_and_mid_bucket_size(k);
  auto& entries = t.mutable_entries();
  for (std::size_t r = 0; r < k; ++r) {
    const BucketClass cls = r < high ? BucketClass::PH : (r < mid ? BucketClass::PM : BucketClass::PL);
    entries.find(*order[r].first)->second.cls = cls;
  }
  return t;
}

void save(const DlmTable& t, std::ostream& out) {
  const auto& cfg = t.config();
  out << kHeaderTag << "\torder=" << cfg.order << "\tunit_mode=" << to_string(cfg.unit_mode)
      << "\tmin_count=" << cfg.min_count << "\troot_arcs=" << to_string(cfg.root_arcs)
      << "\tentries=" << t.size() << '\n';
  char prob[40];
  for (const auto& [key, entry] : t.ranked()) {
    out << key->order << '\t' << (key->side == Side::Left ? 'L' : 'R') << '\t'
        << escape_unit(key->head_unit) << '\t';
    for (std::size_t i = 0; i < key->prev_units.size(); ++i) {
      if (i) out << ',';
      out << escape_unit(key->prev_units[i]);
    }
    std::snprintf(prob, sizeof prob, "%.17g", entry->prob);
    out << '\t' << escape_unit(key->child_unit) << '\t' << entry->count << '\t' << prob << '\t'
        << to_string(entry->cls) << '\n';
  }
  if (!out) throw IoError("write of DLM table failed");
}

DlmTable load(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw FormatError(1, "missing DLM header");
  auto header = split(line, '\t');
  if (header.empty() || header[0] != kHeaderTag) throw FormatError(1, "not a DLM table header");
  DlmConfig cfg;
  std::size_t expected = 0;
  bool have_order = false, have_entries = false;
  for (std::size_t i = 1; i < header.size(); ++i) {
    auto eq = header[i].find('=');
    if (eq == std::string_view::npos) throw FormatError(1, "malformed header field");
    auto key = header[i].substr(0, eq), value = header[i].substr(eq + 1);
    try {
      if (key == "order") {
        if (!parse_uint(value, cfg.order) || cfg.order < 1) throw FormatError(1, "bad order");
        have_order = true;
      } else if (key == "unit_mode") {
        cfg.unit_mode = parse_unit_mode(value);
      } else if (key == "min_count") {
        if (!parse_uint(value, cfg.min_count)) throw FormatError(1, "bad min_count");
      } else if (key == "root_arcs") {
        cfg.root_arcs = parse_root_arcs(value);
      } else if (key == "entries") {
        if (!parse_uint(value, expected)) throw FormatError(1, "bad entry count");
        have_entries = true;
      } else {
        throw FormatError(1, "unknown header field '" + std::string(key) + "'");
      }
    } catch (const ContractViolation& e) {
      throw FormatError(1, e.what());
    }
  }
  if (!have_order || !have_entries) throw FormatError(1, "header lacks order or entries");

  DlmTable::Map entries;
  entries.reserve(expected);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw FormatError(line_no, "empty line");
    auto cols = split(line, '\t');
    if (cols.size() != 8) throw FormatError(line_no, "expected 8 tab-separated fields");
    NGramKey key;
    if (!parse_uint(cols[0], key.order) || key.order != cfg.order)
      throw FormatError(line_no, "entry order does not match header");
    if (cols[1] == "L") key.side = Side::Left;
    else if (cols[1] == "R") key.side = Side::Right;
    else throw FormatError(line_no, "bad side '" + std::string(cols[1]) + "'");
    key.head_unit = unescape_unit(cols[2], line_no);
    if (cfg.order > 1)
      for (auto p : split(cols[3], ',')) key.prev_units.push_back(unescape_unit(p, line_no));
    else if (!cols[3].empty())
      throw FormatError(line_no, "unigram entry with previous children");
    if (key.prev_units.size() != static_cast<std::size_t>(cfg.order - 1))
      throw FormatError(line_no, "wrong number of previous children");
    key.child_unit = unescape_unit(cols[4], line_no);
    DlmEntry e;
    if (!parse_uint(cols[5], e.count) || e.count < cfg.min_count)
      throw FormatError(line_no, "bad count");
    std::string prob_text(cols[6]);
    char* end = nullptr;
    e.prob = std::strtod(prob_text.c_str(), &end);
    if (prob_text.empty() || *end != '\0' || !(e.prob > 0.0 && e.prob <= 1.0))
      throw FormatError(line_no, "bad probability");
    if (cols[7] == "PH") e.cls = BucketClass::PH;
    else if (cols[7] == "PM") e.cls = BucketClass::PM;
    else if (cols[7] == "PL") e.cls = BucketClass::PL;
    else throw FormatError(line_no, "unknown class '" + std::string(cols[7]) + "'");
    if (!entries.emplace(std::move(key), e).second) throw FormatError(line_no, "duplicate entry");
  }
  if (entries.size() != expected)
    throw FormatError(0, "header declares " + std::to_string(expected) + " entries, found " +
                             std::to_string(entries.size()));
  return DlmTable(cfg, std::move(entries));
}

void save_file(const DlmTable& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save(t, out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

DlmTable load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return load(in);
  } catch (const FormatError& e) {
    throw FormatError(0, path + ": " + e.what());
  }
}

std::string serialize(const DlmTable& t) {
  std::ostringstream out;
  save(t, out);
  return out.str();
}

std::string digest(const DlmTable& t) { return digest_hex(serialize(t)); }

}  // namespace dlmparse
