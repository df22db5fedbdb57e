#include "dlmparse/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "dlmparse/error.hpp"
#include "dlmparse/hashing.hpp"

namespace dlmparse {

namespace {

constexpr std::string_view kMagic = "dlmparse-model";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError(line_ + 1, "unexpected end of model file");
    ++line_;
    return line;
  }

  // Reads "<key>\t<value>" and returns the value.
  std::string field(std::string_view key) {
    std::string line = next();
    auto tab = line.find('\t');
    if (tab == std::string::npos || std::string_view(line).substr(0, tab) != key)
      throw FormatError(line_, "expected field '" + std::string(key) + "'");
    return line.substr(tab + 1);
  }

  std::size_t count(std::string_view key) {
    std::string v = field(key);
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size()) throw FormatError(line_, "bad count");
    return n;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

double* SlotWeights::mutable_row(std::uint64_t key48) {
  auto it = rows_.find(key48);
  if (it == rows_.end())
    it = rows_.emplace(key48, std::vector<double>(static_cast<std::size_t>(slots_), 0.0)).first;
  return it->second.data();
}

double SlotWeights::get(FeatureId id) const {
  const int slot = feature_slot(id);
  if (slot >= slots_) return 0.0;
  const double* r = row(feature_key(id));
  return r ? r[slot] : 0.0;
}

void SlotWeights::add(FeatureId id, double delta) {
  const int slot = feature_slot(id);
  if (slot >= slots_) throw ContractViolation("feature slot out of range");
  mutable_row(feature_key(id))[slot] += delta;
}

void SlotWeights::set(FeatureId id, double value) {
  const int slot = feature_slot(id);
  if (slot >= slots_) throw ContractViolation("feature slot out of range");
  mutable_row(feature_key(id))[slot] = value;
}

std::vector<std::pair<FeatureId, double>> SlotWeights::nonzero() const {
  std::vector<std::pair<FeatureId, double>> out;
  for (const auto& [key, row] : rows_)
    for (int s = 0; s < slots_; ++s)
      if (row[static_cast<std::size_t>(s)] != 0.0)
        out.emplace_back(make_feature_id(key, s), row[static_cast<std::size_t>(s)]);
  std::sort(out.begin(), out.end());
  return out;
}

Model::Model(ModelConfig cfg, LabelSet label_set)
    : config(std::move(cfg)),
      labels(std::move(label_set)),
      weights(transition_count(labels.size())),
      averaged(transition_count(labels.size())) {}

std::vector<DlmManifestEntry> make_manifest(const DlmSet& ds) {
  std::vector<DlmManifestEntry> out;
  for (std::size_t i = 0; i < ds.size(); ++i) out.push_back({ds[i].order(), digest(ds[i])});
  return out;
}

void check_manifest(const Model& m, const DlmSet& ds) {
  if (m.dlm_manifest.size() != ds.size())
    throw ContractViolation("model was trained with " + std::to_string(m.dlm_manifest.size()) +
                            " DLM(s) but " + std::to_string(ds.size()) + " were supplied");
  const auto supplied = make_manifest(ds);
  for (std::size_t i = 0; i < supplied.size(); ++i) {
    if (!(supplied[i] == m.dlm_manifest[i]))
      throw ContractViolation("DLM #" + std::to_string(i) + " does not match the model manifest (expected order " +
                              std::to_string(m.dlm_manifest[i].order) + " digest " +
                              m.dlm_manifest[i].digest + ", got order " +
                              std::to_string(supplied[i].order) + " digest " + supplied[i].digest + ")");
  }
}

double score(const Model& m, const FeatureVector& fv, bool averaged) {
  const SlotWeights& w = averaged ? m.averaged : m.weights;
  double total = 0.0;
  for (auto id : fv.ids) total += w.get(id);
  return total;
}

void save_model(const Model& m, std::ostream& out) {
  out << kMagic << '\t' << kModelFormatVersion << '\n';
  out << "beam_width\t" << m.config.beam_width << '\n';
  out << "templates\t" << to_string(m.config.features.templates) << '\n';
  out << "dlm_on_shift\t" << (m.config.features.dlm_on_shift ? 1 : 0) << '\n';
  out << "unit_mode\t" << to_string(m.config.unit_mode) << '\n';
  out << "registry\t" << m.config.registry << '\n';
  out << "labels\t" << m.labels.size() << '\n';
  for (const auto& l : m.labels.names()) out << l << '\n';
  out << "dlms\t" << m.dlm_manifest.size() << '\n';
  for (const auto& d : m.dlm_manifest) out << d.order << '\t' << d.digest << '\n';

  // Union of raw and averaged ids, sorted.
  auto raw = m.weights.nonzero(), avg = m.averaged.nonzero();
  std::vector<FeatureId> ids;
  ids.reserve(raw.size() + avg.size());
  for (const auto& [id, v] : raw) ids.push_back(id);
  for (const auto& [id, v] : avg) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  out << "weights\t" << ids.size() << '\n';
  for (auto id : ids)
    out << to_hex(id) << '\t' << format_double(m.weights.get(id)) << '\t'
        << format_double(m.averaged.get(id)) << '\n';
  out << "end\n";
  if (!out) throw IoError("write of model failed");
}

Model load_model(std::istream& in) {
  LineReader r(in);
  {
    std::string first = r.next();
    auto tab = first.find('\t');
    if (tab == std::string::npos || std::string_view(first).substr(0, tab) != kMagic)
      throw FormatError(1, "not a dlmparse model file");
    if (first.substr(tab + 1) != std::to_string(kModelFormatVersion))
      throw VersionError("model format version " + first.substr(tab + 1) +
                         " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  ModelConfig cfg;
  cfg.beam_width = static_cast<int>(r.count("beam_width"));
  try {
    cfg.features.templates = parse_template_set(r.field("templates"));
    std::string shift = r.field("dlm_on_shift");
    if (shift != "0" && shift != "1") throw FormatError(r.line(), "dlm_on_shift must be 0 or 1");
    cfg.features.dlm_on_shift = shift == "1";
    cfg.unit_mode = parse_unit_mode(r.field("unit_mode"));
  } catch (const ContractViolation& e) {
    throw FormatError(r.line(), e.what());
  }
  cfg.registry = r.field("registry");
  if (cfg.registry != kTemplateRegistryVersion)
    throw VersionError("feature template registry '" + cfg.registry + "' is not supported");

  LabelSet labels;
  const std::size_t num_labels = r.count("labels");
  for (std::size_t i = 0; i < num_labels; ++i) labels.add(r.next());
  if (labels.size() != static_cast<int>(num_labels)) throw FormatError(r.line(), "duplicate label");

  Model m(cfg, std::move(labels));
  const std::size_t num_dlms = r.count("dlms");
  for (std::size_t i = 0; i < num_dlms; ++i) {
    std::string line = r.next();
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(r.line(), "bad DLM manifest line");
    DlmManifestEntry e;
    auto [p, ec] = std::from_chars(line.data(), line.data() + tab, e.order);
    if (ec != std::errc() || p != line.data() + tab) throw FormatError(r.line(), "bad DLM order");
    e.digest = line.substr(tab + 1);
    m.dlm_manifest.push_back(std::move(e));
  }

  const std::size_t num_weights = r.count("weights");
  for (std::size_t i = 0; i < num_weights; ++i) {
    std::string line = r.next();
    if (line.size() < 20 || line[16] != '\t') throw FormatError(r.line(), "bad weight line");
    FeatureId id = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + 16, id, 16);
    if (ec != std::errc() || p != line.data() + 16) throw FormatError(r.line(), "bad feature id");
    if (feature_slot(id) >= m.transitions()) throw FormatError(r.line(), "feature slot out of range");
    const char* raw_begin = line.c_str() + 17;
    char* end = nullptr;
    const double raw = std::strtod(raw_begin, &end);
    if (end == raw_begin || *end != '\t') throw FormatError(r.line(), "bad raw weight");
    const char* avg_begin = end + 1;
    const double avg = std::strtod(avg_begin, &end);
    if (end == avg_begin || *end != '\0') throw FormatError(r.line(), "bad averaged weight");
    if (raw != 0.0) m.weights.set(id, raw);
    if (avg != 0.0) m.averaged.set(id, avg);
  }
  if (r.next() != "end") throw FormatError(r.line(), "missing end marker");
  return m;
}

void save_model_file(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_model(m, out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return load_model(in);
  } catch (const FormatError& e) {
    throw FormatError(0, path + ": " + e.what());
  }
}

}  // namespace dlmparse
