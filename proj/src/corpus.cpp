#include "dlmparse/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "dlmparse/error.hpp"

namespace dlmparse {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

void check_field(std::string_view field, const char* name) {
  if (field.empty())
    throw SerializationError(std::string("empty ") + name + " field");
  if (field.find_first_of("\t\n\r") != std::string_view::npos)
    throw SerializationError(std::string(name) + " field contains a tab or line break: '" +
                             std::string(field) + "'");
}

}  // namespace

std::string tree_violation(const Sentence& s) {
  const int n = static_cast<int>(s.size());
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.id != i + 1)
      return "token ids must be 1..n without gaps (expected " + std::to_string(i + 1) +
             ", got " + std::to_string(t.id) + ")";
    if (t.form.empty()) return "token " + std::to_string(t.id) + " has an empty form";
    if (t.head < 0 || t.head > n)
      return "token " + std::to_string(t.id) + " has out-of-range head " + std::to_string(t.head);
    if (t.head == t.id) return "token " + std::to_string(t.id) + " is its own head";
  }
  // Each token must reach the root within n steps.
  std::vector<int> state(static_cast<std::size_t>(n) + 1, 0);  // 0 new, 1 on path, 2 done
  state[0] = 2;
  for (int i = 1; i <= n; ++i) {
    int cur = i;
    std::vector<int> path;
    while (state[static_cast<std::size_t>(cur)] == 0) {
      state[static_cast<std::size_t>(cur)] = 1;
      path.push_back(cur);
      cur = s.tokens[static_cast<std::size_t>(cur - 1)].head;
    }
    if (state[static_cast<std::size_t>(cur)] == 1)
      return "cycle through token " + std::to_string(cur);
    for (int p : path) state[static_cast<std::size_t>(p)] = 2;
  }
  return {};
}

void validate(const Sentence& s, std::size_t index) {
  if (auto why = tree_violation(s); !why.empty()) throw ValidationError(index, why);
}

std::size_t root_count(const Sentence& s) {
  std::size_t roots = 0;
  for (const auto& t : s.tokens) roots += t.head == 0 ? 1 : 0;
  return roots;
}

bool is_projective(const Sentence& s) {
  // Every token strictly inside the span of an arc must have its head inside
  // the (closed) span; otherwise its own arc leaves the span and crosses.
  const int n = static_cast<int>(s.size());
  for (int d = 1; d <= n; ++d) {
    const int h = s.at(d).head;
    const int lo = std::min(h, d), hi = std::max(h, d);
    for (int k = lo + 1; k < hi; ++k) {
      const int hk = s.at(k).head;
      if (hk < lo || hk > hi) return false;
    }
  }
  return true;
}

std::optional<Sentence> ConllReader::next() {
  Sentence sent;
  std::size_t first_line = 0;
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) {
      if (sent.empty()) continue;
      break;
    }
    if (sent.empty()) first_line = line_;
    auto cols = split_tabs(line);
    if (cols.size() < 8)
      throw ParseError(line_, "expected at least 8 tab-separated columns, got " +
                                  std::to_string(cols.size()), source_);
    auto id = parse_int(cols[0]);
    if (!id) throw ParseError(line_, "non-numeric ID '" + std::string(cols[0]) + "'", source_);
    auto head = heads_optional_ && cols[6] == "_" ? std::optional<int>(0) : parse_int(cols[6]);
    if (!head) throw ParseError(line_, "non-numeric HEAD '" + std::string(cols[6]) + "'", source_);
    if (cols[1].empty()) throw ParseError(line_, "empty FORM", source_);
    Token tok;
    tok.id = *id;
    tok.form = cols[1];
    tok.lemma = cols[2];
    tok.cpos = cols[3];
    tok.pos = cols[4];
    tok.head = *head;
    tok.deprel = cols[7];
    sent.tokens.push_back(std::move(tok));
  }
  if (sent.empty()) return std::nullopt;
  if (auto why = tree_violation(sent); !why.empty())
    throw ValidationError(count_, why + " (sentence starting at line " +
                                      std::to_string(first_line) + ")", source_);
  ++count_;
  return sent;
}

Treebank read_conll(std::istream& in, const std::string& source) {
  Treebank tb;
  ConllReader reader(in, false, source);
  while (auto s = reader.next()) tb.sentences.push_back(std::move(*s));
  return tb;
}

Treebank read_conll_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  Treebank tb = read_conll(in, path);
  tb.source_tag = path;
  return tb;
}

void write_sentence(std::ostream& out, const Sentence& s) {
  for (const auto& t : s.tokens) {
    check_field(t.form, "FORM");
    check_field(t.lemma, "LEMMA");
    check_field(t.cpos, "CPOSTAG");
    check_field(t.pos, "POSTAG");
    check_field(t.deprel, "DEPREL");
    out << t.id << '\t' << t.form << '\t' << t.lemma << '\t' << t.cpos << '\t' << t.pos
        << "\t_\t" << t.head << '\t' << t.deprel << "\t_\t_\n";
  }
  out << '\n';
  if (!out) throw IoError("write failed");
}

void write_conll(std::ostream& out, const Treebank& tb) {
  for (const auto& s : tb.sentences) write_sentence(out, s);
}

void write_conll_file(const std::string& path, const Treebank& tb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_conll(out, tb);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace dlmparse
