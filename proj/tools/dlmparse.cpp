// dlmparse command-line front end.
//
//   dlmparse generate     synthetic treebank from the built-in grammar
//   dlmparse train        gold treebank -> model
//   dlmparse parse        model + text -> parsed corpus
//   dlmparse extract-dlm  parsed corpus -> one DLM file per order
//   dlmparse filter-agree two parses of one text -> agreed subset
//   dlmparse eval         gold + predicted -> attachment scores
//   dlmparse sweep        train/eval grid over DLM order sets and beams
//
// Failures print a single line "dlmparse: error kind=<kind> message=<json>"
// on stderr and exit with status 1 (2 for command-line mistakes).
//
// --config FILE reads "option = value" lines grouped under [subcommand]
// headers (or written as subcommand.option = value); flags given on the
// command line win.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dlmparse/agreement.hpp"
#include "dlmparse/corpus.hpp"
#include "dlmparse/dlm.hpp"
#include "dlmparse/error.hpp"
#include "dlmparse/eval.hpp"
#include "dlmparse/features.hpp"
#include "dlmparse/model.hpp"
#include "dlmparse/parser.hpp"
#include "dlmparse/synthetic.hpp"

using namespace dlmparse;

namespace {

constexpr std::size_t kChunk = 2048;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

// Output file, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
  void close() {
    stream().flush();
    if (!stream()) throw IoError("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> orders;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    try {
      std::size_t used = 0;
      v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ContractViolation("bad order '" + item + "' in --orders " + text);
    }
    if (v < 1) throw ContractViolation("orders must be >= 1");
    if (!orders.empty() && v <= orders.back())
      throw ContractViolation("orders must be strictly increasing: " + text);
    orders.push_back(v);
  }
  if (orders.empty()) throw ContractViolation("empty --orders");
  return orders;
}

DlmSet load_dlms(const std::vector<std::string>& paths) {
  std::vector<std::shared_ptr<const DlmTable>> tables;
  for (const auto& p : paths) tables.push_back(std::make_shared<const DlmTable>(load_file(p)));
  return DlmSet(std::move(tables));
}

// Counts every order over one pass of the corpus, sharding each chunk of
// sentences across `threads` workers.
std::vector<DlmTable> build_tables(const std::string& path, const std::vector<int>& orders,
                                   UnitMode unit, std::uint64_t min_count, RootArcs root_arcs,
                                   unsigned threads, std::size_t* sentences) {
  threads = std::max(1u, threads);
  std::vector<std::vector<DlmCounter>> shards(threads);
  for (auto& shard : shards)
    for (int order : orders) shard.emplace_back(DlmConfig{order, unit, min_count, root_arcs});
  std::ifstream in = open_in(path);
  ConllReader reader(in, false, path);
  std::vector<Sentence> chunk;
  auto flush = [&] {
    auto work = [&](unsigned t) {
      for (std::size_t i = t; i < chunk.size(); i += threads)
        for (auto& counter : shards[t]) counter.add(chunk[i]);
    };
    if (threads == 1 || chunk.size() < 2) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    chunk.clear();
  };
  while (auto s = reader.next()) {
    chunk.push_back(std::move(*s));
    if (chunk.size() == kChunk) flush();
  }
  flush();
  if (sentences) *sentences = reader.sentences_read();
  std::vector<DlmTable> out;
  for (std::size_t k = 0; k < orders.size(); ++k) {
    for (unsigned t = 1; t < threads; ++t) shards[0][k].merge(shards[t][k]);
    out.push_back(shards[0][k].finish());
  }
  return out;
}

void print_table_stats(const DlmTable& t, const std::string& where) {
  const auto b = t.bucket_sizes();
  std::printf("order=%d entries=%zu PH=%zu PM=%zu PL=%zu file=%s\n", t.order(), t.size(), b[0],
              b[1], b[2], where.c_str());
  if (t.empty())
    std::fprintf(stderr,
                 "dlmparse: warning: order %d table is empty (no event reaches min-count %llu)\n",
                 t.order(), static_cast<unsigned long long>(t.config().min_count));
}

void print_epoch(const EpochStats& e, int epochs) {
  const double arcs = e.total_arcs ? 100.0 * static_cast<double>(e.correct_arcs) /
                                         static_cast<double>(e.total_arcs)
                                   : 0.0;
  std::printf("epoch %d/%d sentences=%zu updates=%zu early=%zu exact=%.2f%% arc_acc=%.2f%%\n",
              e.epoch, epochs, e.sentences, e.updates, e.early_updates, e.exact_rate(), arcs);
  std::fflush(stdout);
}

struct TrainOptions {
  std::string gold;
  std::vector<std::string> dlms;
  int beam = 40;
  int epochs = 10;
  std::uint64_t seed = 1;
  bool no_shuffle = false;
  std::string templates = "full";
  bool no_dlm_on_shift = false;
  std::string out;
};

int cmd_train(const TrainOptions& o) {
  const Treebank tb = read_conll_file(o.gold);
  const DlmSet ds = load_dlms(o.dlms);
  TrainConfig cfg;
  cfg.beam_width = o.beam;
  cfg.epochs = o.epochs;
  cfg.seed = o.seed;
  cfg.shuffle = !o.no_shuffle;
  cfg.features.templates = parse_template_set(o.templates);
  cfg.features.dlm_on_shift = !o.no_dlm_on_shift;
  cfg.on_epoch = [&](const EpochStats& e) { print_epoch(e, o.epochs); };
  TrainReport report;
  std::printf("training on %s: %zu sentences, %zu DLM(s)\n", o.gold.c_str(), tb.size(), ds.size());
  const Model m = train(tb, cfg, ds, &report);
  std::printf("used=%zu skipped_nonprojective=%zu skipped_multiroot=%zu\n", report.used,
              report.skipped_nonprojective, report.skipped_multiroot);
  save_model_file(m, o.out);
  std::printf("model written to %s (%zu weights)\n", o.out.c_str(), m.averaged.nonzero().size());
  return 0;
}

struct ParseOptions {
  std::string model;
  std::string input;
  std::vector<std::string> dlms;
  int beam = 0;
  unsigned threads = default_threads();
  std::string out = "-";
};

int cmd_parse(const ParseOptions& o) {
  const Model m = load_model_file(o.model);
  const DlmSet ds = load_dlms(o.dlms);
  check_manifest(m, ds);
  if (o.beam < 0) throw ContractViolation("--beam must be >= 1");
  std::ifstream in = open_in(o.input);
  ConllReader reader(in, true, o.input);
  Output out(o.out);
  std::vector<Sentence> chunk;
  auto flush = [&] {
    for (const auto& s : decode_all(m, chunk, o.beam, ds, o.threads)) write_sentence(out.stream(), s);
    chunk.clear();
  };
  while (auto s = reader.next()) {
    chunk.push_back(std::move(*s));
    if (chunk.size() == kChunk) flush();
  }
  flush();
  out.close();
  std::fprintf(stderr, "parsed %zu sentences\n", reader.sentences_read());
  return 0;
}

struct ExtractOptions {
  std::string input;
  std::string orders = "1";
  std::string unit = "form";
  std::uint64_t min_count = 3;
  std::string root_arcs = "include";
  unsigned threads = default_threads();
  std::string prefix;
};

int cmd_extract(const ExtractOptions& o) {
  const auto orders = parse_orders(o.orders);
  std::size_t sentences = 0;
  const auto tables = build_tables(o.input, orders, parse_unit_mode(o.unit), o.min_count,
                                   parse_root_arcs(o.root_arcs), o.threads, &sentences);
  std::printf("counted %zu sentences from %s\n", sentences, o.input.c_str());
  for (const auto& t : tables) {
    const std::string path = o.prefix + ".o" + std::to_string(t.order()) + ".dlm";
    save_file(t, path);
    print_table_stats(t, path);
  }
  return 0;
}

struct FilterOptions {
  std::string a, b;
  bool unlabeled = false;
  std::string out;
  std::string report;
};

int cmd_filter(const FilterOptions& o) {
  std::ifstream in_a = open_in(o.a), in_b = open_in(o.b);
  ConllReader ra(in_a, false, o.a), rb(in_b, false, o.b);
  AgreementFilter filter(!o.unlabeled);
  Output out(o.out);
  while (true) {
    auto a = ra.next();
    auto b = rb.next();
    if (!a && !b) break;
    if (!a || !b)
      throw AlignmentError(a ? rb.sentences_read() : ra.sentences_read(),
                           "'" + (a ? o.b : o.a) + "' has fewer sentences");
    if (filter.offer(*a, *b)) write_sentence(out.stream(), *a);
  }
  out.close();
  const AgreementReport r = filter.report();
  std::printf("%s\n%s", r.record().c_str(), r.text().c_str());
  if (!o.report.empty()) {
    Output rep(o.report);
    rep.stream() << r.record() << '\n';
    rep.close();
  }
  return 0;
}

struct EvalOptions {
  std::string gold, pred;
  std::string punct = "gold-pos";
  std::string report;
};

int cmd_eval(const EvalOptions& o) {
  std::ifstream in_g = open_in(o.gold), in_p = open_in(o.pred);
  ConllReader rg(in_g, false, o.gold), rp(in_p, false, o.pred);
  Evaluator ev(PunctConfig{parse_punct_rule(o.punct)});
  while (true) {
    auto g = rg.next();
    auto p = rp.next();
    if (!g && !p) break;
    if (!g || !p)
      throw AlignmentError(g ? rp.sentences_read() : rg.sentences_read(),
                           "'" + (g ? o.pred : o.gold) + "' has fewer sentences");
    ev.add(*g, *p);
  }
  const EvalReport r = ev.report();
  std::printf("%s\n%s", r.record().c_str(), r.text().c_str());
  if (!o.report.empty()) {
    Output rep(o.report);
    rep.stream() << r.record() << '\n';
    rep.close();
  }
  return 0;
}

struct GenerateOptions {
  std::size_t count = 200;
  std::uint64_t seed = 42;
  bool strip = false;
  std::string out = "-";
};

int cmd_generate(const GenerateOptions& o) {
  Treebank tb = SyntheticGrammar().generate(o.count, o.seed);
  if (o.strip)
    for (auto& s : tb.sentences)
      for (auto& t : s.tokens) {
        t.head = 0;
        t.deprel = "_";
      }
  Output out(o.out);
  write_conll(out.stream(), tb);
  out.close();
  return 0;
}

struct SweepOptions {
  std::string train, dev, dlm_corpus;
  std::vector<std::string> m = {"0", "1"};
  std::vector<int> beams = {8};
  int epochs = 10;
  std::uint64_t seed = 1;
  std::string templates = "full";
  std::string unit = "form";
  std::uint64_t min_count = 3;
  std::string punct = "gold-pos";
  unsigned threads = default_threads();
};

// One row per (m, beam): m = "0" is the baseline, otherwise a list of orders.
int cmd_sweep(const SweepOptions& o) {
  const Treebank train_tb = read_conll_file(o.train);
  const Treebank dev = read_conll_file(o.dev);
  std::vector<int> all_orders;
  for (const auto& m : o.m)
    if (m != "0")
      for (int order : parse_orders(m)) all_orders.push_back(order);
  std::sort(all_orders.begin(), all_orders.end());
  all_orders.erase(std::unique(all_orders.begin(), all_orders.end()), all_orders.end());
  std::vector<std::shared_ptr<const DlmTable>> by_order;
  if (!all_orders.empty()) {
    if (o.dlm_corpus.empty()) throw ContractViolation("--dlm-corpus is required when m != 0");
    for (auto& t : build_tables(o.dlm_corpus, all_orders, parse_unit_mode(o.unit), o.min_count,
                                RootArcs::Include, o.threads, nullptr))
      by_order.push_back(std::make_shared<const DlmTable>(std::move(t)));
  }
  std::printf("%-8s %5s %7s %7s\n", "m", "beam", "LAS", "UAS");
  for (const auto& m : o.m) {
    std::vector<std::shared_ptr<const DlmTable>> tables;
    if (m != "0")
      for (int order : parse_orders(m))
        for (const auto& t : by_order)
          if (t->order() == order) tables.push_back(t);
    const DlmSet ds(tables);
    for (int beam : o.beams) {
      TrainConfig cfg;
      cfg.beam_width = beam;
      cfg.epochs = o.epochs;
      cfg.seed = o.seed;
      cfg.features.templates = parse_template_set(o.templates);
      const Model model = train(train_tb, cfg, ds);
      Treebank pred;
      pred.sentences = decode_all(model, dev.sentences, beam, ds, o.threads);
      const EvalReport r = evaluate(dev, pred, PunctConfig{parse_punct_rule(o.punct)});
      std::printf("%-8s %5d %7.2f %7.2f\n", m.c_str(), beam, r.las, r.uas);
      std::fflush(stdout);
    }
  }
  return 0;
}

void report_error(const std::string& kind, const std::string& message) {
  std::fprintf(stderr, "dlmparse: error kind=%s message=%s\n", kind.c_str(),
               nlohmann::json(message).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace).c_str());
}

void add_config(CLI::App* sub) { sub->fallthrough(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam-search dependency parser with dependency language model features"};
  app.require_subcommand(1);
  app.set_config("--config", "", "settings file: [subcommand] sections of 'option = value' lines");

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "write a synthetic treebank from the built-in grammar");
  g->add_option("-n,--count", gen.count, "number of sentences")->capture_default_str();
  g->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  g->add_flag("--strip", gen.strip, "drop the annotation (HEAD 0, DEPREL _)");
  g->add_option("-o,--output", gen.out, "output file, - for stdout")->capture_default_str();
  add_config(g);

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "train a model on a gold treebank");
  t->add_option("gold", tr.gold, "gold CoNLL-X treebank")->required();
  t->add_option("--dlm", tr.dlms, "DLM file (repeatable; position = DLM index)");
  t->add_option("--beam", tr.beam, "beam width")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--epochs", tr.epochs, "training epochs")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--seed", tr.seed, "shuffle seed")->capture_default_str();
  t->add_flag("--no-shuffle", tr.no_shuffle, "keep corpus order in every epoch");
  t->add_option("--templates", tr.templates, "baseline templates: full | words_only")->capture_default_str();
  t->add_flag("--no-dlm-on-shift", tr.no_dlm_on_shift, "fire DLM templates on arc moves only");
  t->add_option("-o,--output", tr.out, "model file")->required();
  add_config(t);

  ParseOptions pa;
  auto* p = app.add_subcommand("parse", "parse a CoNLL-X corpus (HEAD may be _)");
  p->add_option("model", pa.model, "model file")->required();
  p->add_option("input", pa.input, "input CoNLL-X corpus")->required();
  p->add_option("--dlm", pa.dlms, "DLM files, in the order used for training");
  p->add_option("--beam", pa.beam, "beam width (default: the model's)");
  p->add_option("--threads", pa.threads, "worker threads")->check(CLI::PositiveNumber);
  p->add_option("-o,--output", pa.out, "output file, - for stdout")->capture_default_str();
  add_config(p);

  ExtractOptions ex;
  auto* e = app.add_subcommand("extract-dlm", "extract N-gram DLMs from a parsed corpus");
  e->add_option("input", ex.input, "parsed CoNLL-X corpus")->required();
  e->add_option("--orders", ex.orders, "comma-separated orders, e.g. 1,2,3")->capture_default_str();
  e->add_option("--unit", ex.unit, "unit: form | pos | form_pos")->capture_default_str();
  e->add_option("--min-count", ex.min_count, "drop events seen fewer times")->capture_default_str();
  e->add_option("--root-arcs", ex.root_arcs, "include | exclude")->capture_default_str();
  e->add_option("--threads", ex.threads, "worker threads")->check(CLI::PositiveNumber);
  e->add_option("-o,--output", ex.prefix, "output prefix; writes PREFIX.oN.dlm")->required();
  add_config(e);

  FilterOptions fa;
  auto* f = app.add_subcommand("filter-agree", "keep sentences two parses agree on");
  f->add_option("a", fa.a, "first parse (its annotation is kept)")->required();
  f->add_option("b", fa.b, "second parse")->required();
  f->add_flag("--unlabeled", fa.unlabeled, "compare heads only");
  f->add_option("-o,--output", fa.out, "agreed subset")->required();
  f->add_option("--report", fa.report, "also write the one-line report here");
  add_config(f);

  EvalOptions ev;
  auto* v = app.add_subcommand("eval", "attachment scores of a parse against gold");
  v->add_option("gold", ev.gold, "gold CoNLL-X")->required();
  v->add_option("pred", ev.pred, "predicted CoNLL-X")->required();
  v->add_option("--punct", ev.punct, "punctuation rule: gold-pos | unicode | none")->capture_default_str();
  v->add_option("--report", ev.report, "also write the one-line report here");
  add_config(v);

  SweepOptions sw;
  auto* s = app.add_subcommand("sweep", "train and evaluate over DLM order sets and beams");
  s->add_option("--train", sw.train, "gold training treebank")->required();
  s->add_option("--dev", sw.dev, "gold evaluation treebank")->required();
  s->add_option("--dlm-corpus", sw.dlm_corpus, "parsed corpus the DLMs are extracted from");
  s->add_option("--m", sw.m, "order sets, 0 for the baseline (e.g. --m 0 1 1,2,3)")->capture_default_str();
  s->add_option("--beams", sw.beams, "beam widths")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--epochs", sw.epochs, "training epochs")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--seed", sw.seed, "shuffle seed")->capture_default_str();
  s->add_option("--templates", sw.templates, "baseline templates: full | words_only")->capture_default_str();
  s->add_option("--unit", sw.unit, "DLM unit")->capture_default_str();
  s->add_option("--min-count", sw.min_count, "DLM min count")->capture_default_str();
  s->add_option("--punct", sw.punct, "punctuation rule")->capture_default_str();
  s->add_option("--threads", sw.threads, "worker threads")->check(CLI::PositiveNumber);
  add_config(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex_help) {
    return app.exit(ex_help);
  } catch (const CLI::CallForAllHelp& ex_help) {
    return app.exit(ex_help);
  } catch (const CLI::ParseError& err) {
    report_error("usage", err.what());
    return 2;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*t) return cmd_train(tr);
    if (*p) return cmd_parse(pa);
    if (*e) return cmd_extract(ex);
    if (*f) return cmd_filter(fa);
    if (*v) return cmd_eval(ev);
    if (*s) return cmd_sweep(sw);
  } catch (const Error& err) {
    report_error(err.kind(), err.what());
    return 1;
  } catch (const std::exception& err) {
    report_error("internal", err.what());
    return 1;
  }
  return 1;
}
