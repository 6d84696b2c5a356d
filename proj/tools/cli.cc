// Copyright 2026 The phonekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "phonekit/beam_search.h"
#include "phonekit/ctc.h"
#include "phonekit/error.h"
#include "phonekit/feature_table.h"
#include "phonekit/g2p_refine.h"
#include "phonekit/ipa.h"
#include "phonekit/metrics.h"
#include "phonekit/multitask.h"
#include "phonekit/sweep.h"

#ifndef PHONEKIT_VERSION
#define PHONEKIT_VERSION "0.0.0"
#endif

namespace phonekit::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// An input or output stream that is either a file or one of the process
// streams.
class Input {
 public:
  Input(const std::string& path, std::istream& fallback) : path_(path) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file_) throw IoError("cannot open " + path);
      stream_ = file_.get();
    }
  }
  std::istream& get() { return *stream_; }
  const std::string& name() const { return path_; }
  void CheckRead() const {
    if (stream_->bad()) throw IoError("read failed: " + path_);
  }

 private:
  std::string path_;
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw IoError("cannot create " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }
  void Close() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed: " + path_);
    if (file_) file_->close();
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

unsigned DefaultJobs() {
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string TablePath(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kFeatureTableEnv); env && *env) return env;
  return "";
}

void PrintTableWarnings(const std::vector<TableWarning>& warnings,
                        const std::string& path, std::ostream& err) {
  for (const auto& w : warnings) {
    err << "warning: " << path << ": row " << w.row << ": " << w.message
        << '\n';
  }
}

// Flag, then environment, then the built-in table.
FeatureTable LoadTable(const std::string& flag, std::ostream& err) {
  const std::string path = TablePath(flag);
  if (path.empty()) return FeatureTable::Fixture();
  std::vector<TableWarning> warnings;
  FeatureTable t = FeatureTable::LoadFile(path, &warnings);
  PrintTableWarnings(warnings, path, err);
  return t;
}

// Only an explicitly configured table; nullopt otherwise.
std::optional<FeatureTable> LoadOptionalTable(const std::string& flag,
                                              std::ostream& err) {
  if (TablePath(flag).empty()) return std::nullopt;
  return LoadTable(flag, err);
}

MarkClassTable LoadMarks(const std::string& path, std::istream& in) {
  if (path.empty()) return MarkClassTable::Default();
  Input input(path, in);
  MarkClassTable t = MarkClassTable::Load(input.get());
  input.CheckRead();
  return t;
}

// Shortest text that reads back as the same double.
std::string FormatDouble(double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

ordered_json JsonDouble(double v) {
  if (std::isinf(v) || std::isnan(v)) return nullptr;
  return v;
}

// Tokenizes one line; on failure prints "<source>:<line>:<col>: message".
std::optional<PhoneSequence> TokenizeLine(const std::string& text,
                                          const MarkClassTable& marks,
                                          bool lenient,
                                          const std::string& where,
                                          std::ostream& err) {
  std::vector<SkippedScalar> skipped;
  try {
    PhoneSequence seq =
        Tokenize(text, marks, TokenizeOptions{lenient}, &skipped);
    for (const auto& s : skipped) {
      err << "warning: " << where << ':' << s.index + 1 << ": skipped "
          << s.reason << '\n';
    }
    return seq;
  } catch (const TokenizeError& e) {
    err << where << ':' << e.index() + 1 << ": " << e.what() << '\n';
  } catch (const EncodingError& e) {
    err << where << ": byte " << e.position() << ": " << e.what() << '\n';
  }
  return std::nullopt;
}

// tokenize / strip ----------------------------------------------------------

struct LineOptions {
  std::string input = "-";
  std::string output = "-";
  std::string mark_classes;
  bool jsonl = false;
  bool lenient = false;
  bool syllables = false;
  bool words = false;
  bool strip_tones = false;
};

void AddLineOptions(CLI::App* cmd, LineOptions& o) {
  cmd->add_option("input", o.input, "IPA lines, or utterance JSONL with --jsonl")
      ->capture_default_str();
  cmd->add_option("-o,--output", o.output, "Output path")->capture_default_str();
  cmd->add_option("--mark-classes", o.mark_classes,
                  "Mark-class override file (U+XXXX<TAB>class)");
  cmd->add_flag("--jsonl", o.jsonl, "Read utterance records and emit id<TAB>tokens");
  cmd->add_flag("--lenient", o.lenient, "Skip unknown scalars instead of failing");
  cmd->add_flag("--syllable-boundaries", o.syllables, "Render syllable boundaries");
  cmd->add_flag("--word-boundaries", o.words, "Render word boundaries as #");
}

int RunLines(const LineOptions& o, bool strip, Io io) {
  const MarkClassTable marks = LoadMarks(o.mark_classes, io.in);
  Input input(o.input, io.in);
  Output output(o.output, io.out);
  const RenderOptions render{o.syllables, o.words};
  const std::string source = o.input == "-" ? "<stdin>" : o.input;

  std::size_t failures = 0;
  auto emit = [&](const std::string& prefix, const std::string& text,
                  const std::string& where) {
    auto seq = TokenizeLine(text, marks, o.lenient, where, io.err);
    if (!seq) {
      ++failures;
      return;
    }
    if (strip) {
      *seq = StripSuprasegmentals(*seq, marks, StripOptions{o.strip_tones});
    }
    output.get() << prefix << RenderSlash(*seq, render) << '\n';
  };

  if (o.jsonl) {
    CorpusReader reader(input.get());
    while (auto rec = reader.Next()) {
      const std::string where = source + ':' + std::to_string(reader.line());
      if (const auto* e = std::get_if<RecordError>(&*rec)) {
        io.err << where << ": " << e->message << '\n';
        ++failures;
        continue;
      }
      const auto& utt = std::get<Utterance>(*rec);
      emit(utt.id + '\t', utt.ipa, where);
    }
  } else {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input.get(), line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      emit("", line, source + ':' + std::to_string(line_no));
    }
  }
  input.CheckRead();
  output.Close();
  if (failures > 0) {
    io.err << "error: " << failures << " line(s) failed\n";
    return kExitDomain;
  }
  return kExitOk;
}

// refine-g2p -----------------------------------------------------------------

struct RefineCmd {
  std::string input = "-";
  std::string output = "-";
  std::string pipeline{kEnglishPipelineName};
  std::string feature_table;
  bool slash = false;
  bool trace = false;
};

int RunRefine(const RefineCmd& o, Io io) {
  if (o.pipeline != kEnglishPipelineName) {
    throw Error("unknown pipeline \"" + o.pipeline + "\" (available: " +
                std::string(kEnglishPipelineName) + ")");
  }
  const auto table = LoadOptionalTable(o.feature_table, io.err);
  RefineOptions options;
  if (table) options.table = &*table;

  Input input(o.input, io.in);
  Output output(o.output, io.out);
  const std::string source = o.input == "-" ? "<stdin>" : o.input;
  std::size_t failures = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input.get(), line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = source + ':' + std::to_string(line_no);
    auto seq = TokenizeLine(line, MarkClassTable::Default(), false, where,
                            io.err);
    if (!seq) {
      ++failures;
      continue;
    }
    std::vector<RuleApplication> applied;
    const PhoneSequence refined = RefineEnglish(*seq, options, &applied);
    output.get() << (o.slash ? RenderSlash(refined) : refined.Spell()) << '\n';
    if (o.trace) {
      for (const auto& a : applied) {
        io.err << where << ": rule " << static_cast<int>(a.rule) << " at phone "
               << a.position << '\n';
      }
    }
  }
  input.CheckRead();
  output.Close();
  if (failures > 0) {
    io.err << "error: " << failures << " line(s) failed\n";
    return kExitDomain;
  }
  return kExitOk;
}

// score ----------------------------------------------------------------------

struct ScoreCmd {
  std::string hyp;
  std::string ref;
  std::string output = "-";
  std::string metric = "pfer";
  std::string feature_table;
  std::string fallback = "strip-marks";
  std::string mark_classes;
  bool macro = false;
  bool json = false;
  bool strict = false;
  int digits = 6;
  unsigned jobs = DefaultJobs();
};

struct PairLine {
  std::string id;
  std::optional<std::string> lang;
  std::string text;
};

// "id<TAB>text" or "id<TAB>lang<TAB>text"; blank lines are skipped.
std::map<std::string, PairLine> ReadPairFile(const std::string& path,
                                             std::istream& stdin_stream) {
  Input input(path, stdin_stream);
  std::map<std::string, PairLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input.get(), line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = path + ':' + std::to_string(line_no);
    PairLine p;
    if (cols.size() == 2) {
      p = {cols[0], std::nullopt, cols[1]};
    } else if (cols.size() == 3) {
      p = {cols[0], cols[1], cols[2]};
    } else {
      throw Error(where + ": expected 2 or 3 tab-separated columns");
    }
    if (p.id.empty()) throw Error(where + ": empty id");
    if (!out.emplace(p.id, p).second) {
      throw Error(where + ": duplicate id " + p.id);
    }
  }
  input.CheckRead();
  return out;
}

int RunScore(const ScoreCmd& o, Io io) {
  const auto metric = ParseMetric(o.metric);
  if (!metric) throw Error("unknown metric \"" + o.metric + "\"");
  LookupFallback fallback;
  if (o.fallback == "strip-marks") {
    fallback = LookupFallback::kStripMarks;
  } else if (o.fallback == "error") {
    fallback = LookupFallback::kError;
  } else {
    throw Error("unknown fallback \"" + o.fallback + "\"");
  }
  if (o.hyp == "-" && o.ref == "-") {
    throw Error("hypotheses and references cannot both come from stdin");
  }

  const auto hyps = ReadPairFile(o.hyp, io.in);
  const auto refs = ReadPairFile(o.ref, io.in);
  std::vector<std::string> unpaired;
  for (const auto& [id, _] : hyps) {
    if (!refs.contains(id)) unpaired.push_back(id + " (no reference)");
  }
  for (const auto& [id, _] : refs) {
    if (!hyps.contains(id)) unpaired.push_back(id + " (no hypothesis)");
  }
  if (!unpaired.empty()) {
    for (const auto& u : unpaired) io.err << "unpaired id: " << u << '\n';
    throw Error(std::to_string(unpaired.size()) + " unpaired id(s)");
  }

  std::optional<FeatureTable> table;
  if (*metric == Metric::kPfer) table = LoadTable(o.feature_table, io.err);
  const MarkClassTable marks = LoadMarks(o.mark_classes, io.in);

  std::vector<ScorePair> pairs;
  for (const auto& [id, ref] : refs) {
    const PairLine& hyp = hyps.at(id);
    const std::string lang = ref.lang.value_or(hyp.lang.value_or("unk"));
    pairs.push_back({id, lang, hyp.text, ref.text});
  }
  CorpusOptions options;
  options.metric = *metric;
  options.table = table ? &*table : nullptr;
  options.marks = &marks;
  options.fallback = fallback;
  options.lenient_hypotheses = !o.strict;
  options.jobs = std::max(1u, o.jobs);
  const CorpusScore score = ScoreCorpus(pairs, options);

  Output output(o.output, io.out);
  const ReportOptions report{o.macro, o.digits};
  if (o.json) {
    WriteJsonReport(score, output.get(), report);
  } else {
    WriteTsvReport(score, output.get(), report);
  }
  output.Close();
  for (const auto& f : score.failures) {
    io.err << "failed: " << f.id << ": " << f.message << '\n';
  }
  return score.failures.empty() ? kExitOk : kExitDomain;
}

// make-manifests -------------------------------------------------------------

struct ManifestCmd {
  std::string corpus;
  std::string out_dir;
  std::string subwords;
  std::string mark_classes;
  std::string feature_table;
  std::vector<std::string> lang_blocklist;
  std::size_t max_phones = kDefaultMaxPhones;
  std::optional<double> min_duration;
  std::optional<double> max_duration;
  bool refine_english = false;
  bool strip_tones = false;
};

std::vector<std::string> ReadLines(const std::string& path, std::istream& in) {
  Input input(path, in);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(input.get(), line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  input.CheckRead();
  return lines;
}

int RunManifests(const ManifestCmd& o, Io io) {
  const MarkClassTable marks = LoadMarks(o.mark_classes, io.in);
  const auto table = LoadOptionalTable(o.feature_table, io.err);
  std::vector<std::string> subwords;
  if (!o.subwords.empty()) subwords = ReadLines(o.subwords, io.in);
  const GraphemeTokenizer graphemes(subwords);

  FilterOptions filter;
  filter.max_phones = o.max_phones;
  filter.lang_blocklist.insert(o.lang_blocklist.begin(), o.lang_blocklist.end());
  filter.min_duration_s = o.min_duration;
  filter.max_duration_s = o.max_duration;
  filter.marks = &marks;
  UtteranceFilter utterance_filter(filter);

  ExampleOptions examples;
  examples.refine_english = o.refine_english;
  if (table) examples.refine.table = &*table;
  examples.strip.strip_tones = o.strip_tones;
  examples.marks = &marks;
  examples.graphemes = &graphemes;
  VocabularyBuilder vocab(examples);

  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw IoError("cannot create " + o.out_dir + ": " + ec.message());
  const fs::path dir(o.out_dir);

  Input input(o.corpus, io.in);
  Output out_examples((dir / "examples.jsonl").string(), io.out);
  const std::string source = o.corpus == "-" ? "<stdin>" : o.corpus;
  std::size_t schema_errors = 0;
  std::size_t build_errors = 0;
  CorpusReader reader(input.get());
  while (auto rec = reader.Next()) {
    if (const auto* e = std::get_if<RecordError>(&*rec)) {
      io.err << source << ':' << e->line << ": " << e->message << '\n';
      ++schema_errors;
      continue;
    }
    const auto& utt = std::get<Utterance>(*rec);
    if (utterance_filter.Check(utt)) continue;
    try {
      const auto built = BuildExamples(utt, examples);
      vocab.Add(utt);
      for (const auto& ex : built) out_examples.get() << ExampleToJson(ex) << '\n';
    } catch (const Error& e) {
      io.err << source << ':' << reader.line() << ": " << e.what() << '\n';
      ++build_errors;
    }
  }
  input.CheckRead();
  out_examples.Close();

  Output out_drops((dir / "drops.tsv").string(), io.out);
  utterance_filter.report().WriteTsv(out_drops.get());
  out_drops.Close();

  Output out_vocab((dir / "vocab.txt").string(), io.out);
  vocab.Finish(subwords).Write(out_vocab.get());
  out_vocab.Close();

  const DropReport& report = utterance_filter.report();
  io.err << "kept " << report.kept << " of " << report.seen
         << " utterance(s), wrote " << 4 * (report.kept - build_errors)
         << " example(s)\n";
  if (schema_errors + build_errors > 0) {
    io.err << "error: " << schema_errors << " schema error(s), "
           << build_errors << " build error(s)\n";
    return kExitDomain;
  }
  return kExitOk;
}


// ctc-loss -------------------------------------------------------------------

struct CtcLossCmd {
  std::string logprobs;
  std::vector<int> target;
  std::optional<double> att_nll;
  double alpha = kDefaultCtcLossWeight;
  std::string output = "-";
  bool json = false;
};

int RunCtcLoss(const CtcLossCmd& o, Io io) {
  const LogProbMatrix m = LoadLogProbFile(o.logprobs);
  const double ctc = CtcForwardLoss(m, o.target);
  std::optional<double> hybrid;
  if (o.att_nll) hybrid = HybridLoss(ctc, *o.att_nll, o.alpha);

  Output output(o.output, io.out);
  if (o.json) {
    ordered_json j;
    j["ctc_nll"] = JsonDouble(ctc);
    if (hybrid) {
      j["att_nll"] = JsonDouble(*o.att_nll);
      j["alpha"] = o.alpha;
      j["hybrid"] = JsonDouble(*hybrid);
    }
    output.get() << j.dump() << '\n';
  } else {
    output.get() << "ctc_nll\t" << FormatDouble(ctc) << '\n';
    if (hybrid) {
      output.get() << "att_nll\t" << FormatDouble(*o.att_nll) << '\n'
                   << "alpha\t" << FormatDouble(o.alpha) << '\n'
                   << "hybrid\t" << FormatDouble(*hybrid) << '\n';
    }
  }
  output.Close();
  return kExitOk;
}

// decode / sweep -------------------------------------------------------------

struct DecoderSetup {
  std::string scorer;
  std::string vocab;
  std::string lang_token = "<unk>";
  std::string task_token = "<pr>";
  std::size_t max_len = 0;
  unsigned jobs = DefaultJobs();
};

void AddDecoderOptions(CLI::App* cmd, DecoderSetup& o) {
  cmd->add_option("--scorer", o.scorer, "Table-driven attention scorer (JSON)");
  cmd->add_option("--vocab", o.vocab,
                  "Token list, one per line (defaults to the scorer's)");
  cmd->add_option("--lang-token", o.lang_token, "Language token in the prompt")
      ->capture_default_str();
  cmd->add_option("--task-token", o.task_token, "Task token in the prompt")
      ->capture_default_str();
  cmd->add_option("--max-len", o.max_len, "Longest output (0: frame count)")
      ->capture_default_str();
  cmd->add_option("-j,--jobs", o.jobs, "Worker threads");
}

struct LoadedDecoder {
  std::optional<TableScorer> scorer;
  std::vector<std::string> vocab;
  std::vector<std::string> prompt;
};

LoadedDecoder LoadDecoder(const DecoderSetup& o, std::istream& in) {
  LoadedDecoder d;
  if (!o.scorer.empty()) {
    d.scorer = TableScorer::LoadFile(o.scorer);
    d.vocab = d.scorer->vocab();
  }
  if (!o.vocab.empty()) {
    d.vocab = ReadLines(o.vocab, in);
    if (d.scorer && d.vocab.size() != d.scorer->vocab_size()) {
      throw Error("vocabulary file and scorer disagree on size");
    }
  }
  if (d.vocab.empty()) throw Error("decoding needs --scorer or --vocab");
  d.prompt = {o.lang_token, o.task_token};
  return d;
}

struct DecodeCmd {
  std::vector<std::string> logprobs;
  DecoderSetup setup;
  double ctc_weight = kDefaultCtcDecodeWeight;
  std::size_t beam = kDefaultBeamSize;
  std::size_t nbest = 0;
  bool length_normalize = false;
  std::string output = "-";
};

int RunDecode(const DecodeCmd& o, Io io) {
  const LoadedDecoder d = LoadDecoder(o.setup, io.in);
  DecodeOptions options;
  options.ctc_weight = o.ctc_weight;
  options.beam = o.beam;
  options.max_len = o.setup.max_len;
  options.nbest = o.nbest;
  options.length_normalize = o.length_normalize;
  options.prompt = d.prompt;

  // Outputs are ordered by id, the file stem.
  std::map<std::string, std::string> files;
  for (const auto& path : o.logprobs) {
    const std::string id = fs::path(path).stem().string();
    if (!files.emplace(id, path).second) {
      throw Error("two log-prob files share the id " + id);
    }
  }
  std::vector<std::pair<std::string, std::string>> work(files.begin(),
                                                        files.end());
  std::vector<std::string> lines(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  const AttentionScorer* scorer = d.scorer ? &*d.scorer : nullptr;
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < work.size(); i += stride) {
      try {
        const LogProbMatrix m = LoadLogProbFile(work[i].second);
        if (m.vocab() != d.vocab.size()) {
          throw Error(work[i].second + ": vocabulary size " +
                      std::to_string(m.vocab()) + " does not match " +
                      std::to_string(d.vocab.size()));
        }
        DecodeResult r;
        try {
          r = JointBeamSearch(m, scorer, options);
        } catch (const Error& e) {
          throw Error(work[i].second + ": " + e.what());
        }
        ordered_json j;
        j["id"] = work[i].first;
        j["finished"] = r.finished;
        auto nbest = ordered_json::array();
        for (const Hypothesis& h : r.nbest) {
          ordered_json e;
          e["tokens"] = h.tokens;
          e["text"] = HypothesisText(h.tokens, d.vocab);
          e["score"] = JsonDouble(h.score);
          e["ctc_score"] = JsonDouble(h.ctc_score);
          e["att_score"] = JsonDouble(h.att_score);
          e["finished"] = h.finished;
          nbest.push_back(std::move(e));
        }
        j["nbest"] = std::move(nbest);
        lines[i] = j.dump();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n =
      std::max<std::size_t>(1, std::min<std::size_t>(o.setup.jobs, work.size()));
  {
    std::vector<std::jthread> threads;
    for (std::size_t k = 1; k < n; ++k) threads.emplace_back(run, k, n);
    run(0, n);
  }
  // The first failure in id order wins, so the reported error is stable.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Output output(o.output, io.out);
  for (const auto& line : lines) output.get() << line << '\n';
  output.Close();
  return kExitOk;
}

struct SweepCmd {
  std::string manifest;
  DecoderSetup setup;
  std::vector<double> ctc_weights{0.3, 0.7, 0.9};
  std::vector<std::size_t> beams{kDefaultBeamSize};
  std::string metric = "pfer";
  std::string feature_table;
  std::string output = "-";
  bool json = false;
  int digits = 6;
};

int RunSweep(const SweepCmd& o, Io io) {
  const auto metric = ParseMetric(o.metric);
  if (!metric) throw Error("unknown metric \"" + o.metric + "\"");
  const LoadedDecoder d = LoadDecoder(o.setup, io.in);
  std::optional<FeatureTable> table;
  if (*metric == Metric::kPfer) table = LoadTable(o.feature_table, io.err);

  Input input(o.manifest, io.in);
  const fs::path base =
      o.manifest == "-" ? fs::current_path() : fs::path(o.manifest).parent_path();
  const auto utterances = ReadSweepManifest(input.get(), base);
  input.CheckRead();

  SweepOptions options;
  options.ctc_weights = o.ctc_weights;
  options.beams = o.beams;
  options.max_len = o.setup.max_len;
  options.prompt = d.prompt;
  options.metric = *metric;
  options.table = table ? &*table : nullptr;
  options.jobs = std::max(1u, o.setup.jobs);
  const SweepReport report =
      DecodeSweep(utterances, d.scorer ? &*d.scorer : nullptr, d.vocab, options);

  Output output(o.output, io.out);
  if (o.json) {
    ordered_json j;
    j["metric"] = MetricName(report.metric);
    j["sets"] = report.sets;
    auto rows = ordered_json::array();
    for (const SweepCell& cell : report.cells) {
      ordered_json row;
      row["ctc_weight"] = cell.ctc_weight;
      row["beam"] = cell.beam;
      ordered_json scores = ordered_json::object();
      for (const auto& s : report.sets) {
        const auto it = cell.score.per_language.find(s);
        if (it == cell.score.per_language.end() || it->second.ref_units == 0) {
          scores[s] = nullptr;
        } else {
          scores[s] = ToDecimal(CorpusScore::Score(it->second, false), o.digits);
        }
      }
      row["scores"] = std::move(scores);
      row["all"] = cell.score.total_ref_units == 0
                       ? ordered_json(nullptr)
                       : ordered_json(ToDecimal(cell.score.Score(), o.digits));
      row["failures"] = cell.score.failures.size() + cell.decode_failures.size();
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    output.get() << j.dump() << '\n';
  } else {
    WriteSweepTsv(report, output.get(), o.digits);
  }
  output.Close();
  for (const SweepCell& cell : report.cells) {
    for (const auto& f : cell.decode_failures) {
      io.err << "warning: ctc_weight " << cell.ctc_weight << " beam "
             << cell.beam << ": " << f.id << ": " << f.message << '\n';
    }
    for (const auto& f : cell.score.failures) {
      io.err << "warning: ctc_weight " << cell.ctc_weight << " beam "
             << cell.beam << ": " << f.id << ": " << f.message << '\n';
    }
  }
  return kExitOk;
}

std::string VersionText() {
  std::ostringstream s;
  s << "phonekit " << PHONEKIT_VERSION << '\n'
    << "default hybrid loss weight (alpha): " << kDefaultCtcLossWeight << '\n'
    << "default decoding CTC weight (lambda): " << kDefaultCtcDecodeWeight
    << '\n'
    << "default beam size: " << kDefaultBeamSize << '\n'
    << "default max phones per utterance: " << kDefaultMaxPhones;
  return s.str();
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::istream& in,
           std::ostream& out, std::ostream& err) {
  CLI::App app{"Phonetic sequence toolkit", "phonekit"};
  app.set_version_flag("--version", VersionText());
  app.require_subcommand(1);

  LineOptions tokenize_opts;
  auto* tokenize = app.add_subcommand("tokenize", "Split IPA into phone tokens");
  AddLineOptions(tokenize, tokenize_opts);

  LineOptions strip_opts;
  auto* strip = app.add_subcommand(
      "strip", "Tokenize and remove length, syllable and tie marks");
  AddLineOptions(strip, strip_opts);
  strip->add_flag("--strip-tones", strip_opts.strip_tones, "Remove tone marks too");

  ScoreCmd score_opts;
  auto* score = app.add_subcommand("score", "Score hypotheses against references");
  score->add_option("--hyp", score_opts.hyp, "id<TAB>[lang<TAB>]text file")->required();
  score->add_option("--ref", score_opts.ref, "id<TAB>[lang<TAB>]text file")->required();
  score->add_option("--metric", score_opts.metric, "pfer, per, pter, wer or cer")
      ->capture_default_str();
  score->add_option("--feature-table", score_opts.feature_table,
                    std::string("Feature table (else $") + kFeatureTableEnv +
                        ", else the built-in table)");
  score->add_option("--fallback", score_opts.fallback,
                    "Unknown-phone handling: strip-marks or error")
      ->capture_default_str();
  score->add_option("--mark-classes", score_opts.mark_classes, "Mark-class override file");
  score->add_flag("--macro", score_opts.macro, "Average per-utterance rates");
  score->add_flag("--json", score_opts.json, "JSON report instead of TSV");
  score->add_flag("--strict", score_opts.strict, "Reject hypotheses with unknown scalars");
  score->add_option("--digits", score_opts.digits, "Decimal places")->capture_default_str();
  score->add_option("-j,--jobs", score_opts.jobs, "Worker threads");
  score->add_option("-o,--output", score_opts.output, "Output path")->capture_default_str();

  RefineCmd refine_opts;
  auto* refine = app.add_subcommand("refine-g2p", "Apply English VOT refinements");
  refine->add_option("input", refine_opts.input, "IPA lines")->capture_default_str();
  refine->add_option("-o,--output", refine_opts.output, "Output path")->capture_default_str();
  refine->add_option("--pipeline", refine_opts.pipeline, "Rule pipeline")
      ->capture_default_str();
  refine->add_option("--feature-table", refine_opts.feature_table,
                     "Feature table used to recognise vowels");
  refine->add_flag("--slash", refine_opts.slash, "Slash-rendered output");
  refine->add_flag("--trace", refine_opts.trace, "Report rule applications on stderr");

  ManifestCmd manifest_opts;
  auto* manifests = app.add_subcommand("make-manifests",
                                       "Build four-task examples and a vocabulary");
  manifests->add_option("corpus", manifest_opts.corpus, "Utterance JSONL")->required();
  manifests->add_option("--out-dir", manifest_opts.out_dir, "Output directory")->required();
  manifests->add_option("--max-phones", manifest_opts.max_phones,
                        "Drop utterances with more phones")
      ->capture_default_str();
  manifests->add_option("--lang-blocklist", manifest_opts.lang_blocklist,
                        "Languages to drop")
      ->delimiter(',');
  manifests->add_option("--min-duration", manifest_opts.min_duration, "Seconds");
  manifests->add_option("--max-duration", manifest_opts.max_duration, "Seconds");
  manifests->add_option("--subwords", manifest_opts.subwords, "Grapheme subword list");
  manifests->add_option("--mark-classes", manifest_opts.mark_classes,
                        "Mark-class override file");
  manifests->add_option("--feature-table", manifest_opts.feature_table,
                        "Feature table used by English refinement");
  manifests->add_flag("--refine-english", manifest_opts.refine_english,
                      "Refine English transcriptions");
  manifests->add_flag("--strip-tones", manifest_opts.strip_tones,
                      "Remove tones from CTC targets");

  CtcLossCmd ctc_opts;
  auto* ctc_loss = app.add_subcommand("ctc-loss", "CTC and hybrid loss of a target");
  ctc_loss->add_option("logprobs", ctc_opts.logprobs, "Log-prob matrix file")->required();
  ctc_loss->add_option("--target", ctc_opts.target, "Label indices, comma-separated")
      ->delimiter(',');
  ctc_loss->add_option("--att-nll", ctc_opts.att_nll, "Attention loss to combine");
  ctc_loss->add_option("--alpha", ctc_opts.alpha, "CTC weight in the hybrid loss")
      ->capture_default_str();
  ctc_loss->add_flag("--json", ctc_opts.json, "JSON output");
  ctc_loss->add_option("-o,--output", ctc_opts.output, "Output path")->capture_default_str();

  DecodeCmd decode_opts;
  auto* decode = app.add_subcommand("decode", "Joint CTC/attention beam search");
  decode->add_option("logprobs", decode_opts.logprobs, "Log-prob matrix files")
      ->required();
  AddDecoderOptions(decode, decode_opts.setup);
  decode->add_option("--ctc-weight", decode_opts.ctc_weight, "lambda")
      ->capture_default_str();
  decode->add_option("--beam", decode_opts.beam, "Beam size")->capture_default_str();
  decode->add_option("--nbest", decode_opts.nbest, "Hypotheses per utterance (0: beam)")
      ->capture_default_str();
  decode->add_flag("--length-normalize", decode_opts.length_normalize,
                   "Rank finished hypotheses by score per token");
  decode->add_option("-o,--output", decode_opts.output, "Output path")->capture_default_str();

  SweepCmd sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Decode a grid of settings and score it");
  sweep->add_option("manifest", sweep_opts.manifest,
                    "JSONL of {id, set, logprobs, ref}")
      ->required();
  AddDecoderOptions(sweep, sweep_opts.setup);
  sweep->add_option("--ctc-weights", sweep_opts.ctc_weights, "lambda values")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--beams", sweep_opts.beams, "Beam sizes")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--metric", sweep_opts.metric, "pfer, per, pter, wer or cer")
      ->capture_default_str();
  sweep->add_option("--feature-table", sweep_opts.feature_table, "Feature table");
  sweep->add_flag("--json", sweep_opts.json, "JSON output");
  sweep->add_option("--digits", sweep_opts.digits, "Decimal places")->capture_default_str();
  sweep->add_option("-o,--output", sweep_opts.output, "Output path")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDomain;
  }

  const Io io{in, out, err};
  try {
    if (*tokenize) return RunLines(tokenize_opts, false, io);
    if (*strip) return RunLines(strip_opts, true, io);
    if (*score) return RunScore(score_opts, io);
    if (*refine) return RunRefine(refine_opts, io);
    if (*manifests) return RunManifests(manifest_opts, io);
    if (*ctc_loss) return RunCtcLoss(ctc_opts, io);
    if (*decode) return RunDecode(decode_opts, io);
    if (*sweep) return RunSweep(sweep_opts, io);
  } catch (const IoError& e) {
    err << "phonekit: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "phonekit: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "phonekit: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitDomain;
}

}  // namespace phonekit::cli
