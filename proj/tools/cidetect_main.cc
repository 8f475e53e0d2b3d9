// Copyright 2026 The cidetect Authors.
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

// cidetect: command-line entry point.
//
//   cidetect synth  --config synth.cfg --seed 7 --out corpus/
//   cidetect label  corpus/ --out corpus/bridge_index.json
//   cidetect pairs  corpus/ --split test --pattern all --n 500 --out test.jsonl
//   cidetect train  corpus/ --pattern all --epochs 30 --out bundle/
//   cidetect detect bundle/ query.jsonl target.jsonl
//   cidetect eval   bundle/ corpus/ test.jsonl --out report/
//   cidetect sweep  bundle/ corpus/ test.jsonl --grid extended
//
// Exit status: 0 success, 2 invalid input, 3 runtime or numeric failure.

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cidetect/config.h"
#include "cidetect/corpus.h"
#include "cidetect/detector.h"
#include "cidetect/error.h"
#include "cidetect/eval.h"
#include "cidetect/exchange.h"
#include "cidetect/experiment.h"
#include "cidetect/labeling.h"
#include "cidetect/pairgen.h"
#include "cidetect/seed.h"
#include "cidetect/synth.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cidetect {
namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr std::uint64_t kPairsStream = 20;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string out;
};

void ConfigureLogging() {
  auto logger = spdlog::stderr_logger_st("cidetect");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* level = std::getenv("CIDETECT_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

KeyValues LoadConfig(const std::string& path) {
  return path.empty() ? KeyValues{} : ReadKeyValues(path);
}

void RequireDir(const std::string& path, std::string_view what) {
  if (!fs::is_directory(path)) {
    throw Error(ErrorCode::kIo, std::string(what) + " directory not found: " + path);
  }
}

std::string ReportTable(const std::map<Pattern, EvalReport>& per_pattern,
                        const EvalReport& overall) {
  std::vector<EvalReport> rows;
  for (const auto& [p, r] : per_pattern) rows.push_back(r);
  rows.push_back(overall);
  return ReportsToTable(rows);
}

void WriteOrPrint(const std::string& out, const fs::path& default_name,
                  const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    WriteTextFile(fs::path(out) / default_name, text);
  }
}

// ---- synth -----------------------------------------------------------------

int RunSynth(const CommonFlags& flags) {
  SynthConfig config;
  for (const auto& [key, value] : LoadConfig(flags.config)) {
    ApplySynthOption(config, key, value);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out.empty()) throw Error(ErrorCode::kInvalidArgument, "synth needs --out");
  SynthCorpus corpus = GenerateCorpus(config);
  WriteCorpus(flags.out, corpus);
  const PatternCounts c = PatternDistribution(corpus.ground_truth);
  spdlog::info("wrote {} functions in {} projects to {} (equal={} leaf={} root={} internal={})",
               corpus.source_functions.size(), corpus.projects.size(), flags.out, c.equal,
               c.leaf, c.root, c.internal);
  return 0;
}

// ---- label -----------------------------------------------------------------

int RunLabel(const CommonFlags& flags, const std::string& corpus_dir) {
  RequireDir(corpus_dir, "tables");
  const LabeledCorpus labeled = LabelCorpusDir(corpus_dir);
  const LabelingDiagnostics& d = labeled.bridges.diagnostics;
  for (const MappingResult* m : {&labeled.no_inline, &labeled.inlining}) {
    if (!m->issues.empty()) spdlog::warn("{} table records skipped", m->issues.size());
  }
  spdlog::info("diagnostics: isolated_bridges={} excluded_inlined_queries={} "
               "equal_targets_skipped={} self_loops_removed={}",
               d.isolated_bridges, d.excluded_inlined_queries, d.equal_targets_skipped,
               d.self_loops_removed);
  const fs::path out = flags.out.empty() ? fs::path(corpus_dir) / "bridge_index.json"
                                         : fs::path(flags.out);
  WriteTextFile(out, BridgeIndexToJson(labeled.bridges.index));

  const PatternCounts c = PatternDistribution(labeled.bridges.index);
  std::printf("%-10s %8s\n", "Pattern", "Count");
  for (Pattern p : {Pattern::kEqual, Pattern::kLeaf, Pattern::kRoot, Pattern::kInternal}) {
    std::printf("%-10s %8zu\n", std::string(PatternName(p)).c_str(), c.of(p));
  }
  return 0;
}

// ---- pairs -----------------------------------------------------------------

ExperimentOptions LoadExperimentOptions(const CommonFlags& flags) {
  ExperimentOptions options;
  for (const auto& [key, value] : LoadConfig(flags.config)) {
    ApplyExperimentOption(options, key, value);
  }
  if (flags.seed) options.seed = *flags.seed;
  return options;
}

int RunPairs(const CommonFlags& flags, const std::string& corpus_dir,
             const std::string& split_name, const std::string& pattern_name,
             std::size_t n) {
  RequireDir(corpus_dir, "corpus");
  if (flags.out.empty()) throw Error(ErrorCode::kInvalidArgument, "pairs needs --out");
  const ExperimentOptions options = LoadExperimentOptions(flags);
  const Experiment ex = OpenExperiment(corpus_dir, options);
  const BridgeIndex* index = nullptr;
  if (split_name == "train") {
    index = &ex.train;
  } else if (split_name == "validation") {
    index = &ex.validation;
  } else if (split_name == "test") {
    index = &ex.test;
  } else {
    index = &ex.labels.bridges.index;
  }
  const std::uint64_t seed = MixSeed(options.seed, {kPairsStream});
  std::vector<PairRecord> pairs;
  if (pattern_name == "all") {
    pairs = PatternTestPairs(*index, n, seed);
  } else if (pattern_name == "mixed") {
    pairs = MixedLabelPairs(*index, std::nullopt, n, seed);
  } else {
    pairs = MixedLabelPairs(*index, ParsePattern(pattern_name), n, seed);
  }
  WritePairsFile(flags.out, pairs);
  spdlog::info("wrote {} pairs to {}", pairs.size(), flags.out);
  return 0;
}

// ---- train -----------------------------------------------------------------

std::vector<ModelSlot> SlotsFor(const std::string& pattern) {
  if (pattern == "all") return {ModelSlot::kLeaf, ModelSlot::kRoot, ModelSlot::kInternal};
  return {*ParseSlot(pattern)};
}

json HistoryJson(const std::vector<EpochRecord>& history, std::size_t best_epoch) {
  json epochs = json::array();
  for (const EpochRecord& e : history) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"validation_auc", std::isfinite(e.validation_auc)
                                             ? json(e.validation_auc)
                                             : json(nullptr)}});
  }
  return {{"best_epoch", best_epoch}, {"epochs", std::move(epochs)}};
}

int RunTrain(const CommonFlags& flags, const std::string& corpus_dir,
             const std::string& pattern, std::optional<std::size_t> epochs,
             std::optional<std::size_t> epoch_size, const std::string& grid) {
  RequireDir(corpus_dir, "corpus");
  if (flags.out.empty()) throw Error(ErrorCode::kInvalidArgument, "train needs --out");
  ExperimentOptions options = LoadExperimentOptions(flags);
  if (epochs) options.epochs = *epochs;
  if (epoch_size) options.epoch_size = *epoch_size;
  if (!grid.empty()) options.grid = NamedGrid(grid);
  {
    // The input width comes from the vocabulary; check everything else now.
    ModelConfig probe = options.model;
    probe.feature_dim = 1;
    probe.Validate();
  }

  const Experiment ex = OpenExperiment(corpus_dir, options);
  spdlog::info("split: {} train / {} validation / {} test projects; vocabulary {}",
               ex.split.train.size(), ex.split.validation.size(), ex.split.test.size(),
               ex.vocab.feature_dim());

  std::map<ModelSlot, ModelParams> models;
  json history = json::object();
  for (ModelSlot slot : SlotsFor(pattern)) {
    const std::string name(SlotName(slot));
    TrainResult result = TrainSlot(ex, slot, options, [&](const EpochRecord& e) {
      spdlog::info("{} epoch {}/{}: loss {:.5f} validation AUC {:.4f}", name, e.epoch,
                   options.epochs, e.train_loss, e.validation_auc);
    });
    history[name] = HistoryJson(result.history, result.best_epoch);
    models.emplace(slot, std::move(result.params));
  }

  EnsembleDetector detector = AssembleDetector(ex, std::move(models), options);
  spdlog::info("selected threshold {:.2f}", detector.threshold());
  const std::map<std::string, std::string> provenance = {
      {"corpus", corpus_dir},
      {"pattern", pattern},
      {"seed", std::to_string(options.seed)},
      {"epochs", std::to_string(options.epochs)},
      {"epoch_size", std::to_string(options.epoch_size)},
  };
  SaveBundle(flags.out, detector, provenance);
  WriteTextFile(fs::path(flags.out) / "history.json", history.dump(1) + "\n");
  WriteTextFile(fs::path(flags.out) / "split.json", SplitToJson(ex.split));
  return 0;
}

// ---- detect ----------------------------------------------------------------

AttributedCfg LoadSingleFunction(const std::string& path) {
  std::vector<AttributedCfg> fns = ReadAcfgsJsonl(path);
  if (fns.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                path + ": expected exactly one function, found " + std::to_string(fns.size()));
  }
  return std::move(fns.front());
}

int RunDetect(const CommonFlags& flags, const std::string& bundle,
              const std::string& query_path, const std::string& target_path) {
  const EnsembleDetector detector = LoadBundle(bundle);
  const Verdict v =
      detector.Detect(LoadSingleFunction(query_path), LoadSingleFunction(target_path));
  json sims = json::object();
  for (const auto& [slot, s] : v.similarities) sims[std::string(SlotName(slot))] = s;
  const json out = {{"similarities", std::move(sims)},
                    {"final_similarity", v.final_similarity},
                    {"threshold", detector.threshold()},
                    {"positive", v.positive}};
  if (flags.out.empty()) {
    std::cout << out.dump(1) << "\n";
  } else {
    WriteTextFile(flags.out, out.dump(1) + "\n");
  }
  return 0;
}

// ---- eval / sweep ------------------------------------------------------------

struct ScoredSet {
  std::vector<ScoredPair> overall;
  std::map<Pattern, std::vector<ScoredPair>> per_pattern;
};

// Scores file: JSONL {"similarity": s, "label": +1|-1, "pattern": "leaf"}.
ScoredSet ReadScores(const std::string& path) {
  ScoredSet set;
  const std::string text = ReadTextFile(path);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const ScoredPair s{j.at("similarity").get<double>(), j.at("label").get<int>()};
      if (s.label != 1 && s.label != -1) {
        throw Error(ErrorCode::kInvalidLabel, "label must be +1 or -1");
      }
      const auto pattern = ParsePattern(j.at("pattern").get<std::string>());
      if (!pattern) throw Error(ErrorCode::kParse, "unknown pattern in scores file");
      set.overall.push_back(s);
      set.per_pattern[*pattern].push_back(s);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, path + ": " + e.what());
    }
  }
  return set;
}

ScoredSet ScoreWithBundle(const EnsembleDetector& detector, const std::string& corpus_dir,
                          const std::string& pairs_path, std::size_t jobs) {
  RequireDir(corpus_dir, "corpus");
  const std::vector<PairRecord> records = ReadPairsFile(pairs_path);
  const GraphStore store(LoadGraphCatalog(corpus_dir), detector.vocab(),
                         detector.config().max_nodes);
  const std::vector<GraphPair> pairs = ResolvePairs(records, store);
  DetectorEvaluation evaluation = EvaluateDetector(detector, pairs, jobs);
  ScoredSet set;
  set.overall = std::move(evaluation.overall_scores);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    set.per_pattern[pairs[i].pattern].push_back(set.overall[i]);
  }
  return set;
}

void RequireBothLabels(const std::vector<ScoredPair>& scores) {
  bool pos = false;
  bool neg = false;
  for (const ScoredPair& s : scores) (s.label > 0 ? pos : neg) = true;
  if (!pos || !neg) {
    throw Error(ErrorCode::kDegenerateLabels, "evaluation pairs need both labels");
  }
}

int RunEval(const CommonFlags& flags, const std::vector<std::string>& inputs,
            const std::string& scores_path, const std::string& grid_name,
            std::optional<double> threshold_flag, bool sweep_only) {
  ScoredSet set;
  double threshold = kDefaultThreshold;
  if (!scores_path.empty()) {
    set = ReadScores(scores_path);
  } else {
    if (inputs.size() != 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "expected BUNDLE CORPUS PAIRS (or --scores FILE)");
    }
    const EnsembleDetector detector = LoadBundle(inputs[0]);
    threshold = detector.threshold();
    set = ScoreWithBundle(detector, inputs[1], inputs[2], flags.jobs);
  }
  if (threshold_flag) threshold = *threshold_flag;
  RequireBothLabels(set.overall);
  const std::vector<double> grid = NamedGrid(grid_name.empty() ? "extended" : grid_name);

  std::string csv;
  for (const auto& [pattern, scores] : set.per_pattern) {
    std::string part = SweepToCsv(ThresholdSweep(scores, grid, std::string(PatternName(pattern))));
    csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
  }
  {
    std::string part = SweepToCsv(ThresholdSweep(set.overall, grid, "overall"));
    csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
  }
  if (sweep_only) {
    const double best = SelectThreshold(set.overall, grid);
    WriteOrPrint(flags.out, "sweep.csv", csv);
    spdlog::info("best threshold {:.2f}", best);
    return 0;
  }

  std::map<Pattern, EvalReport> per_pattern;
  std::vector<EvalReport> reports;
  for (const auto& [pattern, scores] : set.per_pattern) {
    per_pattern[pattern] = MakeReport(scores, threshold, std::string(PatternName(pattern)));
    reports.push_back(per_pattern[pattern]);
  }
  const EvalReport overall = MakeReport(set.overall, threshold, "overall");
  reports.push_back(overall);
  std::cout << ReportTable(per_pattern, overall);
  if (!flags.out.empty()) {
    WriteTextFile(fs::path(flags.out) / "report.json", ReportsToJson(reports));
    WriteTextFile(fs::path(flags.out) / "sweep.csv", csv);
    WriteTextFile(fs::path(flags.out) / "roc.txt", RocCurveData(set.overall));
  }
  return 0;
}

void AddCommon(CLI::App* cmd, CommonFlags& flags, bool with_config) {
  if (with_config) {
    cmd->add_option("--config", flags.config, "key=value configuration file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "seed for all randomness");
  }
  cmd->add_option("--out", flags.out, "output path");
}

int Main(int argc, char** argv) {
  ConfigureLogging();
  CLI::App app{"cidetect: cross-inlining binary function similarity detection"};
  app.require_subcommand(1);
  app.fallthrough();
  CommonFlags flags;
  app.add_option("--jobs", flags.jobs, "worker threads for scoring")
      ->check(CLI::PositiveNumber);

  std::string corpus_dir;
  std::string pattern = "all";
  std::string split = "all";
  std::string grid;
  std::size_t n_pairs = 500;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> epoch_size;
  std::string bundle;
  std::string query;
  std::string target;
  std::vector<std::string> inputs;
  std::string scores;
  std::optional<double> threshold;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  AddCommon(synth, flags, true);

  CLI::App* label = app.add_subcommand("label", "build the bridge index of a corpus");
  label->add_option("corpus", corpus_dir, "corpus or tables directory")->required();
  AddCommon(label, flags, false);

  CLI::App* pairs = app.add_subcommand("pairs", "sample labeled pairs");
  pairs->add_option("corpus", corpus_dir)->required();
  pairs->add_option("--split", split)->check(CLI::IsMember({"all", "train", "validation", "test"}));
  pairs->add_option("--pattern", pattern)
      ->check(CLI::IsMember({"leaf", "root", "internal", "mixed", "all"}));
  pairs->add_option("--n", n_pairs, "pairs per label (per pattern for 'all')");
  AddCommon(pairs, flags, true);

  CLI::App* train = app.add_subcommand("train", "train models and write a detector bundle");
  train->add_option("corpus", corpus_dir)->required();
  train->add_option("--pattern", pattern)
      ->check(CLI::IsMember({"leaf", "root", "internal", "mixed", "all"}));
  train->add_option("--epochs", epochs);
  train->add_option("--epoch-size", epoch_size, "positive pairs per epoch (plus as many negatives)");
  train->add_option("--grid", grid)->check(CLI::IsMember({"narrow", "extended"}));
  AddCommon(train, flags, true);

  CLI::App* detect = app.add_subcommand("detect", "score one query/target pair");
  detect->add_option("bundle", bundle)->required();
  detect->add_option("query", query)->required()->check(CLI::ExistingFile);
  detect->add_option("target", target)->required()->check(CLI::ExistingFile);
  AddCommon(detect, flags, false);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a bundle on a pairs file");
  CLI::App* sweep = app.add_subcommand("sweep", "threshold sweep on a pairs file");
  for (CLI::App* cmd : {eval, sweep}) {
    cmd->add_option("inputs", inputs, "BUNDLE CORPUS PAIRS");
    cmd->add_option("--scores", scores, "pre-scored pairs (JSONL)")->check(CLI::ExistingFile);
    cmd->add_option("--grid", grid)->check(CLI::IsMember({"narrow", "extended"}));
    AddCommon(cmd, flags, false);
  }
  eval->add_option("--threshold", threshold, "override the bundle threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth) return RunSynth(flags);
    if (*label) return RunLabel(flags, corpus_dir);
    if (*pairs) return RunPairs(flags, corpus_dir, split, pattern, n_pairs);
    if (*train) return RunTrain(flags, corpus_dir, pattern, epochs, epoch_size, grid);
    if (*detect) return RunDetect(flags, bundle, query, target);
    if (*eval) return RunEval(flags, inputs, scores, grid, threshold, false);
    if (*sweep) return RunEval(flags, inputs, scores, grid, std::nullopt, true);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return IsValidationError(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return 0;
}

}  // namespace
}  // namespace cidetect

int main(int argc, char** argv) { return cidetect::Main(argc, argv); }
