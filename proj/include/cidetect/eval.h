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

// Classification metrics over scored pairs: confusion counts, accuracy /
// precision / recall / F1 at a threshold, rank-based AUC, threshold sweeps
// and report serialization.

#ifndef CIDETECT_EVAL_H_
#define CIDETECT_EVAL_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cidetect/labeling.h"
#include "cidetect/pairgen.h"

namespace cidetect {

class EnsembleDetector;

struct ScoredPair {
  double similarity = 0.0;
  int label = 1;  // +1 or -1
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// A pair is predicted positive when similarity >= threshold.
Confusion ComputeConfusion(std::span<const ScoredPair> scores, double threshold);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;     // 0 when there are no positives
  double f1 = 0.0;         // 0 when precision + recall == 0
};

Metrics ComputeMetrics(const Confusion& c);

// Exact comparison of F1 = 2tp / (2tp + fp + fn) in integer arithmetic, so
// that confusions with equal F1 compare equal. Returns <0, 0 or >0.
int CompareF1(const Confusion& a, const Confusion& b);

// Mann-Whitney statistic with average ranks; ties count one half.
// Throws Error(kDegenerateLabels) unless both labels occur.
double Auc(std::span<const ScoredPair> scores);

struct EvalReport {
  std::string pattern;
  double threshold = 0.0;
  Confusion counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;  // NaN when labels are degenerate
};

EvalReport MakeReport(std::span<const ScoredPair> scores, double threshold,
                      std::string pattern);

struct SweepTable {
  std::vector<EvalReport> rows;
  // Row with the highest F1; the smallest threshold wins ties.
  std::size_t best_row = 0;
};

SweepTable ThresholdSweep(std::span<const ScoredPair> scores,
                          std::span<const double> grid, std::string pattern = "");

// {0.50, 0.55, ..., 0.95}.
std::vector<double> NarrowGrid();
// {0.05, 0.10, ..., 0.95}.
std::vector<double> ExtendedGrid();

struct DetectorEvaluation {
  std::map<Pattern, EvalReport> per_pattern;
  EvalReport overall;
  std::vector<ScoredPair> overall_scores;
};

// Scores every pair with the detector and reports per pattern (pairs filtered
// by their pattern tag) and over all pairs, at the detector's threshold.
DetectorEvaluation EvaluateDetector(const EnsembleDetector& detector,
                                    std::span<const GraphPair> pairs,
                                    std::size_t jobs = 1);

std::string ReportToJson(const EvalReport& report);
std::string ReportsToJson(std::span<const EvalReport> reports);
// Aligned text table with Accuracy / Precision / Recall / F1 / AUC columns.
std::string ReportsToTable(std::span<const EvalReport> reports);
std::string SweepToCsv(const SweepTable& sweep);
// Two-column "fpr tpr" data for plotting a ROC curve.
std::string RocCurveData(std::span<const ScoredPair> scores);

}  // namespace cidetect

#endif  // CIDETECT_EVAL_H_
