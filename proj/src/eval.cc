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

#include "cidetect/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "cidetect/detector.h"
#include "cidetect/error.h"
#include "json.hpp"

namespace cidetect {
namespace {

using nlohmann::json;

std::vector<double> StepGrid(int first, int last) {
  std::vector<double> grid;
  for (int k = first; k <= last; ++k) grid.push_back(k / 20.0);
  return grid;
}

json ReportJson(const EvalReport& r) {
  auto num = [](double x) -> json { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"pattern", r.pattern},
          {"threshold", r.threshold},
          {"accuracy", num(r.accuracy)},
          {"precision", num(r.precision)},
          {"recall", num(r.recall)},
          {"f1", num(r.f1)},
          {"auc", num(r.auc)},
          {"counts",
           {{"tp", r.counts.tp},
            {"fp", r.counts.fp},
            {"tn", r.counts.tn},
            {"fn", r.counts.fn}}}};
}

std::string Fixed(double x, int digits) {
  if (!std::isfinite(x)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

}  // namespace

Confusion ComputeConfusion(std::span<const ScoredPair> scores, double threshold) {
  Confusion c;
  for (const ScoredPair& s : scores) {
    const bool predicted = s.similarity >= threshold;
    if (s.label > 0) {
      ++(predicted ? c.tp : c.fn);
    } else {
      ++(predicted ? c.fp : c.tn);
    }
  }
  return c;
}

Metrics ComputeMetrics(const Confusion& c) {
  Metrics m;
  const double total = static_cast<double>(c.total());
  m.accuracy = total > 0 ? static_cast<double>(c.tp + c.tn) / total : 0.0;
  m.precision = c.tp + c.fp > 0
                    ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                    : 0.0;
  m.recall = c.tp + c.fn > 0
                 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                 : 0.0;
  m.f1 = m.precision + m.recall > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

int CompareF1(const Confusion& a, const Confusion& b) {
  using Wide = unsigned __int128;
  auto den = [](const Confusion& c) -> Wide {
    const Wide d = Wide{2} * c.tp + c.fp + c.fn;
    return d == 0 ? 1 : d;
  };
  const Wide lhs = Wide{a.tp} * den(b);
  const Wide rhs = Wide{b.tp} * den(a);
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

double Auc(std::span<const ScoredPair> scores) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a].similarity < scores[b].similarity;
  });
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           scores[order[j]].similarity == scores[order[i]].similarity) {
      ++j;
    }
    // Ranks i+1 .. j share their average.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (scores[order[k]].label > 0) {
        positive_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::kDegenerateLabels, "AUC needs both labels");
  }
  const double np = static_cast<double>(n_pos);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) /
         (np * static_cast<double>(n_neg));
}

EvalReport MakeReport(std::span<const ScoredPair> scores, double threshold,
                      std::string pattern) {
  EvalReport r;
  r.pattern = std::move(pattern);
  r.threshold = threshold;
  r.counts = ComputeConfusion(scores, threshold);
  Metrics m = ComputeMetrics(r.counts);
  r.accuracy = m.accuracy;
  r.precision = m.precision;
  r.recall = m.recall;
  r.f1 = m.f1;
  r.auc = r.counts.tp + r.counts.fn > 0 && r.counts.fp + r.counts.tn > 0
              ? Auc(scores)
              : std::numeric_limits<double>::quiet_NaN();
  return r;
}

SweepTable ThresholdSweep(std::span<const ScoredPair> scores,
                          std::span<const double> grid, std::string pattern) {
  SweepTable table;
  for (double theta : grid) table.rows.push_back(MakeReport(scores, theta, pattern));
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const EvalReport& best = table.rows[table.best_row];
    const EvalReport& row = table.rows[i];
    const int cmp = CompareF1(row.counts, best.counts);
    if (cmp > 0 || (cmp == 0 && row.threshold < best.threshold)) {
      table.best_row = i;
    }
  }
  return table;
}

std::vector<double> NarrowGrid() { return StepGrid(10, 19); }
std::vector<double> ExtendedGrid() { return StepGrid(1, 19); }

DetectorEvaluation EvaluateDetector(const EnsembleDetector& detector,
                                    std::span<const GraphPair> pairs,
                                    std::size_t jobs) {
  std::vector<ScoredPair> scores(pairs.size());
  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      scores[i] = {detector.Detect(*pairs[i].query, *pairs[i].target).final_similarity,
                   pairs[i].label};
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, pairs.size()));
  if (jobs == 1) {
    score_range(0, pairs.size());
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (pairs.size() + jobs - 1) / jobs;
    for (std::size_t w = 0; w < jobs; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(pairs.size(), begin + chunk);
      if (begin < end) workers.emplace_back(score_range, begin, end);
    }
    for (std::thread& t : workers) t.join();
  }

  DetectorEvaluation out;
  std::map<Pattern, std::vector<ScoredPair>> by_pattern;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    by_pattern[pairs[i].pattern].push_back(scores[i]);
  }
  for (const auto& [pattern, s] : by_pattern) {
    out.per_pattern[pattern] =
        MakeReport(s, detector.threshold(), std::string(PatternName(pattern)));
  }
  out.overall = MakeReport(scores, detector.threshold(), "overall");
  out.overall_scores = std::move(scores);
  return out;
}

std::string ReportToJson(const EvalReport& report) {
  return ReportJson(report).dump();
}

std::string ReportsToJson(std::span<const EvalReport> reports) {
  json arr = json::array();
  for (const EvalReport& r : reports) arr.push_back(ReportJson(r));
  return arr.dump(1) + "\n";
}

std::string ReportsToTable(std::span<const EvalReport> reports) {
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s %9s %9s %9s\n", "Pattern",
                "Threshold", "Accuracy", "Precision", "Recall", "F1", "AUC");
  std::string out = line;
  for (const EvalReport& r : reports) {
    std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s %9s %9s %9s\n",
                  r.pattern.c_str(), Fixed(r.threshold, 2).c_str(),
                  Fixed(r.accuracy, 4).c_str(), Fixed(r.precision, 4).c_str(),
                  Fixed(r.recall, 4).c_str(), Fixed(r.f1, 4).c_str(),
                  Fixed(r.auc, 4).c_str());
    out += line;
  }
  return out;
}

std::string SweepToCsv(const SweepTable& sweep) {
  std::string out = "pattern,threshold,accuracy,precision,recall,f1,auc,tp,fp,tn,fn,best\n";
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const EvalReport& r = sweep.rows[i];
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%s,%.2f,%.6f,%.6f,%.6f,%.6f,%s,%zu,%zu,%zu,%zu,%d\n",
                  r.pattern.c_str(), r.threshold, r.accuracy, r.precision,
                  r.recall, r.f1, Fixed(r.auc, 6).c_str(), r.counts.tp,
                  r.counts.fp, r.counts.tn, r.counts.fn,
                  i == sweep.best_row ? 1 : 0);
    out += line;
  }
  return out;
}

std::string RocCurveData(std::span<const ScoredPair> scores) {
  std::vector<ScoredPair> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredPair& a, const ScoredPair& b) {
              return a.similarity > b.similarity;
            });
  std::size_t n_pos = 0;
  for (const ScoredPair& s : sorted) n_pos += s.label > 0 ? 1 : 0;
  const std::size_t n_neg = sorted.size() - n_pos;
  std::string out = "# fpr tpr\n0 0\n";
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    (sorted[i].label > 0 ? tp : fp) += 1;
    if (i + 1 < sorted.size() && sorted[i + 1].similarity == sorted[i].similarity) {
      continue;
    }
    char line[64];
    std::snprintf(line, sizeof(line), "%.6f %.6f\n",
                  n_neg ? static_cast<double>(fp) / static_cast<double>(n_neg) : 0.0,
                  n_pos ? static_cast<double>(tp) / static_cast<double>(n_pos) : 0.0);
    out += line;
  }
  return out;
}

}  // namespace cidetect
