#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace dcn {

// Evaluation summary for one head / split.
struct EvalReport {
  std::map<std::size_t, double> per_class_ap;  // class id -> AP
  std::vector<std::size_t> skipped_classes;    // no positives, excluded
  double map = 0.0;
  double top1 = -1.0;  // negative when not applicable
  double top5 = -1.0;
  double loss = -1.0;
  std::size_t sample_count = 0;

  std::string to_text() const;   // one metric per line
  std::string to_csv() const;    // machine-readable, same content
};

// Fraction of rows whose true label is among the k highest scores; ties
// broken by lowest class index.
double topk_accuracy(const std::vector<std::vector<double>>& score_rows,
                     const std::vector<std::size_t>& true_labels,
                     std::size_t k);

// Non-interpolated AP over a ranked list (descending score, stable on ties).
// Throws parameter_error when there are no positives.
double average_precision(const std::vector<double>& scores,
                         const std::vector<bool>& relevance);

double mean_ap(const std::vector<double>& per_class_aps);

}  // namespace dcn
