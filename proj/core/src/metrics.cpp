#include "dcn/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "dcn/errors.hpp"

namespace dcn {

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "samples " << sample_count << "\n";
  if (loss >= 0.0) os << "loss " << loss << "\n";
  if (top1 >= 0.0) os << "top1 " << top1 << "\n";
  if (top5 >= 0.0) os << "top5 " << top5 << "\n";
  for (const auto& [cls, ap] : per_class_ap)
    os << "ap_class_" << cls << " " << ap << "\n";
  for (std::size_t cls : skipped_classes)
    os << "ap_class_" << cls << " undefined (no positives)\n";
  os << "map " << map << "\n";
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os.precision(6);
  os << "metric,value\n";
  os << "samples," << sample_count << "\n";
  if (loss >= 0.0) os << "loss," << loss << "\n";
  if (top1 >= 0.0) os << "top1," << top1 << "\n";
  if (top5 >= 0.0) os << "top5," << top5 << "\n";
  for (const auto& [cls, ap] : per_class_ap)
    os << "ap_class_" << cls << "," << ap << "\n";
  os << "map," << map << "\n";
  return os.str();
}

double topk_accuracy(const std::vector<std::vector<double>>& score_rows,
                     const std::vector<std::size_t>& true_labels,
                     std::size_t k) {
  if (score_rows.size() != true_labels.size())
    throw parameter_error("topk: rows and labels disagree");
  if (score_rows.empty()) throw parameter_error("topk: no rows");
  const std::size_t classes = score_rows.front().size();
  if (k < 1 || k > classes) throw parameter_error("topk: invalid k");

  std::size_t hits = 0;
  for (std::size_t r = 0; r < score_rows.size(); ++r) {
    const auto& row = score_rows[r];
    if (row.size() != classes) throw parameter_error("topk: ragged rows");
    const std::size_t label = true_labels[r];
    if (label >= classes) throw parameter_error("topk: label out of range");
    // rank of `label`: classes that strictly beat it, ties going to the
    // lower class index
    std::size_t better = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (c == label) continue;
      if (row[c] > row[label] || (row[c] == row[label] && c < label)) ++better;
    }
    if (better < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(score_rows.size());
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<bool>& relevance) {
  if (scores.size() != relevance.size())
    throw parameter_error("AP: scores and flags disagree");
  const std::size_t positives =
      static_cast<std::size_t>(std::count(relevance.begin(), relevance.end(), true));
  if (positives == 0) throw parameter_error("AP undefined: no positives");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double sum = 0.0;
  std::size_t seen_pos = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (relevance[order[rank]]) {
      ++seen_pos;
      sum += static_cast<double>(seen_pos) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

double mean_ap(const std::vector<double>& per_class_aps) {
  if (per_class_aps.empty())
    throw parameter_error("MAP undefined: no class has a defined AP");
  double sum = 0.0;
  for (double ap : per_class_aps) sum += ap;
  return sum / static_cast<double>(per_class_aps.size());
}

}  // namespace dcn
