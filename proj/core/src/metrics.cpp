#include "pdvoice/metrics.hpp"

#include <string>

#include "pdvoice/error.hpp"

namespace pdvoice {

ConfusionMatrix confusion(const LabelVector& truth, const LabelVector& predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(truth.size()) + " truth labels vs " +
                                               std::to_string(predicted.size()) + " predictions");
  }
  if (truth.empty()) throw Error(ErrorCode::EmptyInput, "no labels to compare");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == 1;
    const bool guess = predicted[i] == 1;
    if (actual && guess) ++cm.tp;
    else if (!actual && guess) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricSet metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::EmptyInput, "empty confusion matrix");
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  MetricSet m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  // 2pr/(p+r) simplifies to 2tp/(2tp+fp+fn), which is exact in one division.
  m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  return m;
}

}  // namespace pdvoice
