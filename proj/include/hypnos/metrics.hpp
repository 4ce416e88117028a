#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

#include "hypnos/hypnogram.hpp"

namespace hypnos {

// Counts with BS (label 1) as the positive class.
struct ConfusionMatrix {
  std::uint64_t tp{0}, tn{0}, fp{0}, fn{0};

  std::uint64_t total() const { return tp + tn + fp + fn; }
};

inline ConfusionMatrix confusion(const Hypnogram& pred, const Hypnogram& truth) {
  if (!same_grid(pred, truth))
    throw std::invalid_argument("confusion: hypnogram grids differ (start, stride or length)");
  if (pred.labels.empty()) throw std::invalid_argument("confusion: empty hypnograms");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const bool p = pred.labels[i] != 0;
    const bool t = truth.labels[i] != 0;
    if (p && t) ++cm.tp;
    else if (!p && !t) ++cm.tn;
    else if (p && !t) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

enum class DorCorrection { None, Haldane };

// Diagnostic odds ratio (tp*tn)/(fp*fn). Without correction the zero-cell
// edge cases are reported honestly: +inf when only the denominator vanishes,
// NaN ("undefined") when both products do. Haldane adds 0.5 to every cell
// first, which keeps the value finite.
inline double dor(const ConfusionMatrix& cm, DorCorrection correction = DorCorrection::None) {
  if (cm.total() == 0) throw std::invalid_argument("dor: empty confusion matrix");
  if (correction == DorCorrection::Haldane) {
    const double num = (static_cast<double>(cm.tp) + 0.5) * (static_cast<double>(cm.tn) + 0.5);
    const double den = (static_cast<double>(cm.fp) + 0.5) * (static_cast<double>(cm.fn) + 0.5);
    return num / den;
  }
  const double num = static_cast<double>(cm.tp) * static_cast<double>(cm.tn);
  const double den = static_cast<double>(cm.fp) * static_cast<double>(cm.fn);
  if (den == 0.0) {
    if (num == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::numeric_limits<double>::infinity();
  }
  return num / den;
}

}  // namespace hypnos
