#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace hypnos {

// Offset/scale pair of one normalization pass; kept so the same transform can
// be replayed on new samples (streaming calibration).
struct NormParams {
  double offset{0.0};  // subtracted minimum
  double scale{1.0};   // 2 * mean of the shifted signal
};

struct NormalizedSignal {
  std::vector<double> samples;
  NormParams params;
};

inline double apply_norm(double x, const NormParams& p) { return (x - p.offset) / p.scale; }

// Amplitude normalization: shift by the minimum, then divide by twice the
// mean of the shifted signal. The result has min 0 and mean 1/2, which makes
// downstream features invariant to per-channel gain and offset. Values above
// twice the shifted mean land outside [0,1]; they are kept as-is.
inline NormalizedSignal normalize(std::span<const double> signal) {
  if (signal.empty()) throw std::invalid_argument("normalize: empty signal");
  if (signal.size() < 2) throw std::invalid_argument("normalize: need at least 2 samples");
  double mn = signal[0];
  for (double v : signal) mn = std::min(mn, v);
  double sum = 0.0;
  for (double v : signal) sum += v - mn;
  const double mean_shifted = sum / static_cast<double>(signal.size());
  if (!(mean_shifted > 0.0))
    throw std::invalid_argument("normalize: degenerate signal: zero dynamic range");
  NormalizedSignal out;
  out.params.offset = mn;
  out.params.scale = 2.0 * mean_shifted;
  out.samples.reserve(signal.size());
  for (double v : signal) out.samples.push_back((v - mn) / out.params.scale);
  return out;
}

}  // namespace hypnos
