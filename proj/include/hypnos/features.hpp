#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypnos/normalize.hpp"
#include "hypnos/recording.hpp"

namespace hypnos {

// How the windowed deviation feature is computed. The published coefficient
// table was fit against the sample-variance form (sum of squared deviations
// over N-1, no square root), so that form is the default; TrueStd applies
// the square root.
enum class FeatureMode { LiteralVariance, TrueStd };

inline std::string to_string(FeatureMode m) {
  return m == FeatureMode::LiteralVariance ? "literal-eq3" : "true-std";
}

inline FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "literal-eq3") return FeatureMode::LiteralVariance;
  if (s == "true-std") return FeatureMode::TrueStd;
  throw std::invalid_argument("unknown feature mode: " + s);
}

// Windowed mean/deviation features on a uniform grid t_j = window_s + j * stride_s.
// Each feature at t_j is computed over the window_s seconds of signal strictly
// preceding t_j (trailing window). renorm_* hold the second-stage
// normalization constants once renormalize_features has run; empty otherwise.
struct FeatureSeries {
  double window_s{10.0};
  double stride_s{1.0};
  double start_time_s{10.0};  // first t_j, equals window_s
  std::vector<int> channel_ids;
  std::vector<std::vector<double>> mu;     // mu[ch][j]
  std::vector<std::vector<double>> sigma;  // sigma[ch][j]
  FeatureMode mode{FeatureMode::LiteralVariance};
  std::vector<NormParams> renorm_mu;
  std::vector<NormParams> renorm_sigma;

  std::size_t n_channels() const { return mu.size(); }
  std::size_t length() const { return mu.empty() ? 0 : mu[0].size(); }
  double time_at(std::size_t j) const { return start_time_s + static_cast<double>(j) * stride_s; }
  bool renormalized() const { return !renorm_mu.empty(); }

  int channel_index(int id) const {
    for (std::size_t c = 0; c < channel_ids.size(); ++c)
      if (channel_ids[c] == id) return static_cast<int>(c);
    return -1;
  }
};

namespace detail {

inline std::size_t whole_samples(double seconds, int rate_hz, const char* what) {
  const double exact = seconds * rate_hz;
  const double rounded = std::round(exact);
  if (rounded < 1.0 || std::abs(exact - rounded) > 1e-6 * std::max(1.0, std::abs(exact)))
    throw std::invalid_argument(std::string(what) + " is not a whole number of samples");
  return static_cast<std::size_t>(rounded);
}

// Two-pass mean and sum-of-squared-deviations over one window.
inline void window_stats(std::span<const double> w, double& mu, double& ssd) {
  double sum = 0.0;
  for (double v : w) sum += v;
  mu = sum / static_cast<double>(w.size());
  ssd = 0.0;
  for (double v : w) {
    const double d = v - mu;
    ssd += d * d;
  }
}

}  // namespace detail

// Extracts the sliding mean/deviation series from already-normalized channel
// data. Window placement: the feature at t_j covers [t_j - window_s, t_j),
// i.e. the window_s * rate samples before sample index t_j * rate.
inline FeatureSeries sliding_features(const std::vector<std::vector<double>>& channels,
                                      int sampling_rate_hz,
                                      const std::vector<int>& ids,
                                      double window_s = 10.0, double stride_s = 1.0,
                                      FeatureMode mode = FeatureMode::LiteralVariance) {
  if (channels.empty()) throw std::invalid_argument("sliding_features: no channels");
  const std::size_t w = detail::whole_samples(window_s, sampling_rate_hz, "window");
  const std::size_t s = detail::whole_samples(stride_s, sampling_rate_hz, "stride");
  const std::size_t n = channels[0].size();
  if (n < w) throw std::invalid_argument("sliding_features: window longer than signal");
  if (w < 2) throw std::invalid_argument("sliding_features: window must hold at least 2 samples");
  const std::size_t count = (n - w) / s + 1;

  FeatureSeries fs;
  fs.window_s = window_s;
  fs.stride_s = stride_s;
  fs.start_time_s = window_s;
  fs.channel_ids = ids;
  fs.mode = mode;
  fs.mu.resize(channels.size());
  fs.sigma.resize(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].size() != n)
      throw std::invalid_argument("sliding_features: ragged channel lengths");
    fs.mu[c].resize(count);
    fs.sigma[c].resize(count);
    for (std::size_t j = 0; j < count; ++j) {
      double mu = 0.0, ssd = 0.0;
      detail::window_stats({channels[c].data() + j * s, w}, mu, ssd);
      fs.mu[c][j] = mu;
      double dev = ssd / static_cast<double>(w - 1);
      if (mode == FeatureMode::TrueStd) dev = std::sqrt(dev);
      fs.sigma[c][j] = dev;
    }
  }
  return fs;
}

inline FeatureSeries sliding_features(const Recording& rec,
                                      double window_s = 10.0, double stride_s = 1.0,
                                      FeatureMode mode = FeatureMode::LiteralVariance) {
  return sliding_features(rec.channels, rec.sampling_rate_hz, channel_ids(rec),
                          window_s, stride_s, mode);
}

// Second normalization stage: the amplitude normalization applied again,
// independently to every mu and sigma sequence. Records per-sequence
// constants for streaming calibration.
inline FeatureSeries renormalize_features(const FeatureSeries& fs) {
  FeatureSeries out = fs;
  out.renorm_mu.clear();
  out.renorm_sigma.clear();
  for (std::size_t c = 0; c < fs.n_channels(); ++c) {
    NormalizedSignal nm = normalize(fs.mu[c]);
    NormalizedSignal ns = normalize(fs.sigma[c]);
    out.mu[c] = std::move(nm.samples);
    out.sigma[c] = std::move(ns.samples);
    out.renorm_mu.push_back(nm.params);
    out.renorm_sigma.push_back(ns.params);
  }
  return out;
}

}  // namespace hypnos
