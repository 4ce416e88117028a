#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypnos/features.hpp"
#include "hypnos/hypnogram.hpp"

namespace hypnos {

// Single sigmoid neuron over windowed features. Weights are ordered
// (W_mu_a, W_sigma_a, W_mu_b, W_sigma_b, ...) with channels ascending, so the
// input vector for channel set {1,2} is (mu_1, sigma_1, mu_2, sigma_2).
struct PerceptronModel {
  std::vector<int> channel_set;  // ascending, from {1,2},{1,3},{2,3},{1,2,3}
  std::vector<double> weights;
  double bias{0.0};
  double threshold{0.5};
  FeatureMode feature_mode{FeatureMode::LiteralVariance};

  std::size_t input_dim() const { return 2 * channel_set.size(); }
};

inline void validate(const PerceptronModel& m) {
  if (m.channel_set.size() < 2)
    throw std::invalid_argument("model: a single channel is not sufficient; use two or three");
  if (m.channel_set.size() > 3)
    throw std::invalid_argument("model: at most three channels");
  for (std::size_t i = 0; i < m.channel_set.size(); ++i) {
    if (m.channel_set[i] < 1 || m.channel_set[i] > 3)
      throw std::invalid_argument("model: channel ids must be 1, 2 or 3");
    if (i > 0 && m.channel_set[i] <= m.channel_set[i - 1])
      throw std::invalid_argument("model: channel set must be strictly ascending");
  }
  if (m.weights.size() != m.input_dim())
    throw std::invalid_argument("model: weight count must be twice the channel count");
  for (double w : m.weights)
    if (!std::isfinite(w)) throw std::invalid_argument("model: non-finite weight");
  if (!std::isfinite(m.bias)) throw std::invalid_argument("model: non-finite bias");
  if (!(m.threshold > 0.0 && m.threshold < 1.0))
    throw std::invalid_argument("model: threshold must lie in (0,1)");
}

// Numerically stable logistic function; exact for |z| beyond exp overflow.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Forward pass: sigmoid(x . W + b).
inline double forward(const PerceptronModel& m, std::span<const double> x) {
  if (x.size() != m.weights.size())
    throw std::invalid_argument("forward: input dimension mismatch");
  double z = m.bias;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw std::invalid_argument("forward: non-finite input");
    z += x[i] * m.weights[i];
  }
  return sigmoid(z);
}

struct ClassifyResult {
  Hypnogram hypnogram;
  std::vector<double> probabilities;
};

// Gathers the model's input vector for feature index j.
inline void feature_row(const FeatureSeries& fs, const PerceptronModel& m,
                        const std::vector<int>& cols, std::size_t j, std::vector<double>& x) {
  x.clear();
  for (std::size_t k = 0; k < m.channel_set.size(); ++k) {
    x.push_back(fs.mu[cols[k]][j]);
    x.push_back(fs.sigma[cols[k]][j]);
  }
}

inline std::vector<int> resolve_channels(const FeatureSeries& fs, const PerceptronModel& m) {
  std::vector<int> cols;
  for (int id : m.channel_set) {
    const int c = fs.channel_index(id);
    if (c < 0)
      throw std::invalid_argument("classify: feature series lacks channel " + std::to_string(id));
    cols.push_back(c);
  }
  return cols;
}

// Labels every feature window: 1 (BS) when the forward probability reaches
// the threshold, 0 (WS) otherwise. Ties at the threshold go to BS.
inline ClassifyResult classify(const PerceptronModel& m, const FeatureSeries& fs) {
  validate(m);
  const auto cols = resolve_channels(fs, m);
  ClassifyResult res;
  res.hypnogram.start_time_s = fs.start_time_s;
  res.hypnogram.stride_s = fs.stride_s;
  res.hypnogram.labels.resize(fs.length());
  res.probabilities.resize(fs.length());
  std::vector<double> x;
  for (std::size_t j = 0; j < fs.length(); ++j) {
    feature_row(fs, m, cols, j, x);
    const double p = forward(m, x);
    res.probabilities[j] = p;
    res.hypnogram.labels[j] = p >= m.threshold ? 1 : 0;
  }
  return res;
}

// Componentwise mean of weights and biases; channel sets must agree.
// Threshold and feature mode are taken from the first model.
inline PerceptronModel average_models(const std::vector<PerceptronModel>& models) {
  if (models.empty()) throw std::invalid_argument("average_models: empty list");
  PerceptronModel avg = models.front();
  validate(avg);
  for (std::size_t i = 1; i < models.size(); ++i) {
    validate(models[i]);
    if (models[i].channel_set != avg.channel_set)
      throw std::invalid_argument("average_models: mixed channel sets");
    for (std::size_t k = 0; k < avg.weights.size(); ++k) avg.weights[k] += models[i].weights[k];
    avg.bias += models[i].bias;
  }
  const auto n = static_cast<double>(models.size());
  for (double& w : avg.weights) w /= n;
  avg.bias /= n;
  return avg;
}

// Published averaged coefficients, one row per channel combination. These are
// the exact values; a classifier built from them needs no training.
inline PerceptronModel pretrained(const std::vector<int>& channel_set) {
  PerceptronModel m;
  m.channel_set = channel_set;
  if (channel_set == std::vector<int>{1, 2}) {
    m.bias = -3.02;
    m.weights = {-0.51, 3.22, -1.56, 4.76};
  } else if (channel_set == std::vector<int>{1, 3}) {
    m.bias = -2.13;
    m.weights = {-0.06, 6.52, -1.05, -1.23};
  } else if (channel_set == std::vector<int>{2, 3}) {
    m.bias = -2.59;
    m.weights = {-0.97, 8.78, -1.36, -1.73};
  } else if (channel_set == std::vector<int>{1, 2, 3}) {
    m.bias = -2.67;
    m.weights = {-0.10, 3.59, -0.84, 6.29, -1.24, -2.78};
  } else {
    throw std::invalid_argument(
        "pretrained: unknown channel set (supported: 12, 13, 23, 123)");
  }
  return m;
}

// "12" -> {1,2} etc.
inline std::vector<int> channel_set_from_string(const std::string& s) {
  std::vector<int> set;
  for (char c : s) {
    if (c < '1' || c > '9') throw std::invalid_argument("bad channel set: " + s);
    set.push_back(c - '0');
  }
  return set;
}

inline std::string channel_set_to_string(const std::vector<int>& set) {
  std::string s;
  for (int c : set) s += std::to_string(c);
  return s;
}

}  // namespace hypnos
