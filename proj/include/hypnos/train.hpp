#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypnos/features.hpp"
#include "hypnos/hypnogram.hpp"
#include "hypnos/model.hpp"
#include "hypnos/random.hpp"

namespace hypnos {

enum class ClassBalance { TruncateMajority, None };

struct TrainConfig {
  double learning_rate{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
  int epochs{500};
  int batch_size{32};
  std::uint64_t seed{0};
  ClassBalance class_balance{ClassBalance::TruncateMajority};
};

inline void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0) || !(c.beta2 > 0.0 && c.beta2 < 1.0))
    throw std::invalid_argument("train: beta1/beta2 must lie in (0,1)");
  if (!(c.epsilon > 0.0)) throw std::invalid_argument("train: epsilon must be positive");
  if (c.epochs < 1) throw std::invalid_argument("train: epochs must be positive");
  if (c.batch_size < 1) throw std::invalid_argument("train: batch_size must be positive");
}

struct TrainResult {
  PerceptronModel model;
  double train_accuracy{0.0};          // on the (balanced) training set
  std::vector<double> epoch_loss;      // mean BCE after each epoch
};

// Mean binary cross-entropy of the model on rows X with labels y.
inline double bce_loss(const PerceptronModel& m, const std::vector<std::vector<double>>& X,
                       const std::vector<std::uint8_t>& y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double p = forward(m, X[i]);
    loss -= y[i] ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(X.size());
}

// Analytic BCE gradient at one sample: d/dw = (p - y) x, d/db = (p - y).
inline void bce_gradient(const PerceptronModel& m, std::span<const double> x, std::uint8_t y,
                         std::vector<double>& grad_w, double& grad_b) {
  const double r = forward(m, x) - static_cast<double>(y);
  grad_w.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) grad_w[i] = r * x[i];
  grad_b = r;
}

namespace detail {

struct AdamState {
  std::vector<double> m, v;
  double beta1_pow{1.0}, beta2_pow{1.0};

  explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad, const TrainConfig& cfg) {
    beta1_pow *= cfg.beta1;
    beta2_pow *= cfg.beta2;
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      const double mh = m[i] / (1.0 - beta1_pow);
      const double vh = v[i] / (1.0 - beta2_pow);
      params[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
    }
  }
};

}  // namespace detail

// Trains the single neuron on pre-assembled rows (BCE loss, Adam). Weights
// start uniform in [-0.5, 0.5) from the seed, bias at 0; with
// TruncateMajority the majority class is first subsampled (same seed stream)
// to the minority count.
inline TrainResult train_rows(std::vector<std::vector<double>> X, std::vector<std::uint8_t> y,
                              const std::vector<int>& channel_set, const TrainConfig& cfg,
                              FeatureMode mode = FeatureMode::LiteralVariance) {
  validate(cfg);
  if (X.size() != y.size() || X.empty()) throw std::invalid_argument("train: empty or mismatched data");
  const std::size_t dim = 2 * channel_set.size();
  for (const auto& row : X)
    if (row.size() != dim) throw std::invalid_argument("train: row dimension mismatch");
  std::size_t n_pos = 0;
  for (auto v : y) n_pos += v;
  if (n_pos == 0 || n_pos == y.size())
    throw std::invalid_argument("train: both classes must be present");

  Rng rng(cfg.seed);

  PerceptronModel model;
  model.channel_set = channel_set;
  model.feature_mode = mode;
  model.bias = 0.0;
  model.weights.resize(dim);
  for (double& w : model.weights) w = rng.uniform(-0.5, 0.5);
  validate(model);

  std::vector<std::size_t> idx;
  if (cfg.class_balance == ClassBalance::TruncateMajority) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
    auto& majority = pos.size() > neg.size() ? pos : neg;
    const std::size_t keep = std::min(pos.size(), neg.size());
    rng.shuffle(majority);
    majority.resize(keep);
    idx.reserve(2 * keep);
    idx.insert(idx.end(), pos.begin(), pos.end());
    idx.insert(idx.end(), neg.begin(), neg.end());
    std::sort(idx.begin(), idx.end());
  } else {
    idx.resize(y.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }

  // pack parameters as (weights..., bias) for the optimizer
  std::vector<double> params = model.weights;
  params.push_back(model.bias);
  detail::AdamState adam(params.size());
  std::vector<double> grad(params.size());
  TrainResult res;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(idx);
    for (std::size_t off = 0; off < idx.size(); off += batch) {
      const std::size_t end = std::min(off + batch, idx.size());
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = off; k < end; ++k) {
        const auto& x = X[idx[k]];
        double z = params[dim];
        for (std::size_t i = 0; i < dim; ++i) z += x[i] * params[i];
        const double r = sigmoid(z) - static_cast<double>(y[idx[k]]);
        for (std::size_t i = 0; i < dim; ++i) grad[i] += r * x[i];
        grad[dim] += r;
      }
      const auto bs = static_cast<double>(end - off);
      for (double& g : grad) g /= bs;
      adam.step(params, grad, cfg);
    }
    model.weights.assign(params.begin(), params.begin() + dim);
    model.bias = params[dim];
    double loss = 0.0;
    for (std::size_t k : idx) {
      const double p = forward(model, X[k]);
      loss -= y[k] ? std::log(p) : std::log(1.0 - p);
    }
    res.epoch_loss.push_back(loss / static_cast<double>(idx.size()));
  }

  std::size_t correct = 0;
  for (std::size_t k : idx) {
    const double p = forward(model, X[k]);
    const std::uint8_t label = p >= model.threshold ? 1 : 0;
    correct += label == y[k];
  }
  res.train_accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
  res.model = std::move(model);
  return res;
}

// Feature windows with a matching label: window indices
// [first_window, first_window + labels.size()) of the series.
struct AlignedLabels {
  std::size_t first_window{0};
  std::vector<std::uint8_t> labels;
};

// Pairs each feature time with the hypnogram label on the same grid point.
// The grids must share stride and phase; windows outside the labelled range
// (e.g. the final window ending exactly at the recording end) are trimmed.
inline AlignedLabels align_labels(const FeatureSeries& fs, const Hypnogram& labels) {
  if (std::abs(fs.stride_s - labels.stride_s) > kTimeTolS)
    throw std::invalid_argument("train: misaligned grids (stride mismatch)");
  if (fs.length() == 0 || labels.labels.empty())
    throw std::invalid_argument("train: empty features or labels");
  const double pos = (fs.start_time_s - labels.start_time_s) / labels.stride_s;
  const double shift = std::round(pos);
  if (std::abs(pos - shift) * labels.stride_s > kTimeTolS)
    throw std::invalid_argument("train: misaligned grids (offset by a fraction of a stride)");
  const auto k = static_cast<long long>(shift);  // label index of window 0
  const long long first = std::max(0LL, -k);
  const long long end =
      std::min(static_cast<long long>(fs.length()), static_cast<long long>(labels.size()) - k);
  if (end <= first)
    throw std::invalid_argument("train: misaligned grids (no overlapping windows)");
  AlignedLabels out;
  out.first_window = static_cast<std::size_t>(first);
  out.labels.reserve(static_cast<std::size_t>(end - first));
  for (long long j = first; j < end; ++j)
    out.labels.push_back(labels.labels[static_cast<std::size_t>(j + k)]);
  return out;
}

// Supervised training from a feature series and an aligned label hypnogram,
// restricted to the given channel subset.
inline TrainResult train(const FeatureSeries& fs, const Hypnogram& labels,
                         const TrainConfig& cfg, const std::vector<int>& channel_set) {
  PerceptronModel probe;
  probe.channel_set = channel_set;
  const auto cols = resolve_channels(fs, probe);
  const auto aligned = align_labels(fs, labels);
  std::vector<std::vector<double>> X(aligned.labels.size());
  std::vector<double> x;
  for (std::size_t j = 0; j < aligned.labels.size(); ++j) {
    feature_row(fs, probe, cols, aligned.first_window + j, x);
    X[j] = x;
  }
  return train_rows(std::move(X), aligned.labels, channel_set, cfg, fs.mode);
}

}  // namespace hypnos
