#pragma once

#include <stdexcept>
#include <vector>

#include "hypnos/features.hpp"
#include "hypnos/model.hpp"
#include "hypnos/normalize.hpp"
#include "hypnos/recording.hpp"
#include "hypnos/streaming.hpp"

namespace hypnos {

// Feature series of a recording plus every normalization constant produced
// on the way (stage 1 per channel inside signal_norm, stage 2 inside the
// series itself).
struct PreprocessResult {
  FeatureSeries features;
  std::vector<NormParams> signal_norm;  // one per channel
};

// The full preprocessing chain: per-channel amplitude normalization, sliding
// mean/deviation windows, then the same normalization applied to each feature
// sequence (the form the classifier expects).
inline PreprocessResult preprocess(const Recording& rec, double window_s = 10.0,
                                   double stride_s = 1.0,
                                   FeatureMode mode = FeatureMode::LiteralVariance,
                                   bool renormalize = true) {
  validate(rec);
  PreprocessResult out;
  std::vector<std::vector<double>> normalized(rec.n_channels());
  out.signal_norm.reserve(rec.n_channels());
  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    NormalizedSignal ns = normalize(rec.channels[c]);
    normalized[c] = std::move(ns.samples);
    out.signal_norm.push_back(ns.params);
  }
  out.features = sliding_features(normalized, rec.sampling_rate_hz, channel_ids(rec),
                                  window_s, stride_s, mode);
  if (renormalize) out.features = renormalize_features(out.features);
  return out;
}

// Streaming calibration captured from an offline preprocessing pass.
inline Calibration make_calibration(const PreprocessResult& pre, int sampling_rate_hz) {
  if (!pre.features.renormalized())
    throw std::invalid_argument("calibration requires renormalized features");
  Calibration cal;
  cal.sampling_rate_hz = sampling_rate_hz;
  cal.window_s = pre.features.window_s;
  cal.stride_s = pre.features.stride_s;
  for (std::size_t c = 0; c < pre.features.n_channels(); ++c) {
    ChannelCalibration cc;
    cc.channel_id = pre.features.channel_ids[c];
    cc.signal = pre.signal_norm[c];
    cc.mu = pre.features.renorm_mu[c];
    cc.sigma = pre.features.renorm_sigma[c];
    cal.channels.push_back(cc);
  }
  return cal;
}

// Recording in, hypnogram out: the offline classification path.
inline ClassifyResult classify_recording(const Recording& rec, const PerceptronModel& model,
                                         double window_s = 10.0, double stride_s = 1.0) {
  const PreprocessResult pre = preprocess(rec, window_s, stride_s, model.feature_mode);
  return classify(model, pre.features);
}

}  // namespace hypnos
