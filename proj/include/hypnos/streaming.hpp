#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypnos/features.hpp"
#include "hypnos/model.hpp"
#include "hypnos/normalize.hpp"

namespace hypnos {

// Normalization constants of both stages for one channel, captured from an
// offline preprocessing pass (the amplitude normalization needs the global
// min/mean, which a live stream cannot know).
struct ChannelCalibration {
  int channel_id{0};
  NormParams signal;  // stage 1, raw samples
  NormParams mu;      // stage 2, windowed means
  NormParams sigma;   // stage 2, windowed deviations
};

struct Calibration {
  int sampling_rate_hz{400};
  double window_s{10.0};
  double stride_s{1.0};
  std::vector<ChannelCalibration> channels;  // in wire frame order
};

struct StreamOutput {
  double time_s{0.0};
  double probability{0.0};
  std::uint8_t label{0};
};

// Online classifier over fixed-rate frames (one sample per channel). Labels
// are emitted every stride once the window buffers are full; with the
// calibration constants of a recording, replaying that recording reproduces
// the offline classification exactly.
class StreamingClassifier {
 public:
  explicit StreamingClassifier(PerceptronModel model) : model_(std::move(model)) {
    validate(model_);
  }

  StreamingClassifier(PerceptronModel model, const Calibration& cal)
      : StreamingClassifier(std::move(model)) {
    set_calibration(cal);
  }

  void set_calibration(const Calibration& cal) {
    if (cal.sampling_rate_hz <= 0)
      throw std::invalid_argument("stream: sampling rate must be positive");
    window_samples_ = detail::whole_samples(cal.window_s, cal.sampling_rate_hz, "window");
    stride_samples_ = detail::whole_samples(cal.stride_s, cal.sampling_rate_hz, "stride");
    if (window_samples_ < 2) throw std::invalid_argument("stream: window must hold at least 2 samples");
    rate_ = cal.sampling_rate_hz;
    frame_width_ = cal.channels.size();
    slots_.clear();
    for (int id : model_.channel_set) {
      std::size_t pos = cal.channels.size();
      for (std::size_t i = 0; i < cal.channels.size(); ++i)
        if (cal.channels[i].channel_id == id) pos = i;
      if (pos == cal.channels.size())
        throw std::invalid_argument("stream: calibration lacks channel " + std::to_string(id));
      slots_.push_back({pos, cal.channels[pos], std::vector<double>(window_samples_, 0.0)});
    }
    frames_pushed_ = 0;
    head_ = 0;
    calibrated_ = true;
  }

  bool calibrated() const { return calibrated_; }
  std::size_t frames_pushed() const { return frames_pushed_; }

  // Feeds one frame; returns a result every stride once the window is full.
  std::optional<StreamOutput> push(std::span<const double> frame) {
    if (!calibrated_) throw std::logic_error("stream: push before calibration");
    if (frame.size() != frame_width_)
      throw std::invalid_argument("stream: frame must carry one sample per channel");
    for (auto& slot : slots_) {
      const double v = frame[slot.frame_pos];
      if (!std::isfinite(v)) throw std::invalid_argument("stream: non-finite sample");
      slot.ring[head_] = v;
    }
    head_ = (head_ + 1) % window_samples_;
    ++frames_pushed_;
    if (frames_pushed_ < window_samples_) return std::nullopt;
    if ((frames_pushed_ - window_samples_) % stride_samples_ != 0) return std::nullopt;

    x_.clear();
    for (auto& slot : slots_) {
      // two passes in temporal order, matching the offline feature extraction
      double sum = 0.0;
      for (std::size_t k = 0; k < window_samples_; ++k)
        sum += apply_norm(slot.ring[(head_ + k) % window_samples_], slot.cal.signal);
      const double mu = sum / static_cast<double>(window_samples_);
      double ssd = 0.0;
      for (std::size_t k = 0; k < window_samples_; ++k) {
        const double d = apply_norm(slot.ring[(head_ + k) % window_samples_], slot.cal.signal) - mu;
        ssd += d * d;
      }
      double dev = ssd / static_cast<double>(window_samples_ - 1);
      if (model_.feature_mode == FeatureMode::TrueStd) dev = std::sqrt(dev);
      x_.push_back(apply_norm(mu, slot.cal.mu));
      x_.push_back(apply_norm(dev, slot.cal.sigma));
    }
    StreamOutput out;
    out.time_s = static_cast<double>(frames_pushed_) / rate_;
    out.probability = forward(model_, x_);
    out.label = out.probability >= model_.threshold ? 1 : 0;
    return out;
  }

  const PerceptronModel& model() const { return model_; }

 private:
  struct Slot {
    std::size_t frame_pos;
    ChannelCalibration cal;
    std::vector<double> ring;
  };

  PerceptronModel model_;
  std::vector<Slot> slots_;
  std::vector<double> x_;
  std::size_t window_samples_{0};
  std::size_t stride_samples_{0};
  std::size_t frame_width_{0};
  std::size_t frames_pushed_{0};
  std::size_t head_{0};
  int rate_{400};
  bool calibrated_{false};
};

}  // namespace hypnos
