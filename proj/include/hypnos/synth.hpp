#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypnos/hypnogram.hpp"
#include "hypnos/random.hpp"
#include "hypnos/recording.hpp"

namespace hypnos {

struct SynthSegment {
  std::uint8_t state{0};  // 0 = WS, 1 = BS
  double duration_s{0.0};
};

// Synthetic multichannel ECoG with a known BS/WS schedule. WS segments are
// low-amplitude broadband noise; BS segments are higher-amplitude with most
// power in a slow 0.5-4 Hz oscillation plus optional 12-16 Hz spindle bursts.
// All channels switch state together; noise and oscillation phases are drawn
// per channel; the subject gain is applied last and models between-subject
// amplitude variability.
struct SynthSpec {
  double duration_s{600.0};
  int sampling_rate_hz{400};
  std::vector<SynthSegment> schedule;
  double ws_amplitude_mv{0.05};
  double bs_amplitude_mv{0.15};
  double bs_delta_weight{0.8};        // fraction of BS power in the slow band
  double spindle_rate_per_min{6.0};   // BS only
  double noise_floor_mv{0.005};       // sensor noise added to every sample
  std::vector<double> channel_gains{1.0, 1.0, 1.0};
  std::uint64_t seed{0};
};

inline void validate(const SynthSpec& s) {
  if (!(s.duration_s > 0.0) || s.sampling_rate_hz <= 0)
    throw std::invalid_argument("synth: duration and sampling rate must be positive");
  if (s.schedule.empty()) throw std::invalid_argument("synth: empty schedule");
  double total = 0.0;
  for (const auto& seg : s.schedule) {
    if (seg.state > 1) throw std::invalid_argument("synth: segment state must be 0 or 1");
    if (!(seg.duration_s > 0.0)) throw std::invalid_argument("synth: segment duration must be positive");
    total += seg.duration_s;
  }
  if (std::abs(total - s.duration_s) > 1e-9)
    throw std::invalid_argument("synth: schedule durations must sum to duration_s");
  if (!(s.ws_amplitude_mv > 0.0) || !(s.bs_amplitude_mv > 0.0))
    throw std::invalid_argument("synth: amplitudes must be positive");
  if (!(s.bs_amplitude_mv > s.ws_amplitude_mv))
    throw std::invalid_argument("synth: BS amplitude must exceed WS amplitude");
  if (!(s.bs_delta_weight >= 0.0 && s.bs_delta_weight <= 1.0))
    throw std::invalid_argument("synth: delta weight must lie in [0,1]");
  if (s.spindle_rate_per_min < 0.0 || s.noise_floor_mv < 0.0)
    throw std::invalid_argument("synth: spindle rate and noise floor must be nonnegative");
  if (s.channel_gains.empty()) throw std::invalid_argument("synth: need at least one channel gain");
  for (double g : s.channel_gains)
    if (!(g > 0.0)) throw std::invalid_argument("synth: channel gains must be positive");
}

// Alternating WS/BS segments with durations drawn uniformly from
// [min_seg_s, max_seg_s], starting in WS, clipped to fill duration_s exactly.
inline std::vector<SynthSegment> random_schedule(double duration_s, double min_seg_s,
                                                 double max_seg_s, std::uint64_t seed) {
  if (!(min_seg_s > 0.0) || !(max_seg_s >= min_seg_s) || !(duration_s > 0.0))
    throw std::invalid_argument("random_schedule: bad segment bounds");
  Rng rng(seed);
  std::vector<SynthSegment> schedule;
  double t = 0.0;
  std::uint8_t state = 0;
  while (t < duration_s - 1e-9) {
    double d = std::floor(rng.uniform(min_seg_s, max_seg_s));
    d = std::min(std::max(d, 1.0), duration_s - t);
    schedule.push_back({state, d});
    t += d;
    state ^= 1;
  }
  return schedule;
}

namespace detail {

inline constexpr int kBsOscillators = 5;
inline constexpr double kSpindleFreqHz = 14.0;
inline constexpr double kSpindleDurationS = 0.5;

}  // namespace detail

// Deterministic generator: identical specs give bitwise-identical output.
inline std::pair<Recording, Hypnogram> generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const int rate = spec.sampling_rate_hz;
  const auto n_channels = spec.channel_gains.size();
  const auto n_samples = static_cast<std::size_t>(std::llround(spec.duration_s * rate));

  Recording rec;
  rec.sampling_rate_hz = rate;
  rec.channel_labels = default_channel_labels(n_channels);
  rec.subject_id = "synthetic-" + std::to_string(spec.seed);
  rec.channels.assign(n_channels, std::vector<double>(n_samples, 0.0));

  // sqrt-power split: bs_delta_weight is the fraction of BS *power* carried
  // by the slow oscillation, the rest stays broadband
  const double osc_amp = spec.bs_amplitude_mv * std::sqrt(spec.bs_delta_weight);
  const double bs_noise_amp = spec.bs_amplitude_mv * std::sqrt(1.0 - spec.bs_delta_weight);
  // unit-variance normalization of the oscillator bank (k sinusoids of rms 1/sqrt(2))
  const double osc_norm = 1.0 / std::sqrt(0.5 * detail::kBsOscillators);
  const double two_pi = 2.0 * std::numbers::pi;

  std::size_t seg_start = 0;
  for (const auto& seg : spec.schedule) {
    const auto seg_len = std::min(
        static_cast<std::size_t>(std::llround(seg.duration_s * rate)), n_samples - seg_start);

    std::vector<double> spindle_starts;
    if (seg.state == 1 && spec.spindle_rate_per_min > 0.0) {
      const double expected = spec.spindle_rate_per_min * seg.duration_s / 60.0;
      const std::size_t count = rng.poisson(expected);
      for (std::size_t i = 0; i < count; ++i)
        spindle_starts.push_back(rng.uniform(0.0, seg.duration_s - detail::kSpindleDurationS));
    }

    for (std::size_t c = 0; c < n_channels; ++c) {
      auto& ch = rec.channels[c];
      if (seg.state == 1) {
        double freq[detail::kBsOscillators], phase[detail::kBsOscillators];
        for (int k = 0; k < detail::kBsOscillators; ++k) {
          freq[k] = rng.uniform(0.5, 4.0);
          phase[k] = rng.uniform(0.0, two_pi);
        }
        for (std::size_t i = 0; i < seg_len; ++i) {
          const double t = static_cast<double>(i) / rate;
          double osc = 0.0;
          for (int k = 0; k < detail::kBsOscillators; ++k)
            osc += std::sin(two_pi * freq[k] * t + phase[k]);
          ch[seg_start + i] = osc_amp * osc_norm * osc + bs_noise_amp * rng.normal();
        }
        for (double s0 : spindle_starts) {
          const double ph = rng.uniform(0.0, two_pi);
          const auto i0 = static_cast<std::size_t>(std::llround(s0 * rate));
          const auto burst = static_cast<std::size_t>(std::llround(detail::kSpindleDurationS * rate));
          if (burst < 2) continue;
          for (std::size_t i = 0; i < burst && seg_start + i0 + i < n_samples; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(burst - 1);
            const double hann = 0.5 * (1.0 - std::cos(two_pi * u));
            const double t = static_cast<double>(i0 + i) / rate;
            ch[seg_start + i0 + i] +=
                spec.bs_amplitude_mv * hann * std::sin(two_pi * detail::kSpindleFreqHz * t + ph);
          }
        }
      } else {
        for (std::size_t i = 0; i < seg_len; ++i)
          ch[seg_start + i] = spec.ws_amplitude_mv * rng.normal();
      }
    }
    seg_start += seg_len;
  }

  if (spec.noise_floor_mv > 0.0)
    for (std::size_t c = 0; c < n_channels; ++c)
      for (auto& v : rec.channels[c]) v += spec.noise_floor_mv * rng.normal();

  for (std::size_t c = 0; c < n_channels; ++c)
    for (auto& v : rec.channels[c]) v *= spec.channel_gains[c];

  // ground-truth schedule at 1 s stride
  Hypnogram truth;
  truth.start_time_s = 0.0;
  truth.stride_s = 1.0;
  const auto n_labels = static_cast<std::size_t>(std::floor(spec.duration_s + 1e-9));
  truth.labels.resize(n_labels);
  double seg_end = 0.0;
  std::size_t si = 0;
  for (std::size_t j = 0; j < n_labels; ++j) {
    const double t = static_cast<double>(j);
    while (si < spec.schedule.size() && t >= seg_end + spec.schedule[si].duration_s - 1e-9) {
      seg_end += spec.schedule[si].duration_s;
      ++si;
    }
    truth.labels[j] = si < spec.schedule.size() ? spec.schedule[si].state
                                                : spec.schedule.back().state;
  }
  return {std::move(rec), std::move(truth)};
}

}  // namespace hypnos
