#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypnos/hypnogram.hpp"
#include "hypnos/recording.hpp"
#include "hypnos/wavelet.hpp"

namespace hypnos {

// Double-crossing thresholds for one band: the detector arms at tr1 and
// releases at tr2 (tr1 >= tr2 > 0), evaluated once per comparison window.
struct ThresholdConfig {
  double tr1{0.0};
  double tr2{0.0};
  double comparison_window_s{0.5};
};

inline void validate(const ThresholdConfig& t) {
  if (!(t.tr2 > 0.0) || !(t.tr1 >= t.tr2))
    throw std::invalid_argument("thresholds: require tr1 >= tr2 > 0");
  if (!(t.comparison_window_s > 0.0))
    throw std::invalid_argument("thresholds: comparison window must be positive");
}

// Linear-interpolation percentile of a sample (the convention where the k-th
// order statistic sits at 100*k/(n-1) percent).
inline double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  if (!(pct >= 0.0 && pct <= 100.0)) throw std::invalid_argument("percentile: out of range");
  std::sort(values.begin(), values.end());
  const double h = (pct / 100.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// Threshold detection from the energy trace itself. The onset threshold is
// the onset_pct-th percentile of the observed energies, the offset threshold
// the offset_pct-th.
inline ThresholdConfig estimate_thresholds(const BandEnergySeries& energy,
                                           double onset_pct = 75.0, double offset_pct = 60.0,
                                           double comparison_window_s = 0.5) {
  if (!(offset_pct > 0.0) || !(onset_pct < 100.0) || !(offset_pct <= onset_pct))
    throw std::invalid_argument("estimate_thresholds: require 0 < offset_pct <= onset_pct < 100");
  if (energy.energy.empty()) throw std::invalid_argument("estimate_thresholds: empty energy");
  ThresholdConfig cfg;
  cfg.tr1 = percentile(energy.energy, onset_pct);
  cfg.tr2 = percentile(energy.energy, offset_pct);
  cfg.comparison_window_s = comparison_window_s;
  validate(cfg);
  return cfg;
}

// How votes from several energy traces combine into one state decision.
enum class BandFusion { Majority, All, Any };

inline BandFusion fusion_from_string(const std::string& s) {
  if (s == "majority") return BandFusion::Majority;
  if (s == "all") return BandFusion::All;
  if (s == "any") return BandFusion::Any;
  throw std::invalid_argument("unknown fusion rule: " + s);
}

namespace detail {

inline bool fuse(std::size_t votes, std::size_t total, BandFusion rule) {
  switch (rule) {
    case BandFusion::Majority: return votes * 2 > total;
    case BandFusion::All: return votes == total;
    case BandFusion::Any: return votes >= 1;
  }
  return false;
}

}  // namespace detail

// Hysteresis state machine over per-trace energies, one step per comparison
// window. traces[i][block]; thresholds[i] pairs with traces[i]. State starts
// at WS; WS->BS when the fused vote "energy > tr1" fires, BS->WS when the
// fused vote "energy < tr2" fires. Returns the state of every block.
inline std::vector<std::uint8_t> hysteresis_detect(
    const std::vector<std::vector<double>>& traces,
    const std::vector<ThresholdConfig>& thresholds, BandFusion rule = BandFusion::Majority) {
  if (traces.empty()) throw std::invalid_argument("hysteresis_detect: no traces");
  if (traces.size() != thresholds.size())
    throw std::invalid_argument("hysteresis_detect: thresholds/traces size mismatch");
  const std::size_t blocks = traces[0].size();
  for (const auto& t : traces)
    if (t.size() != blocks) throw std::invalid_argument("hysteresis_detect: ragged traces");
  for (const auto& t : thresholds) validate(t);

  std::vector<std::uint8_t> state(blocks);
  std::uint8_t cur = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t votes = 0;
    if (cur == 0) {
      for (std::size_t i = 0; i < traces.size(); ++i)
        if (traces[i][b] > thresholds[i].tr1) ++votes;
      if (detail::fuse(votes, traces.size(), rule)) cur = 1;
    } else {
      for (std::size_t i = 0; i < traces.size(); ++i)
        if (traces[i][b] < thresholds[i].tr2) ++votes;
      if (detail::fuse(votes, traces.size(), rule)) cur = 0;
    }
    state[b] = cur;
  }
  return state;
}

// Whether band thresholds see the channel-averaged energy or each channel's
// energy as an independent voting trace.
enum class ChannelMode { Averaged, PerChannel };

struct MarkupOptions {
  std::vector<std::pair<double, double>> bands_hz{
      {2.5, 4.5}, {5.0, 10.0}, {10.5, 12.5}, {15.0, 18.0}};
  double comparison_window_s{0.5};
  double onset_pct{75.0};
  double offset_pct{60.0};
  BandFusion fusion{BandFusion::Majority};
  ChannelMode channel_mode{ChannelMode::Averaged};
  double freq_grid_lo_hz{2.0};
  double freq_grid_hi_hz{20.0};
  double freq_grid_step_hz{0.25};
  // When set, used verbatim (one entry per band) instead of the percentile
  // estimate; in PerChannel mode the same band threshold applies to every
  // channel's trace.
  std::vector<ThresholdConfig> explicit_thresholds;
};

struct MarkupResult {
  Hypnogram hypnogram;
  std::vector<double> block_times_s;                  // comparison-window centers
  std::vector<std::vector<double>> band_energies;     // [band][block], channel-averaged
  std::vector<std::uint8_t> block_states;             // state per comparison window
  std::vector<ThresholdConfig> thresholds;            // one per voting trace
};

// Wavelet ground-truth markup: per comparison window, integrated Morlet band
// energies (averaged over channels by default) are pushed through the
// double-threshold state machine, and the block states are sampled onto a
// stride_s grid starting at t = 0.
inline MarkupResult markup_bs_ws(const Recording& rec, const MarkupOptions& opts = {},
                                 double stride_s = 1.0) {
  validate(rec);
  if (opts.bands_hz.empty()) throw std::invalid_argument("markup: no bands");
  if (!(stride_s > 0.0)) throw std::invalid_argument("markup: stride must be positive");
  const double block_s = opts.comparison_window_s;
  if (!(block_s > 0.0)) throw std::invalid_argument("markup: comparison window must be positive");
  const double duration = rec.duration_s();
  const auto n_blocks = static_cast<std::size_t>(std::floor(duration / block_s + 1e-9));
  if (n_blocks == 0) throw std::invalid_argument("markup: recording shorter than one comparison window");
  if (!opts.explicit_thresholds.empty() && opts.explicit_thresholds.size() != opts.bands_hz.size())
    throw std::invalid_argument("markup: need one explicit threshold per band");

  MarkupResult res;
  res.block_times_s.resize(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b)
    res.block_times_s[b] = (static_cast<double>(b) + 0.5) * block_s;

  double grid_lo = opts.freq_grid_lo_hz, grid_hi = opts.freq_grid_hi_hz;
  for (const auto& [lo, hi] : opts.bands_hz) {
    if (!(lo < hi) || !(lo > 0.0)) throw std::invalid_argument("markup: invalid band");
    grid_lo = std::min(grid_lo, lo);
    grid_hi = std::max(grid_hi, hi);
  }
  const auto freqs = uniform_frequency_grid(grid_lo, grid_hi, opts.freq_grid_step_hz);

  // energy[ch][band][block]
  std::vector<std::vector<std::vector<double>>> energy(rec.n_channels());
  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    const CwtSurface surf = cwt_morlet(rec.channels[c], rec.sampling_rate_hz, freqs,
                                       res.block_times_s);
    energy[c].reserve(opts.bands_hz.size());
    for (const auto& [lo, hi] : opts.bands_hz)
      energy[c].push_back(band_energy(surf, lo, hi).energy);
  }

  res.band_energies.assign(opts.bands_hz.size(), std::vector<double>(n_blocks, 0.0));
  for (std::size_t bandi = 0; bandi < opts.bands_hz.size(); ++bandi)
    for (std::size_t b = 0; b < n_blocks; ++b) {
      double sum = 0.0;
      for (std::size_t c = 0; c < rec.n_channels(); ++c) sum += energy[c][bandi][b];
      res.band_energies[bandi][b] = sum / static_cast<double>(rec.n_channels());
    }

  std::vector<std::vector<double>> traces;
  if (opts.channel_mode == ChannelMode::Averaged) {
    traces = res.band_energies;
  } else {
    for (std::size_t c = 0; c < rec.n_channels(); ++c)
      for (std::size_t bandi = 0; bandi < opts.bands_hz.size(); ++bandi)
        traces.push_back(energy[c][bandi]);
  }

  res.thresholds.reserve(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (!opts.explicit_thresholds.empty()) {
      ThresholdConfig cfg = opts.explicit_thresholds[i % opts.bands_hz.size()];
      cfg.comparison_window_s = block_s;
      validate(cfg);
      res.thresholds.push_back(cfg);
    } else {
      BandEnergySeries series;
      series.times_s = res.block_times_s;
      series.energy = traces[i];
      res.thresholds.push_back(
          estimate_thresholds(series, opts.onset_pct, opts.offset_pct, block_s));
    }
  }

  res.block_states = hysteresis_detect(traces, res.thresholds, opts.fusion);

  // Sample block states onto the output grid; t exactly on a block boundary
  // belongs to the later block, the final boundary to the last block.
  const auto n_out = static_cast<std::size_t>(std::floor(duration / stride_s + 1e-9)) + 1;
  res.hypnogram.start_time_s = 0.0;
  res.hypnogram.stride_s = stride_s;
  res.hypnogram.labels.resize(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    const double t = static_cast<double>(j) * stride_s;
    auto b = static_cast<std::size_t>(std::floor(t / block_s + 1e-9));
    b = std::min(b, n_blocks - 1);
    res.hypnogram.labels[j] = res.block_states[b];
  }
  return res;
}

}  // namespace hypnos
