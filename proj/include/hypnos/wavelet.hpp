#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace hypnos {

// Complex Morlet wavelet spectrum of one signal: coefficients[f][t] over the
// two grids. Frequencies are the analysis frequencies in Hz (wavelet dilation
// 1/f), so a pure tone at f0 Hz peaks near grid value f0.
struct CwtSurface {
  std::vector<double> frequencies_hz;  // ascending
  std::vector<double> times_s;
  std::vector<std::vector<std::complex<double>>> coefficients;  // [freq][time]
};

// Band-integrated |W|^2 over time.
struct BandEnergySeries {
  double band_lo_hz{0.0};
  double band_hi_hz{0.0};
  std::vector<double> times_s;
  std::vector<double> energy;
};

namespace detail {

// Gaussian envelope is cut where it falls below 1e-8 of its peak.
inline constexpr double kEnvelopeCut = 6.0697085175405866;  // sqrt(2 ln 1e8)

// Morlet amplitude constant: pi^(-1/4) * e^(-1/4).
inline const double kMorletAmp = std::pow(std::numbers::pi, -0.25) * std::exp(-0.25);

}  // namespace detail

// One CWT coefficient: W(f, t0) = sqrt(f) * sum_k x(t_k) Psi*(f (t_k - t0)) / rate
// with Psi(u) = pi^(-1/4) e^(-1/4) e^(i 2 pi u) e^(-u^2/2). The sum is
// truncated where the Gaussian envelope drops below 1e-8 of its peak and
// clipped to the signal bounds.
inline std::complex<double> cwt_morlet_at(std::span<const double> signal, int sampling_rate_hz,
                                          double freq_hz, double t0_s) {
  if (!(freq_hz > 0.0)) throw std::invalid_argument("cwt: nonpositive frequency");
  const double rate = static_cast<double>(sampling_rate_hz);
  const double half_width = detail::kEnvelopeCut / freq_hz;
  const double lo = (t0_s - half_width) * rate;
  const double hi = (t0_s + half_width) * rate;
  std::size_t k0 = lo <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(lo));
  std::size_t k1 = hi >= static_cast<double>(signal.size() - 1)
                       ? signal.size() - 1
                       : static_cast<std::size_t>(std::floor(hi));
  double re = 0.0, im = 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = k0; k <= k1; ++k) {
    const double u = freq_hz * (static_cast<double>(k) / rate - t0_s);
    const double env = detail::kMorletAmp * std::exp(-0.5 * u * u);
    const double phase = two_pi * u;
    // conj(Psi(u)) = amp * e^(-i 2 pi u) * e^(-u^2/2)
    re += signal[k] * env * std::cos(phase);
    im -= signal[k] * env * std::sin(phase);
  }
  const double norm = std::sqrt(freq_hz) / rate;
  return {re * norm, im * norm};
}

// CWT surface at explicit evaluation times.
inline CwtSurface cwt_morlet(std::span<const double> signal, int sampling_rate_hz,
                             const std::vector<double>& frequencies_hz,
                             const std::vector<double>& times_s) {
  if (signal.size() < 2) throw std::invalid_argument("cwt: empty signal");
  if (frequencies_hz.empty()) throw std::invalid_argument("cwt: empty frequency grid");
  for (double f : frequencies_hz)
    if (!(f > 0.0)) throw std::invalid_argument("cwt: nonpositive frequency");
  CwtSurface surf;
  surf.frequencies_hz = frequencies_hz;
  surf.times_s = times_s;
  surf.coefficients.resize(frequencies_hz.size());
  for (std::size_t fi = 0; fi < frequencies_hz.size(); ++fi) {
    surf.coefficients[fi].resize(times_s.size());
    for (std::size_t ti = 0; ti < times_s.size(); ++ti)
      surf.coefficients[fi][ti] =
          cwt_morlet_at(signal, sampling_rate_hz, frequencies_hz[fi], times_s[ti]);
  }
  return surf;
}

// CWT surface at every sample instant.
inline CwtSurface cwt_morlet(std::span<const double> signal, int sampling_rate_hz,
                             const std::vector<double>& frequencies_hz) {
  std::vector<double> times(signal.size());
  for (std::size_t k = 0; k < signal.size(); ++k)
    times[k] = static_cast<double>(k) / sampling_rate_hz;
  return cwt_morlet(signal, sampling_rate_hz, frequencies_hz, times);
}

inline std::vector<double> uniform_frequency_grid(double lo_hz, double hi_hz, double step_hz) {
  if (!(lo_hz > 0.0) || !(hi_hz > lo_hz) || !(step_hz > 0.0))
    throw std::invalid_argument("invalid frequency grid");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor((hi_hz - lo_hz) / step_hz + 1e-9)) + 1;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(lo_hz + static_cast<double>(i) * step_hz);
  return grid;
}

// Integrated energy over [lo, hi]: trapezoidal sum of |W(f, t)|^2 df across
// the grid frequencies inside the band.
inline BandEnergySeries band_energy(const CwtSurface& surf, double lo_hz, double hi_hz) {
  if (!(lo_hz < hi_hz)) throw std::invalid_argument("band_energy: f_min must be below f_max");
  if (surf.frequencies_hz.empty() || lo_hz < surf.frequencies_hz.front() - 1e-12 ||
      hi_hz > surf.frequencies_hz.back() + 1e-12)
    throw std::invalid_argument("band_energy: band outside frequency grid");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < surf.frequencies_hz.size(); ++i)
    if (surf.frequencies_hz[i] >= lo_hz - 1e-12 && surf.frequencies_hz[i] <= hi_hz + 1e-12)
      idx.push_back(i);
  if (idx.size() < 2)
    throw std::invalid_argument("band_energy: band narrower than the frequency grid step");

  BandEnergySeries out;
  out.band_lo_hz = lo_hz;
  out.band_hi_hz = hi_hz;
  out.times_s = surf.times_s;
  out.energy.assign(surf.times_s.size(), 0.0);
  for (std::size_t n = 0; n + 1 < idx.size(); ++n) {
    const std::size_t a = idx[n], b = idx[n + 1];
    const double df = surf.frequencies_hz[b] - surf.frequencies_hz[a];
    for (std::size_t t = 0; t < out.energy.size(); ++t) {
      const double ea = std::norm(surf.coefficients[a][t]);
      const double eb = std::norm(surf.coefficients[b][t]);
      out.energy[t] += 0.5 * (ea + eb) * df;
    }
  }
  return out;
}

}  // namespace hypnos
