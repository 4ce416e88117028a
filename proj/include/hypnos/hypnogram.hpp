#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hypnos {

// Time grid tolerance used everywhere two hypnogram grids are compared.
inline constexpr double kTimeTolS = 1e-9;

// Binary sleep score on a uniform time grid: label 0 = waking state (WS),
// 1 = behavioral sleep (BS). Sample j sits at start_time_s + j * stride_s.
struct Hypnogram {
  double start_time_s{0.0};
  double stride_s{1.0};
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  double time_at(std::size_t j) const { return start_time_s + static_cast<double>(j) * stride_s; }
};

inline void validate(const Hypnogram& h) {
  if (!(h.stride_s > 0.0)) throw std::invalid_argument("hypnogram: stride_s must be positive");
  for (auto v : h.labels)
    if (v != 0 && v != 1) throw std::invalid_argument("hypnogram: label outside {0,1}");
}

inline bool same_grid(const Hypnogram& a, const Hypnogram& b) {
  return a.labels.size() == b.labels.size() &&
         std::abs(a.start_time_s - b.start_time_s) <= kTimeTolS &&
         std::abs(a.stride_s - b.stride_s) <= kTimeTolS;
}

// Grid-aware equality: labels exact, start/stride within the format's 1 ns
// time tolerance.
inline bool operator==(const Hypnogram& a, const Hypnogram& b) {
  return same_grid(a, b) && a.labels == b.labels;
}

inline double bs_fraction(const Hypnogram& h) {
  if (h.labels.empty()) return 0.0;
  std::size_t n = 0;
  for (auto v : h.labels) n += v;
  return static_cast<double>(n) / static_cast<double>(h.labels.size());
}

// Restricts two hypnograms with equal stride to their common time range so
// they can be compared window-for-window. Starts may differ by any integer
// multiple of the stride. Throws when strides differ, the grids are offset
// by a fraction of a stride, or the overlap is empty.
inline std::pair<Hypnogram, Hypnogram> overlap_align(const Hypnogram& a, const Hypnogram& b) {
  if (std::abs(a.stride_s - b.stride_s) > kTimeTolS)
    throw std::invalid_argument("overlap_align: strides differ");
  const double stride = a.stride_s;
  const double shift = (b.start_time_s - a.start_time_s) / stride;
  const double shift_int = std::round(shift);
  if (std::abs(shift - shift_int) * stride > kTimeTolS)
    throw std::invalid_argument("overlap_align: grids offset by a fraction of a stride");
  // indices of the overlap start within each sequence
  const long long k = static_cast<long long>(shift_int);
  long long ia = std::max(0LL, k);
  long long ib = std::max(0LL, -k);
  long long na = static_cast<long long>(a.labels.size()) - ia;
  long long nb = static_cast<long long>(b.labels.size()) - ib;
  long long n = std::min(na, nb);
  if (n <= 0) throw std::invalid_argument("overlap_align: no overlapping samples");
  Hypnogram oa{a.time_at(static_cast<std::size_t>(ia)), stride,
               {a.labels.begin() + ia, a.labels.begin() + ia + n}};
  Hypnogram ob{b.time_at(static_cast<std::size_t>(ib)), stride,
               {b.labels.begin() + ib, b.labels.begin() + ib + n}};
  return {oa, ob};
}

}  // namespace hypnos
