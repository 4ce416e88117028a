#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hypnos/features.hpp"
#include "hypnos/hypnogram.hpp"
#include "hypnos/recording.hpp"

namespace hypnos {

namespace detail {

// shortest decimal form that parses back to the same double
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

// fixed 17-significant-digit rendering for feature exports
inline std::string format_double17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view field, const std::string& context) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::runtime_error(context + ": cannot parse number '" + std::string(field) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Recording CSV: header `t,<label>[,<label>...]`, one row per sample.
// The time column is informative; the sampling rate is declared by the caller
// and cross-checked against the file's implied rate to one part in 1e6.
// ---------------------------------------------------------------------------

inline Recording load_recording_csv(const std::string& path, int sampling_rate_hz = 400) {
  auto in = detail::open_input(path);
  std::string line;
  if (!detail::read_line(in, line)) throw std::runtime_error(path + ": missing header");
  auto header = detail::split_csv(line);
  if (header.size() < 2 || header[0] != "t")
    throw std::runtime_error(path + ": malformed header (want t,<ch1>[,<ch2>...])");

  Recording rec;
  rec.sampling_rate_hz = sampling_rate_hz;
  for (std::size_t i = 1; i < header.size(); ++i)
    rec.channel_labels.emplace_back(header[i]);
  rec.channels.resize(header.size() - 1);

  std::vector<double> times;
  std::size_t row = 1;
  while (detail::read_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + ": row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, want " +
                               std::to_string(header.size()));
    const std::string ctx = path + ": row " + std::to_string(row);
    times.push_back(detail::parse_double(fields[0], ctx));
    for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
      const double v = detail::parse_double(fields[c + 1], ctx);
      if (!std::isfinite(v)) throw std::runtime_error(ctx + ": non-finite sample");
      rec.channels[c].push_back(v);
    }
  }
  validate(rec);

  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::runtime_error(path + ": time column not strictly increasing at row " +
                               std::to_string(i + 2));
  if (times.size() >= 2) {
    const double implied = static_cast<double>(times.size() - 1) / (times.back() - times.front());
    if (std::abs(implied - sampling_rate_hz) > 1e-6 * sampling_rate_hz)
      throw std::runtime_error(path + ": time column implies " + std::to_string(implied) +
                               " Hz, declared " + std::to_string(sampling_rate_hz) + " Hz");
  }
  return rec;
}

inline void save_recording_csv(const Recording& rec, const std::string& path) {
  validate(rec);
  auto out = detail::open_output(path);
  const auto labels =
      rec.channel_labels.empty() ? default_channel_labels(rec.n_channels()) : rec.channel_labels;
  out << "t";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < rec.n_samples(); ++i) {
    out << detail::format_double(static_cast<double>(i) / rec.sampling_rate_hz);
    for (const auto& ch : rec.channels) out << ',' << detail::format_double(ch[i]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Hypnogram CSV: header `time_s,label`. Times must advance by one uniform
// stride (tolerance 1 ns); labels must be 0 or 1.
// ---------------------------------------------------------------------------

inline void save_hypnogram(const Hypnogram& h, const std::string& path) {
  validate(h);
  auto out = detail::open_output(path);
  out << "time_s,label\n";
  for (std::size_t j = 0; j < h.labels.size(); ++j)
    out << detail::format_double(h.time_at(j)) << ',' << int(h.labels[j]) << '\n';
}

inline Hypnogram load_hypnogram(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!detail::read_line(in, line)) throw std::runtime_error(path + ": missing header");
  if (line != "time_s,label")
    throw std::runtime_error(path + ": malformed header (want time_s,label)");

  std::vector<double> times;
  Hypnogram h;
  std::size_t row = 1;
  while (detail::read_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    const std::string ctx = path + ": row " + std::to_string(row);
    if (fields.size() != 2) throw std::runtime_error(ctx + ": want time_s,label");
    times.push_back(detail::parse_double(fields[0], ctx));
    const double label = detail::parse_double(fields[1], ctx);
    if (label != 0.0 && label != 1.0)
      throw std::runtime_error(ctx + ": label outside {0,1}");
    h.labels.push_back(static_cast<std::uint8_t>(label));
  }
  if (times.empty()) {
    h.start_time_s = 0.0;
    h.stride_s = 1.0;
    return h;
  }
  h.start_time_s = times.front();
  h.stride_s = times.size() >= 2
                   ? (times.back() - times.front()) / static_cast<double>(times.size() - 1)
                   : 1.0;
  if (times.size() >= 2 && !(h.stride_s > 0.0))
    throw std::runtime_error(path + ": time column must be increasing");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (std::abs((times[i + 1] - times[i]) - h.stride_s) > kTimeTolS)
      throw std::runtime_error(path + ": non-uniform stride at row " + std::to_string(i + 2));
  return h;
}

// ---------------------------------------------------------------------------
// Feature CSV: header `time_s,mu_1,sigma_1[,mu_2,sigma_2...]` with the
// numeric channel ids, full 17-significant-digit values.
// ---------------------------------------------------------------------------

inline void save_features_csv(const FeatureSeries& fs, const std::string& path) {
  auto out = detail::open_output(path);
  out << "time_s";
  for (int id : fs.channel_ids) out << ",mu_" << id << ",sigma_" << id;
  out << '\n';
  for (std::size_t j = 0; j < fs.length(); ++j) {
    out << detail::format_double17(fs.time_at(j));
    for (std::size_t c = 0; c < fs.n_channels(); ++c)
      out << ',' << detail::format_double17(fs.mu[c][j]) << ','
          << detail::format_double17(fs.sigma[c][j]);
    out << '\n';
  }
}

inline FeatureSeries load_features_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!detail::read_line(in, line)) throw std::runtime_error(path + ": missing header");
  const auto header = detail::split_csv(line);
  if (header.size() < 3 || header[0] != "time_s" || header.size() % 2 == 0)
    throw std::runtime_error(path + ": malformed feature header");

  FeatureSeries fs;
  for (std::size_t i = 1; i < header.size(); i += 2) {
    const std::string mu_col(header[i]), sigma_col(header[i + 1]);
    if (mu_col.rfind("mu_", 0) != 0 || sigma_col.rfind("sigma_", 0) != 0)
      throw std::runtime_error(path + ": malformed feature header near '" + mu_col + "'");
    const int id_mu = std::stoi(mu_col.substr(3));
    const int id_sigma = std::stoi(sigma_col.substr(6));
    if (id_mu != id_sigma)
      throw std::runtime_error(path + ": mu/sigma channel ids disagree in header");
    fs.channel_ids.push_back(id_mu);
  }
  fs.mu.resize(fs.channel_ids.size());
  fs.sigma.resize(fs.channel_ids.size());

  std::vector<double> times;
  std::size_t row = 1;
  while (detail::read_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    const std::string ctx = path + ": row " + std::to_string(row);
    if (fields.size() != header.size()) throw std::runtime_error(ctx + ": field count mismatch");
    times.push_back(detail::parse_double(fields[0], ctx));
    for (std::size_t c = 0; c < fs.channel_ids.size(); ++c) {
      fs.mu[c].push_back(detail::parse_double(fields[1 + 2 * c], ctx));
      fs.sigma[c].push_back(detail::parse_double(fields[2 + 2 * c], ctx));
    }
  }
  if (times.empty()) throw std::runtime_error(path + ": no feature rows");
  fs.start_time_s = times.front();
  fs.stride_s = times.size() >= 2
                    ? (times.back() - times.front()) / static_cast<double>(times.size() - 1)
                    : 1.0;
  fs.window_s = fs.start_time_s;  // first window ends where it is as wide
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (std::abs((times[i + 1] - times[i]) - fs.stride_s) > kTimeTolS)
      throw std::runtime_error(path + ": non-uniform feature stride at row " + std::to_string(i + 2));
  return fs;
}

}  // namespace hypnos
