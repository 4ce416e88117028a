#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypnos {

// Multichannel sampled ECoG signal in millivolts. All channels share one
// length; samples are stored as doubles regardless of the on-disk format so
// that long window sums keep full precision.
struct Recording {
  std::vector<std::vector<double>> channels;  // channels[ch][sample], mV
  int sampling_rate_hz{400};
  std::vector<std::string> channel_labels;    // defaults "ECoG1".."ECoG3"
  std::string subject_id;

  std::size_t n_channels() const { return channels.size(); }
  std::size_t n_samples() const { return channels.empty() ? 0 : channels[0].size(); }
  double duration_s() const {
    return static_cast<double>(n_samples()) / sampling_rate_hz;
  }
};

inline std::vector<std::string> default_channel_labels(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back("ECoG" + std::to_string(i + 1));
  return labels;
}

// Numeric channel id used to address channels in feature series and models.
// Labels of the form "<prefix><k>" map to k; anything else falls back to the
// 1-based position.
inline int channel_id_from_label(const std::string& label, std::size_t position) {
  std::size_t end = label.size();
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(label[begin - 1]))) --begin;
  if (begin < end && end - begin <= 9) {
    int id = std::stoi(label.substr(begin));
    if (id > 0) return id;
  }
  return static_cast<int>(position) + 1;
}

inline std::vector<int> channel_ids(const Recording& rec) {
  std::vector<int> ids;
  ids.reserve(rec.n_channels());
  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    std::string label = c < rec.channel_labels.size() ? rec.channel_labels[c] : "";
    ids.push_back(channel_id_from_label(label, c));
  }
  return ids;
}

// Throws unless all Recording invariants hold: equal channel lengths >= 1,
// positive sampling rate, every sample finite.
inline void validate(const Recording& rec) {
  if (rec.sampling_rate_hz <= 0)
    throw std::invalid_argument("recording: sampling_rate_hz must be positive");
  if (rec.channels.empty())
    throw std::invalid_argument("recording: no channels");
  const std::size_t len = rec.channels[0].size();
  if (len == 0)
    throw std::invalid_argument("recording: empty channels");
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    if (rec.channels[c].size() != len)
      throw std::invalid_argument("recording: ragged channel lengths");
    for (double v : rec.channels[c])
      if (!std::isfinite(v))
        throw std::invalid_argument("recording: non-finite sample in channel " +
                                    std::to_string(c + 1));
  }
}

}  // namespace hypnos
