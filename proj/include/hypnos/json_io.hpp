#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypnos/csv_io.hpp"
#include "hypnos/metrics.hpp"
#include "hypnos/model.hpp"
#include "hypnos/recording.hpp"
#include "hypnos/streaming.hpp"
#include "hypnos/synth.hpp"

namespace hypnos {

static_assert(std::endian::native == std::endian::little,
              "raw-f32 io assumes a little-endian host");

namespace detail {

inline nlohmann::json load_json(const std::string& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  return j;
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace detail

// ---------------------------------------------------------------------------
// raw-f32 recording: little-endian float32, channel-interleaved frames
// (s0c0 s0c1 ... s1c0 ...), with a `<name>.meta.json` sidecar declaring the
// channel count and sampling rate.
// ---------------------------------------------------------------------------

inline std::string sidecar_path(const std::string& raw_path) {
  const std::string ext = ".f32";
  if (raw_path.size() > ext.size() &&
      raw_path.compare(raw_path.size() - ext.size(), ext.size(), ext) == 0)
    return raw_path.substr(0, raw_path.size() - ext.size()) + ".meta.json";
  return raw_path + ".meta.json";
}

inline Recording load_recording_raw(const std::string& path) {
  const std::string meta_path = sidecar_path(path);
  std::ifstream probe(meta_path);
  if (!probe) throw std::runtime_error(path + ": missing sidecar " + meta_path);
  probe.close();
  const nlohmann::json meta = detail::load_json(meta_path);
  if (!meta.contains("channels") || !meta.contains("sampling_rate_hz"))
    throw std::runtime_error(meta_path + ": sidecar needs channels and sampling_rate_hz");
  const int n_channels = meta.at("channels").get<int>();
  const int rate = meta.at("sampling_rate_hz").get<int>();
  if (n_channels <= 0 || rate <= 0)
    throw std::runtime_error(meta_path + ": channels and sampling_rate_hz must be positive");

  auto in = detail::open_input(path);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  if (bytes % (sizeof(float) * n_channels) != 0)
    throw std::runtime_error(path + ": size is not a whole number of " +
                             std::to_string(n_channels) + "-channel frames");
  const std::size_t n_frames = bytes / (sizeof(float) * n_channels);
  std::vector<float> raw(n_frames * n_channels);
  if (n_frames > 0) in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (n_frames > 0 && !in) throw std::runtime_error(path + ": short read");

  Recording rec;
  rec.sampling_rate_hz = rate;
  rec.subject_id = meta.value("subject_id", std::string{});
  if (meta.contains("labels"))
    rec.channel_labels = meta.at("labels").get<std::vector<std::string>>();
  else
    rec.channel_labels = default_channel_labels(n_channels);
  if (rec.channel_labels.size() != static_cast<std::size_t>(n_channels))
    throw std::runtime_error(meta_path + ": labels count does not match channels");
  rec.channels.assign(n_channels, std::vector<double>(n_frames));
  for (std::size_t i = 0; i < n_frames; ++i)
    for (int c = 0; c < n_channels; ++c)
      rec.channels[c][i] = static_cast<double>(raw[i * n_channels + c]);
  validate(rec);
  return rec;
}

inline void save_recording_raw(const Recording& rec, const std::string& path) {
  validate(rec);
  std::vector<float> raw(rec.n_samples() * rec.n_channels());
  for (std::size_t i = 0; i < rec.n_samples(); ++i)
    for (std::size_t c = 0; c < rec.n_channels(); ++c)
      raw[i * rec.n_channels() + c] = static_cast<float>(rec.channels[c][i]);
  auto out = detail::open_output(path);
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
  nlohmann::json meta{
      {"channels", rec.n_channels()},
      {"sampling_rate_hz", rec.sampling_rate_hz},
      {"labels", rec.channel_labels.empty() ? default_channel_labels(rec.n_channels())
                                            : rec.channel_labels},
      {"subject_id", rec.subject_id}};
  detail::save_json(meta, sidecar_path(path));
}

enum class RecordingFormat { Csv, RawF32 };

inline RecordingFormat recording_format_from_string(const std::string& s) {
  if (s == "csv") return RecordingFormat::Csv;
  if (s == "raw-f32") return RecordingFormat::RawF32;
  throw std::invalid_argument("unknown recording format: " + s);
}

// Infers raw-f32 from a .f32 extension, CSV otherwise.
inline RecordingFormat guess_recording_format(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".f32") == 0
             ? RecordingFormat::RawF32
             : RecordingFormat::Csv;
}

inline Recording load_recording(const std::string& path, RecordingFormat format,
                                int sampling_rate_hz = 400) {
  return format == RecordingFormat::Csv ? load_recording_csv(path, sampling_rate_hz)
                                        : load_recording_raw(path);
}

inline void save_recording(const Recording& rec, const std::string& path,
                           RecordingFormat format) {
  if (format == RecordingFormat::Csv)
    save_recording_csv(rec, path);
  else
    save_recording_raw(rec, path);
}

// ---------------------------------------------------------------------------
// Model JSON
// ---------------------------------------------------------------------------

inline nlohmann::json model_to_json(const PerceptronModel& m) {
  return {{"channel_set", m.channel_set},
          {"weights", m.weights},
          {"bias", m.bias},
          {"threshold", m.threshold},
          {"feature_mode", to_string(m.feature_mode)},
          {"normalization", {{"scheme", "min-half-mean"}, {"stages", 2}}}};
}

inline PerceptronModel model_from_json(const nlohmann::json& j) {
  PerceptronModel m;
  m.channel_set = j.at("channel_set").get<std::vector<int>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.threshold = j.value("threshold", 0.5);
  m.feature_mode = feature_mode_from_string(j.value("feature_mode", std::string("literal-eq3")));
  validate(m);
  return m;
}

inline void save_model(const PerceptronModel& m, const std::string& path) {
  validate(m);
  detail::save_json(model_to_json(m), path);
}

inline PerceptronModel load_model(const std::string& path) {
  try {
    return model_from_json(detail::load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": bad model file: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Streaming calibration JSON
// ---------------------------------------------------------------------------

inline nlohmann::json calibration_to_json(const Calibration& cal) {
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& c : cal.channels)
    channels.push_back({{"id", c.channel_id},
                        {"signal", {{"offset", c.signal.offset}, {"scale", c.signal.scale}}},
                        {"mu", {{"offset", c.mu.offset}, {"scale", c.mu.scale}}},
                        {"sigma", {{"offset", c.sigma.offset}, {"scale", c.sigma.scale}}}});
  return {{"sampling_rate_hz", cal.sampling_rate_hz},
          {"window_s", cal.window_s},
          {"stride_s", cal.stride_s},
          {"channels", channels}};
}

inline Calibration calibration_from_json(const nlohmann::json& j) {
  Calibration cal;
  cal.sampling_rate_hz = j.at("sampling_rate_hz").get<int>();
  cal.window_s = j.at("window_s").get<double>();
  cal.stride_s = j.at("stride_s").get<double>();
  for (const auto& c : j.at("channels")) {
    ChannelCalibration cc;
    cc.channel_id = c.at("id").get<int>();
    cc.signal = {c.at("signal").at("offset").get<double>(), c.at("signal").at("scale").get<double>()};
    cc.mu = {c.at("mu").at("offset").get<double>(), c.at("mu").at("scale").get<double>()};
    cc.sigma = {c.at("sigma").at("offset").get<double>(), c.at("sigma").at("scale").get<double>()};
    cal.channels.push_back(cc);
  }
  return cal;
}

inline void save_calibration(const Calibration& cal, const std::string& path) {
  detail::save_json(calibration_to_json(cal), path);
}

inline Calibration load_calibration(const std::string& path) {
  try {
    return calibration_from_json(detail::load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": bad calibration file: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Metrics JSON: non-finite DOR values are encoded as the strings "inf" /
// "undefined" since JSON has no infinity literal.
// ---------------------------------------------------------------------------

inline nlohmann::json metrics_to_json(const ConfusionMatrix& cm, double acc, double dor_value) {
  nlohmann::json j{{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"accuracy", acc}};
  if (std::isnan(dor_value))
    j["dor"] = "undefined";
  else if (std::isinf(dor_value))
    j["dor"] = "inf";
  else
    j["dor"] = dor_value;
  return j;
}

// ---------------------------------------------------------------------------
// Synthetic-signal spec JSON. Either an explicit "schedule" of [state,
// seconds] pairs or a "random_schedule" {min_seg_s, max_seg_s} drawn from the
// seed.
// ---------------------------------------------------------------------------

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec spec;
  spec.duration_s = j.at("duration_s").get<double>();
  spec.sampling_rate_hz = j.value("sampling_rate_hz", 400);
  spec.ws_amplitude_mv = j.value("ws_amplitude_mv", spec.ws_amplitude_mv);
  spec.bs_amplitude_mv = j.value("bs_amplitude_mv", spec.bs_amplitude_mv);
  spec.bs_delta_weight = j.value("bs_delta_weight", spec.bs_delta_weight);
  spec.spindle_rate_per_min = j.value("spindle_rate_per_min", spec.spindle_rate_per_min);
  spec.noise_floor_mv = j.value("noise_floor_mv", spec.noise_floor_mv);
  spec.seed = j.value("seed", 0ULL);
  if (j.contains("channel_gains"))
    spec.channel_gains = j.at("channel_gains").get<std::vector<double>>();
  if (j.contains("schedule")) {
    spec.schedule.clear();
    for (const auto& seg : j.at("schedule"))
      spec.schedule.push_back({seg.at(0).get<std::uint8_t>(), seg.at(1).get<double>()});
  } else if (j.contains("random_schedule")) {
    const auto& rs = j.at("random_schedule");
    spec.schedule = random_schedule(spec.duration_s, rs.at("min_seg_s").get<double>(),
                                    rs.at("max_seg_s").get<double>(), spec.seed);
  } else {
    throw std::runtime_error("synth spec needs schedule or random_schedule");
  }
  validate(spec);
  return spec;
}

inline SynthSpec load_synth_spec(const std::string& path) {
  try {
    return synth_spec_from_json(detail::load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": bad synth spec: " + e.what());
  }
}

}  // namespace hypnos
