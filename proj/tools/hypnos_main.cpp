// hypnos command-line front end: feature extraction, wavelet markup, training,
// classification, evaluation and synthetic data generation for BS/WS sleep
// scoring of multichannel ECoG recordings.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hypnos/csv_io.hpp"
#include "hypnos/json_io.hpp"
#include "hypnos/markup.hpp"
#include "hypnos/metrics.hpp"
#include "hypnos/model.hpp"
#include "hypnos/pipeline.hpp"
#include "hypnos/streaming.hpp"
#include "hypnos/synth.hpp"
#include "hypnos/train.hpp"

namespace {

using hypnos::detail::format_double;
using hypnos::detail::format_double17;

struct RecordingInput {
  std::string path;
  std::string format;  // "", "csv", "raw-f32"
  int rate_hz{400};

  hypnos::Recording load() const {
    const auto fmt = format.empty() ? hypnos::guess_recording_format(path)
                                    : hypnos::recording_format_from_string(format);
    return hypnos::load_recording(path, fmt, rate_hz);
  }
};

void add_recording_input(CLI::App* cmd, RecordingInput& in) {
  cmd->add_option("--input,-i", in.path, "input recording")->required();
  cmd->add_option("--format", in.format, "recording format: csv | raw-f32 (default: by extension)")
      ->check(CLI::IsMember({"csv", "raw-f32"}));
  cmd->add_option("--rate", in.rate_hz, "sampling rate in Hz for CSV input (default 400)");
}

std::vector<std::pair<double, double>> parse_bands(const std::string& spec) {
  std::vector<std::pair<double, double>> bands;
  std::istringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("band must be lo:hi, got '" + item + "'");
    bands.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
  }
  if (bands.empty()) throw std::invalid_argument("no bands given");
  return bands;
}

// Convert a --config JSON object into command-line tokens inserted right after
// the subcommand, so explicit flags (parsed later, TakeLast) win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file argument");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;
  if (rest.empty()) throw std::invalid_argument("--config requires a subcommand");
  const nlohmann::json cfg = hypnos::detail::load_json(config_path);
  if (!cfg.is_object()) throw std::invalid_argument(config_path + ": config must be a JSON object");
  std::vector<std::string> out;
  out.push_back(rest.front());  // subcommand
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + key);
    } else if (value.is_string()) {
      out.push_back("--" + key + "=" + value.get<std::string>());
    } else {
      out.push_back("--" + key + "=" + value.dump());
    }
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

int run(std::vector<std::string> args) {
  CLI::App app{"BS/WS sleep-episode detection in multichannel rodent ECoG"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // global seed, threaded into train/synth unless they override it
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "seed for every random draw");

  // --- features ---
  auto* cmd_features = app.add_subcommand("features", "extract windowed mean/deviation features");
  RecordingInput feat_in;
  add_recording_input(cmd_features, feat_in);
  double feat_window = 10.0, feat_stride = 1.0;
  bool feat_true_std = false, feat_raw = false;
  std::string feat_out, feat_cal_out;
  cmd_features->add_option("--window", feat_window, "window length in seconds (default 10)");
  cmd_features->add_option("--stride", feat_stride, "window stride in seconds (default 1)");
  cmd_features->add_flag("--true-std", feat_true_std,
                         "take the square root of the windowed deviation");
  cmd_features->add_flag("--no-renormalize", feat_raw,
                         "skip the second normalization stage");
  cmd_features->add_option("--output,-o", feat_out, "feature CSV path")->required();
  cmd_features->add_option("--calibration-out", feat_cal_out,
                           "write streaming calibration JSON (both stages)");

  // --- markup ---
  auto* cmd_markup = app.add_subcommand("markup", "wavelet-based BS/WS ground-truth markup");
  RecordingInput markup_in;
  add_recording_input(cmd_markup, markup_in);
  std::string markup_bands = "2.5:4.5,5:10,10.5:12.5,15:18";
  std::string markup_fusion = "majority";
  double markup_onset = 75.0, markup_offset = 60.0, markup_cmp = 0.5, markup_stride = 1.0;
  double markup_tr1 = 0.0, markup_tr2 = 0.0;
  bool markup_per_channel = false;
  std::string markup_out, markup_energies;
  cmd_markup->add_option("--bands", markup_bands, "comma-separated lo:hi bands in Hz");
  cmd_markup->add_option("--onset-pct", markup_onset, "onset threshold percentile (default 75)");
  cmd_markup->add_option("--offset-pct", markup_offset, "offset threshold percentile (default 60)");
  cmd_markup->add_option("--tr1", markup_tr1, "explicit onset threshold for every band");
  cmd_markup->add_option("--tr2", markup_tr2, "explicit offset threshold for every band");
  cmd_markup->add_option("--fusion", markup_fusion, "band fusion rule: majority | all | any")
      ->check(CLI::IsMember({"majority", "all", "any"}));
  cmd_markup->add_flag("--per-channel", markup_per_channel,
                       "threshold each channel separately instead of channel-averaged energy");
  cmd_markup->add_option("--comparison-window", markup_cmp, "comparison window in seconds (default 0.5)");
  cmd_markup->add_option("--stride", markup_stride, "output hypnogram stride in seconds (default 1)");
  cmd_markup->add_option("--output,-o", markup_out, "hypnogram CSV path")->required();
  cmd_markup->add_option("--energies-out", markup_energies, "per-band energy CSV for threshold tuning");

  // --- train ---
  auto* cmd_train = app.add_subcommand("train", "train the single-neuron classifier");
  std::string train_features, train_labels, train_channels = "12", train_out;
  std::string train_balance = "truncate-majority";
  hypnos::TrainConfig train_cfg;
  bool train_true_std = false;
  std::optional<std::uint64_t> train_seed;
  cmd_train->add_option("--features", train_features, "feature CSV (from `features`)")->required();
  cmd_train->add_option("--labels", train_labels, "hypnogram CSV with training labels")->required();
  cmd_train->add_option("--channels", train_channels, "channel set: 12 | 13 | 23 | 123");
  cmd_train->add_option("--epochs", train_cfg.epochs, "training epochs (default 500)");
  cmd_train->add_option("--lr", train_cfg.learning_rate, "Adam learning rate (default 1e-3)");
  cmd_train->add_option("--batch", train_cfg.batch_size, "minibatch size (default 32)");
  cmd_train->add_option("--beta1", train_cfg.beta1, "Adam beta1 (default 0.9)");
  cmd_train->add_option("--beta2", train_cfg.beta2, "Adam beta2 (default 0.999)");
  cmd_train->add_option("--epsilon", train_cfg.epsilon, "Adam epsilon (default 1e-8)");
  cmd_train->add_option("--balance", train_balance, "class balance: truncate-majority | none")
      ->check(CLI::IsMember({"truncate-majority", "none"}));
  cmd_train->add_option("--train-seed", train_seed, "seed override for training only");
  cmd_train->add_flag("--true-std", train_true_std, "features were extracted with --true-std");
  cmd_train->add_option("--output,-o", train_out, "model JSON path")->required();

  // --- classify ---
  auto* cmd_classify = app.add_subcommand("classify", "label a recording with a trained model");
  RecordingInput cls_in;
  add_recording_input(cmd_classify, cls_in);
  std::string cls_kind = "recording", cls_model, cls_pretrained, cls_out, cls_probs;
  double cls_window = 10.0, cls_stride = 1.0;
  std::optional<double> cls_threshold;
  cmd_classify->add_option("--input-kind", cls_kind,
                           "treat --input as: recording | features (preprocessed CSV)")
      ->check(CLI::IsMember({"recording", "features"}));
  cmd_classify->add_option("--model", cls_model, "model JSON path");
  cmd_classify->add_option("--pretrained", cls_pretrained,
                           "use published averaged coefficients: 12 | 13 | 23 | 123");
  cmd_classify->add_option("--window", cls_window, "window length in seconds (default 10)");
  cmd_classify->add_option("--stride", cls_stride, "window stride in seconds (default 1)");
  cmd_classify->add_option("--threshold", cls_threshold, "override the model's decision threshold");
  cmd_classify->add_option("--output,-o", cls_out, "hypnogram CSV path")->required();
  cmd_classify->add_option("--probs-out", cls_probs, "per-window probability CSV");

  // --- evaluate ---
  auto* cmd_eval = app.add_subcommand("evaluate", "compare two hypnograms");
  std::string eval_pred, eval_truth, eval_correction = "none", eval_out, eval_disagree;
  bool eval_strict = false;
  cmd_eval->add_option("prediction", eval_pred, "predicted hypnogram CSV")->required();
  cmd_eval->add_option("truth", eval_truth, "reference hypnogram CSV")->required();
  cmd_eval->add_option("--correction", eval_correction, "DOR zero-cell handling: none | haldane-0.5")
      ->check(CLI::IsMember({"none", "haldane-0.5"}));
  cmd_eval->add_flag("--strict-grid", eval_strict,
                     "require identical grids instead of trimming to the overlap");
  cmd_eval->add_option("--output,-o", eval_out, "write metrics JSON here as well as stdout");
  cmd_eval->add_option("--disagreements-out", eval_disagree, "per-window disagreement CSV");

  // --- average ---
  auto* cmd_avg = app.add_subcommand("average", "average the weights of several models");
  std::vector<std::string> avg_inputs;
  std::string avg_out;
  cmd_avg->add_option("models", avg_inputs, "model JSON files")
      ->required()
      ->expected(-1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cmd_avg->add_option("--output,-o", avg_out, "averaged model JSON path")->required();

  // --- synth ---
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic recording with known schedule");
  std::string synth_spec_path, synth_rec_out, synth_hyp_out, synth_format;
  cmd_synth->add_option("--spec", synth_spec_path, "synth spec JSON")->required();
  cmd_synth->add_option("--output-recording", synth_rec_out, "recording output path")->required();
  cmd_synth->add_option("--output-hypnogram", synth_hyp_out, "schedule hypnogram CSV")->required();
  cmd_synth->add_option("--format", synth_format, "recording format: csv | raw-f32 (default: by extension)")
      ->check(CLI::IsMember({"csv", "raw-f32"}));

  // --- stream ---
  auto* cmd_stream = app.add_subcommand(
      "stream", "classify raw-f32 frames from stdin, one output line per label");
  std::string stream_model, stream_cal;
  cmd_stream->add_option("--model", stream_model, "model JSON path")->required();
  cmd_stream->add_option("--calibration", stream_cal, "calibration JSON (from `features`)")
      ->required();

  // let the global --seed appear after the subcommand name
  for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 1;
  }

  if (cmd_features->parsed()) {
    const auto rec = feat_in.load();
    const auto mode = feat_true_std ? hypnos::FeatureMode::TrueStd
                                    : hypnos::FeatureMode::LiteralVariance;
    const auto pre = hypnos::preprocess(rec, feat_window, feat_stride, mode, !feat_raw);
    hypnos::save_features_csv(pre.features, feat_out);
    if (!feat_cal_out.empty())
      hypnos::save_calibration(hypnos::make_calibration(pre, rec.sampling_rate_hz), feat_cal_out);
    std::cout << "features: " << pre.features.length() << " windows x "
              << pre.features.n_channels() << " channels -> " << feat_out << "\n";
    return 0;
  }

  if (cmd_markup->parsed()) {
    const auto rec = markup_in.load();
    hypnos::MarkupOptions opts;
    opts.bands_hz = parse_bands(markup_bands);
    opts.onset_pct = markup_onset;
    opts.offset_pct = markup_offset;
    opts.comparison_window_s = markup_cmp;
    opts.fusion = hypnos::fusion_from_string(markup_fusion);
    opts.channel_mode = markup_per_channel ? hypnos::ChannelMode::PerChannel
                                           : hypnos::ChannelMode::Averaged;
    if (markup_tr1 > 0.0 || markup_tr2 > 0.0)
      opts.explicit_thresholds.assign(opts.bands_hz.size(),
                                      {markup_tr1, markup_tr2, markup_cmp});
    const auto res = hypnos::markup_bs_ws(rec, opts, markup_stride);
    hypnos::save_hypnogram(res.hypnogram, markup_out);
    if (!markup_energies.empty()) {
      auto out = hypnos::detail::open_output(markup_energies);
      out << "time_s";
      for (const auto& [lo, hi] : opts.bands_hz)
        out << ",E_" << format_double(lo) << "_" << format_double(hi);
      out << '\n';
      for (std::size_t b = 0; b < res.block_times_s.size(); ++b) {
        out << format_double(res.block_times_s[b]);
        for (const auto& band : res.band_energies) out << ',' << format_double17(band[b]);
        out << '\n';
      }
    }
    std::cout << "markup: BS fraction " << hypnos::bs_fraction(res.hypnogram) << " -> "
              << markup_out << "\n";
    return 0;
  }

  if (cmd_train->parsed()) {
    const auto fs = [&] {
      auto f = hypnos::load_features_csv(train_features);
      f.mode = train_true_std ? hypnos::FeatureMode::TrueStd
                              : hypnos::FeatureMode::LiteralVariance;
      return f;
    }();
    const auto labels = hypnos::load_hypnogram(train_labels);
    train_cfg.class_balance = train_balance == "none" ? hypnos::ClassBalance::None
                                                      : hypnos::ClassBalance::TruncateMajority;
    if (train_seed)
      train_cfg.seed = *train_seed;
    else if (seed)
      train_cfg.seed = *seed;
    const auto res = hypnos::train(fs, labels, train_cfg,
                                   hypnos::channel_set_from_string(train_channels));
    hypnos::save_model(res.model, train_out);
    std::cout << "training accuracy: " << res.train_accuracy << "\n";
    return 0;
  }

  if (cmd_classify->parsed()) {
    if (cls_model.empty() == cls_pretrained.empty()) {
      std::cerr << "usage error: classify needs exactly one of --model or --pretrained\n";
      return 1;
    }
    hypnos::PerceptronModel model =
        cls_model.empty() ? hypnos::pretrained(hypnos::channel_set_from_string(cls_pretrained))
                          : hypnos::load_model(cls_model);
    if (cls_threshold) model.threshold = *cls_threshold;
    hypnos::ClassifyResult res;
    if (cls_kind == "features") {
      const auto fs = hypnos::load_features_csv(cls_in.path);
      res = hypnos::classify(model, fs);
    } else {
      res = hypnos::classify_recording(cls_in.load(), model, cls_window, cls_stride);
    }
    hypnos::save_hypnogram(res.hypnogram, cls_out);
    if (!cls_probs.empty()) {
      auto out = hypnos::detail::open_output(cls_probs);
      out << "time_s,probability\n";
      for (std::size_t j = 0; j < res.probabilities.size(); ++j)
        out << format_double(res.hypnogram.time_at(j)) << ','
            << format_double17(res.probabilities[j]) << '\n';
    }
    std::cout << "classified " << res.hypnogram.size() << " windows, BS fraction "
              << hypnos::bs_fraction(res.hypnogram) << " -> " << cls_out << "\n";
    return 0;
  }

  if (cmd_eval->parsed()) {
    auto pred = hypnos::load_hypnogram(eval_pred);
    auto truth = hypnos::load_hypnogram(eval_truth);
    if (!eval_strict && !hypnos::same_grid(pred, truth))
      std::tie(pred, truth) = hypnos::overlap_align(pred, truth);
    const auto cm = hypnos::confusion(pred, truth);
    const auto corr = eval_correction == "haldane-0.5" ? hypnos::DorCorrection::Haldane
                                                       : hypnos::DorCorrection::None;
    const auto j = hypnos::metrics_to_json(cm, hypnos::accuracy(cm), hypnos::dor(cm, corr));
    std::cout << j.dump(2) << "\n";
    if (!eval_out.empty()) hypnos::detail::save_json(j, eval_out);
    if (!eval_disagree.empty()) {
      auto out = hypnos::detail::open_output(eval_disagree);
      out << "time_s,prediction,truth\n";
      for (std::size_t i = 0; i < pred.labels.size(); ++i)
        if (pred.labels[i] != truth.labels[i])
          out << format_double(pred.time_at(i)) << ',' << int(pred.labels[i]) << ','
              << int(truth.labels[i]) << '\n';
    }
    return 0;
  }

  if (cmd_avg->parsed()) {
    std::vector<hypnos::PerceptronModel> models;
    for (const auto& path : avg_inputs) models.push_back(hypnos::load_model(path));
    hypnos::save_model(hypnos::average_models(models), avg_out);
    std::cout << "averaged " << models.size() << " models -> " << avg_out << "\n";
    return 0;
  }

  if (cmd_synth->parsed()) {
    auto spec = hypnos::load_synth_spec(synth_spec_path);
    if (seed) {
      // re-derive any random schedule under the overriding seed
      spec.seed = *seed;
      const nlohmann::json j = hypnos::detail::load_json(synth_spec_path);
      if (j.contains("random_schedule")) {
        const auto& rs = j.at("random_schedule");
        spec.schedule = hypnos::random_schedule(spec.duration_s, rs.at("min_seg_s").get<double>(),
                                                rs.at("max_seg_s").get<double>(), spec.seed);
      }
    }
    const auto [rec, truth] = hypnos::generate(spec);
    const auto fmt = synth_format.empty()
                         ? hypnos::guess_recording_format(synth_rec_out)
                         : hypnos::recording_format_from_string(synth_format);
    hypnos::save_recording(rec, synth_rec_out, fmt);
    hypnos::save_hypnogram(truth, synth_hyp_out);
    std::cout << "synth: " << rec.duration_s() << " s x " << rec.n_channels()
              << " channels, BS fraction " << hypnos::bs_fraction(truth) << "\n";
    return 0;
  }

  if (cmd_stream->parsed()) {
    const auto model = hypnos::load_model(stream_model);
    const auto cal = hypnos::load_calibration(stream_cal);
    hypnos::StreamingClassifier sc(model, cal);
    const std::size_t width = cal.channels.size();
    std::vector<float> frame(width);
    std::vector<double> frame_d(width);
    while (std::cin.read(reinterpret_cast<char*>(frame.data()),
                         static_cast<std::streamsize>(width * sizeof(float)))) {
      for (std::size_t c = 0; c < width; ++c) frame_d[c] = static_cast<double>(frame[c]);
      if (const auto out = sc.push(frame_d))
        std::cout << format_double(out->time_s) << ',' << format_double17(out->probability)
                  << ',' << int(out->label) << '\n';
    }
    if (std::cin.gcount() != 0)
      throw std::runtime_error("stream: trailing bytes do not form a whole frame");
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    return run(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
