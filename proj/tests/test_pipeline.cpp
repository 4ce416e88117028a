#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "hypnos/csv_io.hpp"
#include "hypnos/metrics.hpp"
#include "hypnos/pipeline.hpp"
#include "hypnos/synth.hpp"
#include "hypnos/train.hpp"
#include "temp_files.hpp"

using testutil::TempDir;

namespace {

std::pair<hypnos::Recording, hypnos::Hypnogram> subject(std::uint64_t seed,
                                                        std::vector<double> gains) {
  hypnos::SynthSpec spec;
  spec.duration_s = 300.0;
  spec.schedule = hypnos::random_schedule(spec.duration_s, 30.0, 60.0, seed);
  spec.seed = seed;
  spec.channel_gains = std::move(gains);
  return hypnos::generate(spec);
}

}  // namespace

TEST_CASE("features written to CSV train to the same model as in-process features",
          "[pipeline]") {
  TempDir dir;
  const auto [rec, truth] = subject(21, {1.0, 1.0, 1.0});
  const auto pre = hypnos::preprocess(rec);

  hypnos::TrainConfig cfg;
  cfg.epochs = 60;
  cfg.seed = 9;
  const auto direct = hypnos::train(pre.features, truth, cfg, {1, 2});

  const auto path = dir.file("features.csv");
  hypnos::save_features_csv(pre.features, path);
  const auto reloaded = hypnos::load_features_csv(path);
  const auto via_csv = hypnos::train(reloaded, truth, cfg, {1, 2});

  REQUIRE(via_csv.model.weights == direct.model.weights);  // bit-exact round trip
  REQUIRE(via_csv.model.bias == direct.model.bias);
  REQUIRE(via_csv.train_accuracy == direct.train_accuracy);
}

TEST_CASE("train then classify transfers across synthetic subjects", "[pipeline][slow]") {
  const auto [rec_a, truth_a] = subject(31, {0.5, 0.5, 0.5});
  const auto [rec_b, truth_b] = subject(32, {2.0, 2.0, 2.0});

  hypnos::TrainConfig cfg;
  cfg.seed = 1;
  const auto trained = hypnos::train(hypnos::preprocess(rec_a).features, truth_a, cfg, {1, 2});
  REQUIRE(trained.train_accuracy >= 0.85);

  const auto res = hypnos::classify_recording(rec_b, trained.model);
  const auto [pred, truth] = hypnos::overlap_align(res.hypnogram, truth_b);
  const auto cm = hypnos::confusion(pred, truth);
  REQUIRE(hypnos::accuracy(cm) >= 0.8);
  REQUIRE(hypnos::dor(cm) >= 10.0);
}

TEST_CASE("classify_recording propagates degenerate-signal errors", "[pipeline]") {
  hypnos::Recording rec;
  rec.sampling_rate_hz = 10;
  rec.channels.assign(2, std::vector<double>(200, 1.0));  // constant channels
  REQUIRE_THROWS_WITH(hypnos::classify_recording(rec, hypnos::pretrained({1, 2}), 2.0, 1.0),
                      Catch::Matchers::ContainsSubstring("zero dynamic range"));
}

TEST_CASE("calibration lines up with the preprocessing constants", "[pipeline]") {
  const auto [rec, truth] = subject(41, {1.0, 1.0, 1.0});
  const auto pre = hypnos::preprocess(rec);
  const auto cal = hypnos::make_calibration(pre, rec.sampling_rate_hz);
  REQUIRE(cal.channels.size() == 3);
  for (std::size_t c = 0; c < 3; ++c) {
    REQUIRE(cal.channels[c].channel_id == static_cast<int>(c) + 1);
    REQUIRE(cal.channels[c].signal.offset == pre.signal_norm[c].offset);
    REQUIRE(cal.channels[c].mu.scale == pre.features.renorm_mu[c].scale);
    REQUIRE(cal.channels[c].sigma.scale == pre.features.renorm_sigma[c].scale);
  }
  REQUIRE_THROWS(hypnos::make_calibration(
      {hypnos::preprocess(rec, 10.0, 1.0, hypnos::FeatureMode::LiteralVariance, false)},
      rec.sampling_rate_hz));
}

TEST_CASE("overlap alignment trims compatible grids", "[pipeline]") {
  const hypnos::Hypnogram a{10.0, 1.0, {0, 1, 0, 1, 0}};   // t = 10..14
  const hypnos::Hypnogram b{8.0, 1.0, {1, 1, 0, 1, 0, 1, 0, 1}};  // t = 8..15
  const auto [ta, tb] = hypnos::overlap_align(a, b);
  REQUIRE(ta.start_time_s == 10.0);
  REQUIRE(tb.start_time_s == 10.0);
  REQUIRE(ta.labels == a.labels);
  REQUIRE(tb.labels == std::vector<std::uint8_t>{0, 1, 0, 1, 0});

  REQUIRE_THROWS(hypnos::overlap_align(a, hypnos::Hypnogram{8.0, 2.0, {0, 1}}));
  REQUIRE_THROWS(hypnos::overlap_align(a, hypnos::Hypnogram{8.5, 1.0, {0, 1}}));
  REQUIRE_THROWS(hypnos::overlap_align(a, hypnos::Hypnogram{100.0, 1.0, {0, 1}}));
}
