#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "hypnos/model.hpp"
#include "hypnos/pipeline.hpp"
#include "hypnos/streaming.hpp"
#include "hypnos/synth.hpp"

using hypnos::StreamingClassifier;

namespace {

hypnos::Recording test_recording(double duration = 60.0, std::uint64_t seed = 12) {
  hypnos::SynthSpec spec;
  spec.duration_s = duration;
  spec.schedule = hypnos::random_schedule(duration, 15.0, 25.0, seed);
  spec.seed = seed;
  return hypnos::generate(spec).first;
}

}  // namespace

TEST_CASE("no output until the window fills, then one per stride", "[streaming]") {
  const auto rec = test_recording();
  const auto pre = hypnos::preprocess(rec);
  const auto cal = hypnos::make_calibration(pre, rec.sampling_rate_hz);
  StreamingClassifier sc(hypnos::pretrained({1, 2}), cal);

  const std::size_t window = 10 * 400;
  std::vector<double> frame(rec.n_channels());
  std::size_t emitted = 0;
  for (std::size_t i = 0; i < rec.n_samples(); ++i) {
    for (std::size_t c = 0; c < rec.n_channels(); ++c) frame[c] = rec.channels[c][i];
    const auto out = sc.push(frame);
    if (i + 1 < window) {
      REQUIRE_FALSE(out.has_value());
    } else if ((i + 1 - window) % 400 == 0) {
      REQUIRE(out.has_value());
      ++emitted;
      if (emitted == 1) REQUIRE(out->time_s == 10.0);
    } else {
      REQUIRE_FALSE(out.has_value());
    }
  }
  REQUIRE(emitted == 51);
}

TEST_CASE("replay with offline calibration reproduces offline classification", "[streaming]") {
  const auto rec = test_recording();
  const auto model = hypnos::pretrained({1, 2, 3});
  const auto pre = hypnos::preprocess(rec);
  const auto offline = hypnos::classify(model, pre.features);
  const auto cal = hypnos::make_calibration(pre, rec.sampling_rate_hz);

  StreamingClassifier sc(model, cal);
  std::vector<double> frame(rec.n_channels());
  std::vector<hypnos::StreamOutput> emitted;
  for (std::size_t i = 0; i < rec.n_samples(); ++i) {
    for (std::size_t c = 0; c < rec.n_channels(); ++c) frame[c] = rec.channels[c][i];
    if (const auto out = sc.push(frame)) emitted.push_back(*out);
  }

  REQUIRE(emitted.size() == offline.hypnogram.size());
  for (std::size_t j = 0; j < emitted.size(); ++j) {
    REQUIRE(emitted[j].label == offline.hypnogram.labels[j]);
    REQUIRE(emitted[j].probability == offline.probabilities[j]);  // bitwise
    REQUIRE(emitted[j].time_s == offline.hypnogram.time_at(j));
  }
}

TEST_CASE("constant frames give zero deviation and a fixed probability", "[streaming]") {
  hypnos::Calibration cal;
  cal.sampling_rate_hz = 10;
  cal.window_s = 1.0;
  cal.stride_s = 1.0;
  for (int id : {1, 2})
    cal.channels.push_back({id, {0.0, 2.0}, {0.0, 1.0}, {0.0, 1.0}});

  StreamingClassifier sc(hypnos::pretrained({1, 2}), cal);
  const std::vector<double> frame{1.0, 1.0};
  std::vector<double> probs;
  for (int i = 0; i < 50; ++i)
    if (const auto out = sc.push(frame)) probs.push_back(out->probability);
  REQUIRE(probs.size() == 5);
  for (double p : probs) REQUIRE(p == probs.front());
  // mu = (1 - 0)/2 = 0.5 per channel, sigma = 0
  const double expected =
      hypnos::forward(hypnos::pretrained({1, 2}), std::vector<double>{0.5, 0.0, 0.5, 0.0});
  REQUIRE(probs.front() == expected);
}

TEST_CASE("streaming guards its preconditions", "[streaming]") {
  StreamingClassifier sc(hypnos::pretrained({1, 2}));
  REQUIRE_FALSE(sc.calibrated());
  REQUIRE_THROWS_WITH(sc.push(std::vector<double>{0.0, 0.0}),
                      Catch::Matchers::ContainsSubstring("before calibration"));

  hypnos::Calibration cal;
  cal.channels.push_back({1, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}});
  // calibration lacks channel 2
  REQUIRE_THROWS_WITH(sc.set_calibration(cal),
                      Catch::Matchers::ContainsSubstring("lacks channel 2"));

  cal.channels.push_back({2, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}});
  sc.set_calibration(cal);
  REQUIRE(sc.calibrated());
  REQUIRE_THROWS_WITH(sc.push(std::vector<double>{0.0}),
                      Catch::Matchers::ContainsSubstring("one sample per channel"));
}
