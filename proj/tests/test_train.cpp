#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hypnos/random.hpp"
#include "hypnos/train.hpp"

using hypnos::PerceptronModel;
using hypnos::TrainConfig;

namespace {

// two well-separated feature clusters, one per class
void make_clusters(hypnos::Rng& rng, std::size_t per_class, double gap,
                   std::vector<std::vector<double>>& X, std::vector<std::uint8_t>& y) {
  X.clear();
  y.clear();
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool positive = i >= per_class;
    const double center = positive ? 0.5 + gap / 2 : 0.5 - gap / 2;
    std::vector<double> row(4);
    for (auto& v : row) v = center + 0.02 * rng.normal();
    X.push_back(row);
    y.push_back(positive ? 1 : 0);
  }
}

double loss_at(const PerceptronModel& m, const std::vector<std::vector<double>>& X,
               const std::vector<std::uint8_t>& y) {
  return hypnos::bce_loss(m, X, y);
}

}  // namespace

TEST_CASE("analytic BCE gradient matches central finite differences", "[train]") {
  hypnos::Rng rng(31);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    PerceptronModel m;
    m.channel_set = {1, 2};
    m.weights.resize(4);
    for (auto& w : m.weights) w = rng.uniform(-2.0, 2.0);
    m.bias = rng.uniform(-2.0, 2.0);
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(0.0, 1.0);
    const std::uint8_t y = rng.below(2) ? 1 : 0;

    std::vector<double> grad_w;
    double grad_b = 0.0;
    hypnos::bce_gradient(m, x, y, grad_w, grad_b);

    const std::vector<std::vector<double>> X{x};
    const std::vector<std::uint8_t> Y{y};
    for (std::size_t i = 0; i < 4; ++i) {
      auto hi = m, lo = m;
      hi.weights[i] += h;
      lo.weights[i] -= h;
      const double numeric = (loss_at(hi, X, Y) - loss_at(lo, X, Y)) / (2 * h);
      REQUIRE(grad_w[i] == Catch::Approx(numeric).epsilon(1e-6).margin(1e-9));
    }
    auto hi = m, lo = m;
    hi.bias += h;
    lo.bias -= h;
    const double numeric = (loss_at(hi, X, Y) - loss_at(lo, X, Y)) / (2 * h);
    REQUIRE(grad_b == Catch::Approx(numeric).epsilon(1e-6).margin(1e-9));
  }
}

TEST_CASE("separable clusters reach 99 percent accuracy within 500 epochs", "[train]") {
  hypnos::Rng rng(17);
  std::vector<std::vector<double>> X;
  std::vector<std::uint8_t> y;
  make_clusters(rng, 500, 0.3, X, y);
  TrainConfig cfg;
  cfg.seed = 3;
  const auto res = hypnos::train_rows(X, y, {1, 2}, cfg);
  REQUIRE(res.train_accuracy >= 0.99);
}

TEST_CASE("full-batch loss is monotonically non-increasing", "[train]") {
  hypnos::Rng rng(18);
  std::vector<std::vector<double>> X;
  std::vector<std::uint8_t> y;
  make_clusters(rng, 100, 0.2, X, y);
  TrainConfig cfg;
  cfg.batch_size = static_cast<int>(X.size());
  cfg.epochs = 300;
  cfg.seed = 4;
  const auto res = hypnos::train_rows(X, y, {1, 2}, cfg);
  for (std::size_t e = 1; e < res.epoch_loss.size(); ++e)
    REQUIRE(res.epoch_loss[e] <= res.epoch_loss[e - 1] + 1e-12);
}

TEST_CASE("indistinguishable classes settle near even odds", "[train]") {
  std::vector<std::vector<double>> X(200, std::vector<double>{0.5, 0.5, 0.5, 0.5});
  std::vector<std::uint8_t> y(200, 0);
  for (std::size_t i = 100; i < 200; ++i) y[i] = 1;
  TrainConfig cfg;
  cfg.seed = 5;
  const auto res = hypnos::train_rows(X, y, {1, 2}, cfg);
  const double p = hypnos::forward(res.model, std::vector<double>{0.5, 0.5, 0.5, 0.5});
  REQUIRE(p == Catch::Approx(0.5).margin(0.02));
  REQUIRE(res.train_accuracy == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("training is deterministic under the seed", "[train]") {
  hypnos::Rng rng(19);
  std::vector<std::vector<double>> X;
  std::vector<std::uint8_t> y;
  make_clusters(rng, 60, 0.25, X, y);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.seed = 42;
  const auto a = hypnos::train_rows(X, y, {1, 2}, cfg);
  const auto b = hypnos::train_rows(X, y, {1, 2}, cfg);
  REQUIRE(a.model.weights == b.model.weights);
  REQUIRE(a.model.bias == b.model.bias);
  cfg.seed = 43;
  const auto c = hypnos::train_rows(X, y, {1, 2}, cfg);
  REQUIRE(a.model.weights != c.model.weights);
}

TEST_CASE("majority truncation balances the classes before training", "[train]") {
  // 30 positive rows are separable from 170 negative ones; with balancing the
  // training set is 60 rows and still reaches full accuracy
  hypnos::Rng rng(20);
  std::vector<std::vector<double>> X;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 200; ++i) {
    const bool positive = i < 30;
    std::vector<double> row(4);
    for (auto& v : row) v = (positive ? 0.8 : 0.2) + 0.02 * rng.normal();
    X.push_back(row);
    y.push_back(positive ? 1 : 0);
  }
  TrainConfig cfg;
  cfg.seed = 6;
  const auto res = hypnos::train_rows(X, y, {1, 2}, cfg);
  REQUIRE(res.train_accuracy >= 0.99);
}

TEST_CASE("training rejects degenerate inputs", "[train]") {
  std::vector<std::vector<double>> X(10, std::vector<double>(4, 0.5));
  std::vector<std::uint8_t> all_ws(10, 0);
  TrainConfig cfg;
  REQUIRE_THROWS_WITH(hypnos::train_rows(X, all_ws, {1, 2}, cfg),
                      Catch::Matchers::ContainsSubstring("both classes"));
  REQUIRE_THROWS(hypnos::train_rows({}, {}, {1, 2}, cfg));
}

TEST_CASE("label alignment requires a covering grid", "[train]") {
  hypnos::FeatureSeries fs;
  fs.window_s = 10.0;
  fs.stride_s = 1.0;
  fs.start_time_s = 10.0;
  fs.channel_ids = {1, 2};
  fs.mu = {{0.1, 0.9, 0.1}, {0.1, 0.9, 0.1}};     // t = 10, 11, 12
  fs.sigma = {{0.1, 0.9, 0.1}, {0.1, 0.9, 0.1}};

  SECTION("labels on a shifted but covering grid work") {
    hypnos::Hypnogram labels{0.0, 1.0, std::vector<std::uint8_t>(13, 0)};
    labels.labels[11] = 1;
    const auto aligned = hypnos::align_labels(fs, labels);
    REQUIRE(aligned.first_window == 0);
    REQUIRE(aligned.labels == std::vector<std::uint8_t>{0, 1, 0});
  }
  SECTION("windows past the labelled range are trimmed") {
    hypnos::Hypnogram labels{10.0, 1.0, {0, 1}};  // no label for t = 12
    const auto aligned = hypnos::align_labels(fs, labels);
    REQUIRE(aligned.first_window == 0);
    REQUIRE(aligned.labels == std::vector<std::uint8_t>{0, 1});
  }
  SECTION("windows before the labelled range are trimmed") {
    hypnos::Hypnogram labels{11.0, 1.0, {1, 0, 1}};  // covers t = 11..13
    const auto aligned = hypnos::align_labels(fs, labels);
    REQUIRE(aligned.first_window == 1);
    REQUIRE(aligned.labels == std::vector<std::uint8_t>{1, 0});
  }
  SECTION("stride mismatch is rejected") {
    hypnos::Hypnogram labels{10.0, 2.0, {0, 1, 0}};
    REQUIRE_THROWS_WITH(hypnos::align_labels(fs, labels),
                        Catch::Matchers::ContainsSubstring("misaligned"));
  }
  SECTION("fractional grid offset is rejected") {
    hypnos::Hypnogram labels{10.5, 1.0, {0, 1, 0}};
    REQUIRE_THROWS_WITH(hypnos::align_labels(fs, labels),
                        Catch::Matchers::ContainsSubstring("fraction of a stride"));
  }
  SECTION("disjoint ranges are rejected") {
    hypnos::Hypnogram labels{100.0, 1.0, {0, 1, 0}};
    REQUIRE_THROWS_WITH(hypnos::align_labels(fs, labels),
                        Catch::Matchers::ContainsSubstring("no overlapping"));
  }
}
