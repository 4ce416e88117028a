#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hypnos/normalize.hpp"
#include "hypnos/random.hpp"

using hypnos::normalize;

TEST_CASE("normalize maps [-1,1] to [0,1]", "[normalize]") {
  const std::vector<double> x{-1.0, 1.0};
  const auto n = normalize(x);
  REQUIRE(n.samples == std::vector<double>{0.0, 1.0});
  REQUIRE(n.params.offset == -1.0);
  REQUIRE(n.params.scale == 2.0);
}

TEST_CASE("normalize of 0..3 scales by twice the shifted mean", "[normalize]") {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const auto n = normalize(x);
  REQUIRE(n.params.scale == 3.0);
  REQUIRE(n.samples[0] == 0.0);
  REQUIRE(n.samples[1] == Catch::Approx(1.0 / 3.0).margin(1e-15));
  REQUIRE(n.samples[2] == Catch::Approx(2.0 / 3.0).margin(1e-15));
  REQUIRE(n.samples[3] == 1.0);
}

TEST_CASE("normalize rejects degenerate input", "[normalize]") {
  REQUIRE_THROWS_WITH(normalize(std::vector<double>{5.0, 5.0, 5.0}),
                      Catch::Matchers::ContainsSubstring("zero dynamic range"));
  REQUIRE_THROWS_WITH(normalize(std::vector<double>{}),
                      Catch::Matchers::ContainsSubstring("empty"));
  REQUIRE_THROWS(normalize(std::vector<double>{1.0}));
}

TEST_CASE("normalized output has min 0 and mean 1/2", "[normalize]") {
  hypnos::Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(50 + static_cast<std::size_t>(rng.below(200)));
    for (auto& v : x) v = rng.uniform(-300.0, 300.0);
    const auto n = normalize(x);
    double mn = n.samples[0], sum = 0.0;
    for (double v : n.samples) {
      mn = std::min(mn, v);
      sum += v;
    }
    REQUIRE(mn == 0.0);
    REQUIRE(std::abs(sum / static_cast<double>(n.samples.size()) - 0.5) <= 1e-9);
  }
}

TEST_CASE("normalize is invariant to gain and offset", "[normalize]") {
  hypnos::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(100);
    for (auto& v : x) v = rng.normal();
    const double a = std::exp(rng.uniform(-3.0, 3.0));
    const double c = rng.uniform(-50.0, 50.0);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + c;
    const auto nx = normalize(x);
    const auto ny = normalize(y);
    for (std::size_t i = 0; i < x.size(); ++i)
      REQUIRE(ny.samples[i] == Catch::Approx(nx.samples[i]).margin(1e-12));
    REQUIRE(ny.params.scale == Catch::Approx(a * nx.params.scale).epsilon(1e-12));
  }
}
