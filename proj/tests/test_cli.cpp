#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypnos/csv_io.hpp"
#include "hypnos/json_io.hpp"
#include "temp_files.hpp"

using testutil::TempDir;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(HYPNOS_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string synth_spec_json(int seed) {
  return R"({"duration_s": 240, "sampling_rate_hz": 400,
             "random_schedule": {"min_seg_s": 30, "max_seg_s": 60},
             "seed": )" + std::to_string(seed) + "}";
}

}  // namespace

TEST_CASE("synth/features/train/classify/evaluate pipeline runs end to end", "[cli][slow]") {
  TempDir dir;
  const auto spec_a = dir.file("a.json");
  const auto spec_b = dir.file("b.json");
  write_file(spec_a, synth_spec_json(501));
  write_file(spec_b, synth_spec_json(502));

  REQUIRE(run("synth --spec " + spec_a + " --output-recording " + dir.file("a.f32") +
              " --output-hypnogram " + dir.file("a_truth.csv")) == 0);
  REQUIRE(run("synth --spec " + spec_b + " --output-recording " + dir.file("b.f32") +
              " --output-hypnogram " + dir.file("b_truth.csv")) == 0);

  REQUIRE(run("features --input " + dir.file("a.f32") + " --output " + dir.file("a_feat.csv") +
              " --calibration-out " + dir.file("a_cal.json")) == 0);

  REQUIRE(run("train --features " + dir.file("a_feat.csv") + " --labels " +
              dir.file("a_truth.csv") + " --channels 12 --seed 7 --output " +
              dir.file("model.json") + " > " + dir.file("train_out.txt")) == 0);
  {
    std::ifstream in(dir.file("train_out.txt"));
    std::string line;
    std::getline(in, line);
    REQUIRE(line.find("training accuracy") != std::string::npos);
  }

  REQUIRE(run("classify --input " + dir.file("b.f32") + " --model " + dir.file("model.json") +
              " --output " + dir.file("b_pred.csv") + " --probs-out " + dir.file("b_probs.csv")) ==
          0);

  REQUIRE(run("evaluate " + dir.file("b_pred.csv") + " " + dir.file("b_truth.csv") +
              " --output " + dir.file("metrics.json")) == 0);
  std::ifstream metrics_in(dir.file("metrics.json"));
  nlohmann::json metrics;
  metrics_in >> metrics;
  REQUIRE(metrics.at("accuracy").get<double>() >= 0.8);

  SECTION("probability CSV pairs with the hypnogram") {
    const auto pred = hypnos::load_hypnogram(dir.file("b_pred.csv"));
    std::ifstream probs(dir.file("b_probs.csv"));
    std::string header;
    std::getline(probs, header);
    REQUIRE(header == "time_s,probability");
    std::size_t rows = 0;
    for (std::string line; std::getline(probs, line);) ++rows;
    REQUIRE(rows == pred.size());
  }

  SECTION("streaming over the same recording matches offline labels") {
    REQUIRE(run("features --input " + dir.file("b.f32") + " --output " + dir.file("b_feat.csv") +
                " --calibration-out " + dir.file("b_cal.json")) == 0);
    REQUIRE(run("stream --model " + dir.file("model.json") + " --calibration " +
                dir.file("b_cal.json") + " < " + dir.file("b.f32") + " > " +
                dir.file("stream_out.csv")) == 0);

    const auto offline = hypnos::load_hypnogram(dir.file("b_pred.csv"));
    std::ifstream in(dir.file("stream_out.csv"));
    std::vector<int> labels;
    for (std::string line; std::getline(in, line);)
      labels.push_back(line.back() - '0');
    REQUIRE(labels.size() == offline.size());
    for (std::size_t j = 0; j < labels.size(); ++j)
      REQUIRE(labels[j] == int(offline.labels[j]));
  }
}

TEST_CASE("classify with pretrained coefficients accepts a feature CSV", "[cli]") {
  TempDir dir;
  // constant 0.5 features: the published 1&2 row answers 0.48376 < 0.5 -> WS
  std::string csv = "time_s,mu_1,sigma_1,mu_2,sigma_2\n";
  for (int j = 0; j < 30; ++j)
    csv += std::to_string(10 + j) + ",0.5,0.5,0.5,0.5\n";
  write_file(dir.file("features.csv"), csv);

  REQUIRE(run("classify --pretrained 12 --input " + dir.file("features.csv") +
              " --input-kind features --output " + dir.file("pred.csv")) == 0);
  const auto pred = hypnos::load_hypnogram(dir.file("pred.csv"));
  REQUIRE(pred.size() == 30);
  for (auto l : pred.labels) REQUIRE(l == 0);
}

TEST_CASE("evaluate of a hypnogram against itself reports accuracy 1", "[cli]") {
  TempDir dir;
  hypnos::save_hypnogram(hypnos::Hypnogram{0.0, 1.0, {0, 1, 1, 0, 1}}, dir.file("h.csv"));
  REQUIRE(run("evaluate " + dir.file("h.csv") + " " + dir.file("h.csv") + " --output " +
              dir.file("m.json") + " > /dev/null") == 0);
  std::ifstream in(dir.file("m.json"));
  nlohmann::json m;
  in >> m;
  REQUIRE(m.at("accuracy").get<double>() == 1.0);
  REQUIRE(m.at("dor").get<std::string>() == "inf");  // no false cells
  REQUIRE(m.at("tp").get<int>() == 3);
}

TEST_CASE("average combines model files", "[cli]") {
  TempDir dir;
  auto a = hypnos::pretrained({1, 2});
  auto b = a;
  for (auto& w : b.weights) w = -w;
  b.bias = -a.bias;
  hypnos::save_model(a, dir.file("a.json"));
  hypnos::save_model(b, dir.file("b.json"));
  REQUIRE(run("average " + dir.file("a.json") + " " + dir.file("b.json") + " --output " +
              dir.file("avg.json")) == 0);
  const auto avg = hypnos::load_model(dir.file("avg.json"));
  for (double w : avg.weights) REQUIRE(w == 0.0);
  REQUIRE(avg.bias == 0.0);
}

TEST_CASE("config JSON supplies defaults that flags override", "[cli]") {
  TempDir dir;
  hypnos::Recording rec;
  rec.sampling_rate_hz = 10;
  rec.channels.assign(2, {});
  hypnos::Rng rng(3);
  for (int i = 0; i < 400; ++i)
    for (auto& ch : rec.channels) ch.push_back(rng.normal());
  rec.channel_labels = {"ECoG1", "ECoG2"};
  hypnos::save_recording_csv(rec, dir.file("rec.csv"));

  write_file(dir.file("cfg.json"),
             R"({"input": ")" + dir.file("rec.csv") + R"(", "rate": 10, "window": 4.0})");
  REQUIRE(run("features --config " + dir.file("cfg.json") + " --output " + dir.file("f1.csv")) ==
          0);
  const auto f1 = hypnos::load_features_csv(dir.file("f1.csv"));
  REQUIRE(f1.start_time_s == 4.0);  // window from config

  REQUIRE(run("features --config " + dir.file("cfg.json") + " --window 8 --output " +
              dir.file("f2.csv")) == 0);
  const auto f2 = hypnos::load_features_csv(dir.file("f2.csv"));
  REQUIRE(f2.start_time_s == 8.0);  // explicit flag wins
}

TEST_CASE("exit codes distinguish usage and data errors", "[cli]") {
  TempDir dir;
  REQUIRE(run("features > /dev/null 2>&1") == 1);           // missing required flags
  REQUIRE(run("bogus-subcommand > /dev/null 2>&1") == 1);   // unknown subcommand
  REQUIRE(run("features --input " + dir.file("absent.csv") + " --output " + dir.file("f.csv") +
              " 2> /dev/null") == 2);                       // missing data file
  write_file(dir.file("bad.csv"), "time_s,label\n0,7\n");
  REQUIRE(run("evaluate " + dir.file("bad.csv") + " " + dir.file("bad.csv") +
              " 2> /dev/null") == 2);                       // invalid label
  REQUIRE(run("--help > /dev/null") == 0);
  REQUIRE(run("classify --input x --output y 2> /dev/null") == 1);  // neither model source
}
