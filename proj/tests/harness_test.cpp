// Copyright 2026 The pmids Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

namespace pmids {
namespace {

Json bandit_config() {
  return Json::parse(R"({
    "game": {"preset": "bandit", "actions": [[0.5, 0], [0, 0.5]], "noise": {"sigma": 0.3}},
    "theta": [0.6, 0.4],
    "policy": "ids_full",
    "horizon": 200,
    "reps": 3,
    "seed": 7
  })");
}

std::vector<double> series(Index n, double exponent) {
  std::vector<double> s;
  for (Index t = 1; t <= n; ++t) s.push_back(std::pow(static_cast<double>(t), exponent));
  return s;
}

std::string csv_of(const std::vector<Trajectory>& trs) {
  std::ostringstream os;
  write_csv(os, trs);
  return os.str();
}

TEST(Seeding, EpisodeSeedComposition) {
  EXPECT_EQ(episode_seed(3, 5), splitmix64(splitmix64(3) ^ 5));
  EXPECT_NE(episode_seed(3, 5), episode_seed(3, 6));
  // Reference value of the splitmix64 finalizer for input 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Fit, SyntheticSeries) {
  EXPECT_NEAR(fit_regret_exponent(series(1000, 0.5)), 0.5, 1e-6);
  EXPECT_NEAR(fit_regret_exponent(series(1000, 1.0)), 1.0, 1e-6);
  EXPECT_NEAR(fit_regret_exponent(series(1000, 2.0 / 3.0)), 0.6667, 1e-4);
  EXPECT_NEAR(fit_horizon_exponent({500, 1000, 2000, 4000}, {std::sqrt(500.0), std::sqrt(1000.0),
                                                              std::sqrt(2000.0), std::sqrt(4000.0)}),
              0.5, 1e-9);
}

TEST(Fit, RejectsNonPositiveWindow) {
  std::vector<double> s = series(100, 0.5);
  s[80] = 0.0;
  EXPECT_THROW(fit_regret_exponent(s), InvalidArgument);
  EXPECT_THROW(fit_regret_exponent(s, 10, 10), InvalidArgument);
  EXPECT_THROW(fit_horizon_exponent({10}, {1.0}), InvalidArgument);
}

TEST(Config, ParsesAndValidates) {
  const ExperimentConfig c = parse_config(bandit_config());
  EXPECT_EQ(c.mode, ExperimentConfig::Mode::linear);
  EXPECT_EQ(c.horizon, 200u);
  EXPECT_EQ(c.reps, 3u);
  EXPECT_EQ(c.base_seed, 7u);
  EXPECT_DOUBLE_EQ(c.effective_delta(), 1.0 / 200.0);
  EXPECT_EQ(c.theta.kind, ThetaSpec::Kind::explicit_list);
  EXPECT_DOUBLE_EQ(c.game.noise.sigma, 0.3);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  Json j = bandit_config();
  j["horizn"] = 10;
  EXPECT_THROW(parse_config(j), InvalidArgument);
  j = bandit_config();
  j["game"]["colour"] = "red";
  EXPECT_THROW(parse_config(j), InvalidArgument);
  j = bandit_config();
  j["horizon"] = 0;
  EXPECT_THROW(parse_config(j), InvalidArgument);
  j = bandit_config();
  j["delta"] = 1.5;
  EXPECT_THROW(parse_config(j), InvalidArgument);
  j = bandit_config();
  j["policy"] = "softmax";
  EXPECT_THROW(parse_config(j), InvalidArgument);
  j = bandit_config();
  j["nu"] = {1.0};
  EXPECT_THROW(parse_config(j), InvalidArgument);
}

TEST(Config, LaserDefaultsToTruth) {
  const ExperimentConfig c = parse_config(Json::parse(R"({"game": {"preset": "laser"}})"));
  EXPECT_EQ(c.theta.kind, ThetaSpec::Kind::laser_truth);
}

TEST(Config, KernelGrid) {
  const ExperimentConfig c = parse_config(Json::parse(R"({
    "kernel": {"kind": "rbf", "lengthscale": 0.5, "feedback": "gradient",
               "grid": {"dim": 2, "lo": 0, "hi": 1, "points": 3}},
    "policy": "ucb", "horizon": 5
  })"));
  EXPECT_EQ(c.mode, ExperimentConfig::Mode::kernel);
  ASSERT_EQ(c.kernel.ground.size(), 9u);
  EXPECT_DOUBLE_EQ(c.kernel.ground[5](0), 0.5);
  EXPECT_DOUBLE_EQ(c.kernel.ground[5](1), 1.0);
  EXPECT_EQ(c.kernel.feedback, KernelFeedback::gradient);
}

TEST(Config, PrepareChecksCombinations) {
  Json j = Json::parse(R"({
    "kernel": {"ground": [[0], [1]]}, "policy": "ids_directed", "horizon": 5
  })");
  EXPECT_THROW(prepare(parse_config(j)), InvalidArgument);
  j = bandit_config();
  j["theta"] = {0.9, 0.9};
  EXPECT_THROW(prepare(parse_config(j)), InvalidArgument);
}

TEST(Episode, SingletonHasZeroRegret) {
  const Json j = Json::parse(R"({
    "game": {"preset": "bandit", "actions": [[0.5, 0.1]]}, "horizon": 1, "seed": 1
  })");
  const Trajectory tr = run_episode(parse_config(j), 0);
  ASSERT_EQ(tr.rounds.size(), 1u);
  EXPECT_EQ(tr.final_regret(), 0.0);
}

TEST(Episode, NoiselessGreedyStopsAccumulatingRegret) {
  const Json j = Json::parse(R"({
    "game": {"preset": "bandit", "actions": [[0.5, 0], [0, 0.5]], "noise": {"sigma": 0}},
    "theta": [-0.5, 0.3], "policy": "greedy", "horizon": 50, "seed": 2
  })");
  const Trajectory tr = run_episode(parse_config(j), 0);
  EXPECT_GT(tr.rounds.front().inst_regret, 0.0);
  for (Index t = 1; t < tr.rounds.size(); ++t) {
    EXPECT_EQ(tr.rounds[t].inst_regret, 0.0);
    EXPECT_EQ(tr.rounds[t].cum_regret, tr.rounds.front().cum_regret);
  }
}

TEST(Episode, Deterministic) {
  const ExperimentConfig c = parse_config(bandit_config());
  const Trajectory a = run_episode(c, 1), b = run_episode(c, 1);
  EXPECT_EQ(csv_of({a}), csv_of({b}));
  EXPECT_NE(csv_of({a}), csv_of({run_episode(c, 2)}));
}

TEST(Episode, RecordsAreConsistent) {
  for (const char* policy : {"ids_full", "ids_directed", "ucb", "uniform"}) {
    Json j = bandit_config();
    j["policy"] = policy;
    const Trajectory tr = run_episode(parse_config(j), 0);
    double cum = 0.0;
    for (const auto& r : tr.rounds) {
      EXPECT_GE(r.inst_regret, -1e-15);
      cum += r.inst_regret;
      EXPECT_NEAR(r.cum_regret, cum, 1e-9);
      EXPECT_GE(r.info_gain, 0.0);
    }
  }
}

TEST(Experiment, CsvShapeAndPrefixSums) {
  const ExperimentConfig c = parse_config(bandit_config());
  const ExperimentResult res = run_experiment(c);
  std::istringstream in(csv_of(res.trajectories));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCsvHeader);
  Index rows = 0;
  std::vector<double> cum(c.reps, 0.0);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    ASSERT_EQ(f.size(), 7u);
    const auto rep = std::stoul(f[0]);
    cum[rep] += std::stod(f[3]);
    EXPECT_NEAR(std::stod(f[4]), cum[rep], 1e-9);
    ++rows;
  }
  EXPECT_EQ(rows, c.horizon * c.reps);
}

TEST(Experiment, ParallelMatchesSerial) {
  ExperimentConfig c = parse_config(bandit_config());
  c.reps = 5;
  c.threads = 1;
  const std::string serial = csv_of(run_experiment(c).trajectories);
  c.threads = 4;
  EXPECT_EQ(csv_of(run_experiment(c).trajectories), serial);
}

TEST(Experiment, SummaryCheckpoints) {
  const ExperimentConfig c = parse_config(bandit_config());
  const ExperimentResult res = run_experiment(c);
  ASSERT_EQ(res.summary.checkpoints.size(), 3u);
  EXPECT_EQ(res.summary.checkpoints[0].t, 50u);
  EXPECT_EQ(res.summary.checkpoints[2].t, 200u);
  double mean = 0.0;
  for (const auto& tr : res.trajectories) mean += tr.final_regret() / 3.0;
  EXPECT_NEAR(res.summary.checkpoints[2].mean, mean, 1e-12);
  // Reversing the repetition order leaves the checkpoint unchanged.
  std::vector<Trajectory> rev(res.trajectories.rbegin(), res.trajectories.rend());
  EXPECT_NEAR(checkpoint(rev, 200).mean, res.summary.checkpoints[2].mean, 1e-12);
  EXPECT_NEAR(checkpoint(rev, 200).stddev, res.summary.checkpoints[2].stddev, 1e-12);
}

TEST(Experiment, WritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "pmids_harness_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig c = parse_config(bandit_config());
  c.out_path = dir.string();
  const ExperimentResult res = run_experiment(c);
  std::ifstream csv(dir / "trajectories.csv");
  std::stringstream buf;
  buf << csv.rdbuf();
  EXPECT_EQ(buf.str(), csv_of(res.trajectories));
  std::ifstream sum(dir / "summary.json");
  const Json j = Json::parse(sum);
  EXPECT_EQ(j.at("horizon").get<Index>(), 200u);
  EXPECT_EQ(j.at("policy").get<std::string>(), "ids_full");
  std::filesystem::remove_all(dir);
}

TEST(Experiment, ContextualAndKernelModesRun) {
  const Json ctx = Json::parse(R"({
    "contexts": [{"preset": "bandit", "actions": [[0.5, 0], [0, 0.5]]},
                 {"preset": "zero_info", "actions": [[0.5, 0], [0, 0.5]]}],
    "nu": [0.3, 0.7], "contextual_mode": "contextual", "theta": [0.2, 0.5],
    "horizon": 40, "reps": 2
  })");
  const ExperimentResult a = run_experiment(parse_config(ctx));
  EXPECT_EQ(a.trajectories.size(), 2u);
  const Json ker = Json::parse(R"({
    "kernel": {"lengthscale": 0.5, "grid": {"points": 5}}, "horizon": 30, "policy": "ids_full"
  })");
  const ExperimentResult b = run_experiment(parse_config(ker));
  EXPECT_EQ(b.trajectories.front().rounds.size(), 30u);
}

TEST(Report, ClassifyConfig) {
  const Json r = classify_config(parse_config(bandit_config()));
  EXPECT_EQ(r.at("regime").get<std::string>(), "sqrt_n");
  EXPECT_NEAR(r.at("alignment_upper").get<double>(), 4.0, 1e-9);
}

TEST(Format, Numbers) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(kInf), "inf");
}

}  // namespace
}  // namespace pmids
