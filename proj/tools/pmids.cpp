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

// Command-line simulator.
//
//   pmids run      --config FILE [--out DIR]
//   pmids classify --config FILE
//   pmids sweep    --config FILE --horizons 500,1000,2000,4000 [--out DIR]

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmids/pmids.hpp"

namespace {

std::vector<pmids::Index> parse_horizons(const std::string& text) {
  std::vector<pmids::Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      throw pmids::InvalidArgument("--horizons: '" + item + "' is not an integer");
    }
    if (pos != item.size() || v < 1) {
      throw pmids::InvalidArgument("--horizons: '" + item + "' is not a positive integer");
    }
    out.push_back(static_cast<pmids::Index>(v));
  }
  if (out.empty()) throw pmids::InvalidArgument("--horizons: empty list");
  return out;
}

int run(const std::string& config_path, const std::string& out_dir) {
  auto cfg = pmids::load_config(config_path);
  if (!out_dir.empty()) cfg.out_path = out_dir;
  const auto res = pmids::run_experiment(cfg);
  std::cout << pmids::summary_json(res.summary).dump(2) << '\n';
  return 0;
}

int classify(const std::string& config_path) {
  const auto cfg = pmids::load_config(config_path);
  std::cout << pmids::classify_config(cfg).dump(2) << '\n';
  return 0;
}

int sweep(const std::string& config_path, const std::string& horizons, const std::string& out_dir) {
  auto cfg = pmids::load_config(config_path);
  if (!out_dir.empty()) cfg.out_path = out_dir;
  const auto res = pmids::run_sweep(cfg, parse_horizons(horizons));
  pmids::Json j;
  j["summaries"] = pmids::Json::array();
  for (const auto& s : res.summaries) j["summaries"].push_back(pmids::summary_json(s));
  j["horizon_exponent"] =
      res.horizon_exponent ? pmids::Json(*res.horizon_exponent) : pmids::Json(nullptr);
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for linear partial monitoring with information directed sampling"};
  app.require_subcommand(1);

  std::string config_path, out_dir, horizons;

  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write CSV and summary");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");

  auto* classify_cmd = app.add_subcommand("classify", "Print the minimax regime of a game");
  classify_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Run over several horizons and fit the exponent");
  sweep_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sweep_cmd->add_option("--horizons", horizons, "Comma-separated horizons")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory (one subdirectory per horizon)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) return run(config_path, out_dir);
    if (classify_cmd->parsed()) return classify(config_path);
    if (sweep_cmd->parsed()) return sweep(config_path, horizons, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "pmids: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
