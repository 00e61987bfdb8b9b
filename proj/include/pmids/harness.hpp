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

#ifndef PMIDS_HARNESS_HPP
#define PMIDS_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmids/classifier.hpp"
#include "pmids/common.hpp"
#include "pmids/contextual.hpp"
#include "pmids/estimator.hpp"
#include "pmids/game.hpp"
#include "pmids/kernel.hpp"
#include "pmids/policy.hpp"

namespace pmids {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Seeding

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the mt19937_64 stream used by repetition `rep`:
/// splitmix64(splitmix64(base_seed) ^ rep).
inline std::uint64_t episode_seed(std::uint64_t base_seed, std::uint64_t rep) {
  return splitmix64(splitmix64(base_seed) ^ rep);
}

// ---------------------------------------------------------------------------
// Configuration

struct ThetaSpec {
  enum class Kind { explicit_list, laser_truth, random_unit };
  Kind kind = Kind::random_unit;
  /// Explicit parameters, cycled by repetition index.
  std::vector<Vector> values;
};

struct KernelConfig {
  KernelSpec spec;
  KernelFeedback feedback = KernelFeedback::value;
  std::vector<Vector> ground;
  /// Explicit truth; when empty a random unit-norm function with
  /// `random_centers` centers in [-box, box]^d is drawn from the base seed.
  std::optional<KernelFunction> truth;
  Index random_centers = 5;
  double box = 1.0;
  NoiseModel noise = NoiseModel::gaussian(0.1);
};

struct ExperimentConfig {
  enum class Mode { linear, contextual, kernel };
  Mode mode = Mode::linear;
  PresetSpec game;
  std::vector<PresetSpec> contexts;
  Vector nu;
  /// Contextual IDS over the joint plan instead of conditional decisions.
  bool contextual_joint = false;
  KernelConfig kernel;
  PolicyKind policy = PolicyKind::ids_full;
  Index horizon = 1000;
  Index reps = 1;
  std::uint64_t base_seed = 0;
  std::optional<double> delta;
  ThetaSpec theta;
  std::string out_path;
  /// Worker threads for repetitions; 0 picks the hardware concurrency.
  Index threads = 0;

  double effective_delta() const { return delta ? *delta : 1.0 / static_cast<double>(horizon); }

  void validate() const {
    require(horizon >= 1, "config: horizon must be >= 1");
    require(reps >= 1, "config: reps must be >= 1");
    const double d = effective_delta();
    require(d > 0.0 && d <= 1.0, "config: delta must be in (0, 1]");
  }
};

namespace config {

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  require(j.is_object(), where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw InvalidArgument(where + ": unknown key '" + key + "'");
  }
}

inline Vector to_vector(const Json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), where + ": expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Index i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), where + ": expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline std::vector<Vector> to_vectors(const Json& j, const std::string& where) {
  require(j.is_array(), where + ": expected an array of vectors");
  std::vector<Vector> out;
  for (const auto& e : j) out.push_back(to_vector(e, where));
  return out;
}

/// Matrix given as a list of rows.
inline Matrix to_matrix(const Json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), where + ": expected a list of rows");
  const auto rows = to_vectors(j, where);
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (Index r = 0; r < rows.size(); ++r) {
    require(rows[r].size() == rows.front().size(), where + ": ragged matrix");
    m.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  return m;
}

inline NoiseModel parse_noise(const Json& j) {
  check_keys(j, {"kind", "sigma"}, "noise");
  const std::string kind = j.value("kind", "gaussian");
  if (kind == "gaussian") {
    const double sigma = j.value("sigma", 1.0);
    require(sigma >= 0.0, "noise: sigma must be >= 0");
    return NoiseModel::gaussian(sigma);
  }
  if (kind == "binary_sign") {
    require(!j.contains("sigma"), "noise: binary_sign takes no sigma");
    return NoiseModel::binary_sign();
  }
  throw InvalidArgument("noise: unknown kind '" + kind + "'");
}

inline PresetKind parse_preset_kind(const std::string& s) {
  for (auto k : {PresetKind::bandit, PresetKind::full_info, PresetKind::dueling_avg,
                 PresetKind::transductive, PresetKind::batch, PresetKind::laser,
                 PresetKind::zero_info, PresetKind::circle, PresetKind::custom}) {
    if (s == preset_name(k)) return k;
  }
  throw InvalidArgument("game: unknown preset '" + s + "'");
}

inline PresetSpec parse_game(const Json& j) {
  check_keys(j, {"preset", "actions", "explore_set", "target_set", "operators", "batch_size",
                 "grid_m", "variant", "num_points", "noise"},
             "game");
  require(j.contains("preset"), "game: missing 'preset'");
  PresetSpec s;
  s.kind = parse_preset_kind(j.at("preset").get<std::string>());
  if (j.contains("actions")) s.actions = to_vectors(j.at("actions"), "game.actions");
  if (j.contains("explore_set")) s.explore_set = to_vectors(j.at("explore_set"), "game.explore_set");
  if (j.contains("target_set")) s.target_set = to_vectors(j.at("target_set"), "game.target_set");
  if (j.contains("operators")) {
    require(j.at("operators").is_array(), "game.operators: expected a list of matrices");
    for (const auto& m : j.at("operators")) s.operators.push_back(to_matrix(m, "game.operators"));
  }
  if (j.contains("batch_size")) {
    const auto b = j.at("batch_size").get<long long>();
    require(b >= 1, "build_game: batch size B must be >= 1");
    s.batch_size = static_cast<Index>(b);
  }
  if (j.contains("grid_m")) {
    const auto m = j.at("grid_m").get<long long>();
    require(m >= 1, "build_game: laser grid_m must be >= 1");
    s.grid_m = static_cast<Index>(m);
  }
  if (j.contains("variant")) {
    const std::string v = j.at("variant").get<std::string>();
    if (v == "invasive") {
      s.laser_variant = LaserVariant::invasive;
    } else if (v == "transductive") {
      s.laser_variant = LaserVariant::transductive;
    } else {
      throw InvalidArgument("game: unknown laser variant '" + v + "'");
    }
  }
  if (j.contains("num_points")) {
    const auto n = j.at("num_points").get<long long>();
    require(n >= 1, "build_game: circle needs num_points >= 1");
    s.num_points = static_cast<Index>(n);
  }
  if (j.contains("noise")) s.noise = parse_noise(j.at("noise"));
  return s;
}

inline ThetaSpec parse_theta(const Json& j) {
  ThetaSpec t;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "laser-truth") {
      t.kind = ThetaSpec::Kind::laser_truth;
    } else if (s == "random-unit") {
      t.kind = ThetaSpec::Kind::random_unit;
    } else {
      throw InvalidArgument("theta: unknown generator '" + s + "'");
    }
    return t;
  }
  require(j.is_array() && !j.empty(), "theta: expected a vector, a list of vectors or a name");
  t.kind = ThetaSpec::Kind::explicit_list;
  if (j.front().is_array()) {
    t.values = to_vectors(j, "theta");
  } else {
    t.values = {to_vector(j, "theta")};
  }
  return t;
}

inline KernelConfig parse_kernel(const Json& j) {
  check_keys(j, {"kind", "lengthscale", "dim", "feedback", "ground", "grid", "truth", "noise"},
             "kernel");
  KernelConfig k;
  if (j.contains("ground")) {
    require(!j.contains("grid"), "kernel: give either 'ground' or 'grid'");
    k.ground = to_vectors(j.at("ground"), "kernel.ground");
  } else {
    require(j.contains("grid"), "kernel: missing 'ground' or 'grid'");
    const Json& g = j.at("grid");
    check_keys(g, {"dim", "lo", "hi", "points"}, "kernel.grid");
    const auto dim = static_cast<Index>(g.value("dim", 1));
    const double lo = g.value("lo", -1.0);
    const double hi = g.value("hi", 1.0);
    const auto pts = static_cast<Index>(g.value("points", 11));
    require(dim >= 1 && dim <= 3, "kernel.grid: dim must be 1, 2 or 3");
    require(pts >= 2 && hi > lo, "kernel.grid: need points >= 2 and hi > lo");
    Index total = 1;
    for (Index d = 0; d < dim; ++d) total *= pts;
    for (Index c = 0; c < total; ++c) {
      Vector x(static_cast<Eigen::Index>(dim));
      Index rem = c;
      for (Index d = dim; d-- > 0;) {
        x(static_cast<Eigen::Index>(d)) =
            lo + (hi - lo) * static_cast<double>(rem % pts) / static_cast<double>(pts - 1);
        rem /= pts;
      }
      k.ground.push_back(x);
    }
  }
  require(!k.ground.empty(), "kernel: ground set is empty");
  const auto dim = static_cast<Index>(k.ground.front().size());
  if (j.contains("dim")) {
    require(j.at("dim").get<long long>() == static_cast<long long>(dim),
            "kernel: 'dim' disagrees with the ground points");
  }
  const std::string kind = j.value("kind", "rbf");
  if (kind == "rbf") {
    k.spec = KernelSpec::rbf(dim, j.value("lengthscale", 1.0));
  } else if (kind == "linear") {
    require(!j.contains("lengthscale"), "kernel: linear kernel takes no lengthscale");
    k.spec = KernelSpec::linear(dim);
  } else {
    throw InvalidArgument("kernel: unknown kind '" + kind + "'");
  }
  const std::string fb = j.value("feedback", "value");
  if (fb == "value") {
    k.feedback = KernelFeedback::value;
  } else if (fb == "gradient") {
    k.feedback = KernelFeedback::gradient;
  } else if (fb == "value_gradient") {
    k.feedback = KernelFeedback::value_gradient;
  } else if (fb == "dueling") {
    k.feedback = KernelFeedback::dueling;
  } else {
    throw InvalidArgument("kernel: unknown feedback '" + fb + "'");
  }
  if (j.contains("truth")) {
    const Json& t = j.at("truth");
    check_keys(t, {"centers", "alpha", "random_centers", "box"}, "kernel.truth");
    if (t.contains("centers")) {
      KernelFunction f;
      f.centers = to_vectors(t.at("centers"), "kernel.truth.centers");
      f.alpha = to_vector(t.at("alpha"), "kernel.truth.alpha");
      require(static_cast<Index>(f.alpha.size()) == f.centers.size(),
              "kernel.truth: one weight per center required");
      require(f.rkhs_norm(k.spec) <= 1.0 + tol::kNorm, "kernel.truth: RKHS norm exceeds 1");
      k.truth = f;
    } else {
      k.random_centers = static_cast<Index>(t.value("random_centers", 5));
      k.box = t.value("box", 1.0);
    }
  }
  if (j.contains("noise")) k.noise = parse_noise(j.at("noise"));
  return k;
}

}  // namespace config

inline ExperimentConfig parse_config(const Json& j) {
  config::check_keys(j, {"game", "contexts", "nu", "contextual_mode", "kernel", "policy", "horizon",
                         "reps", "seed", "delta", "theta", "out", "threads"},
                     "config");
  ExperimentConfig c;
  const int modes = static_cast<int>(j.contains("game")) + static_cast<int>(j.contains("contexts")) +
                    static_cast<int>(j.contains("kernel"));
  require(modes == 1, "config: give exactly one of 'game', 'contexts' or 'kernel'");
  if (j.contains("game")) {
    c.mode = ExperimentConfig::Mode::linear;
    c.game = config::parse_game(j.at("game"));
  } else if (j.contains("contexts")) {
    c.mode = ExperimentConfig::Mode::contextual;
    require(j.at("contexts").is_array() && !j.at("contexts").empty(),
            "config: 'contexts' must be a non-empty list of games");
    for (const auto& g : j.at("contexts")) c.contexts.push_back(config::parse_game(g));
    require(j.contains("nu"), "config: contextual games need 'nu'");
    c.nu = config::to_vector(j.at("nu"), "nu");
    if (j.contains("contextual_mode")) {
      const std::string m = j.at("contextual_mode").get<std::string>();
      require(m == "conditional" || m == "contextual",
              "config: contextual_mode must be 'conditional' or 'contextual'");
      c.contextual_joint = m == "contextual";
    }
  } else {
    c.mode = ExperimentConfig::Mode::kernel;
    c.kernel = config::parse_kernel(j.at("kernel"));
  }
  require(c.mode == ExperimentConfig::Mode::contextual ||
              (!j.contains("nu") && !j.contains("contextual_mode")),
          "config: 'nu' and 'contextual_mode' only apply to contextual games");
  if (j.contains("policy")) c.policy = parse_policy(j.at("policy").get<std::string>());
  if (j.contains("horizon")) {
    const auto n = j.at("horizon").get<long long>();
    require(n >= 1, "config: horizon must be >= 1");
    c.horizon = static_cast<Index>(n);
  }
  if (j.contains("reps")) {
    const auto r = j.at("reps").get<long long>();
    require(r >= 1, "config: reps must be >= 1");
    c.reps = static_cast<Index>(r);
  }
  if (j.contains("seed")) c.base_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  if (j.contains("theta")) {
    c.theta = config::parse_theta(j.at("theta"));
  } else if (c.mode == ExperimentConfig::Mode::linear && c.game.kind == PresetKind::laser) {
    c.theta.kind = ThetaSpec::Kind::laser_truth;
  }
  require(c.mode != ExperimentConfig::Mode::kernel || !j.contains("theta"),
          "config: kernel games take their parameter from 'kernel.truth'");
  if (j.contains("out")) c.out_path = j.at("out").get<std::string>();
  if (j.contains("threads")) c.threads = static_cast<Index>(j.at("threads").get<long long>());
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw InvalidArgument("config '" + path + "': " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Episodes

struct RoundRecord {
  Index t = 0;
  Index action = 0;
  Index context = 0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double info_gain = 0.0;
  double ratio = 0.0;
  bool fallback = false;
};

struct Trajectory {
  Index rep = 0;
  std::vector<RoundRecord> rounds;
  /// Rounds where no action was informative and the minimum-gap action was
  /// played.
  Index fallback_rounds = 0;

  double final_regret() const { return rounds.empty() ? 0.0 : rounds.back().cum_regret; }
};

/// Games, parameters and derived constants shared by all repetitions.
struct PreparedExperiment {
  ExperimentConfig config;
  std::optional<Game> game;
  std::optional<ContextualGame> cgame;
  std::optional<KernelGame> kgame;
  std::optional<KernelFunction> kernel_truth;
  Index dim = 0;
  std::string name;
};

inline PreparedExperiment prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  PreparedExperiment p;
  p.config = cfg;
  switch (cfg.mode) {
    case ExperimentConfig::Mode::linear:
      p.game = build_game(cfg.game);
      p.dim = p.game->dim();
      p.name = p.game->name();
      break;
    case ExperimentConfig::Mode::contextual: {
      std::vector<Game> games;
      for (const auto& s : cfg.contexts) games.push_back(build_game(s));
      p.cgame.emplace(std::move(games), cfg.nu);
      p.dim = p.cgame->dim();
      p.name = "contextual(" + std::to_string(p.cgame->size()) + ")";
      break;
    }
    case ExperimentConfig::Mode::kernel: {
      const auto& k = cfg.kernel;
      p.kgame = build_kernel_game(k.spec, k.ground, k.feedback, k.noise);
      if (k.truth) {
        p.kernel_truth = *k.truth;
      } else {
        std::mt19937_64 rng(splitmix64(cfg.base_seed ^ 0x6b65726e656cULL));
        p.kernel_truth = random_kernel_function(k.spec, k.random_centers, k.box, rng);
      }
      p.dim = k.spec.dim;
      p.name = p.kgame->name;
      break;
    }
  }
  require(!cfg.contextual_joint || cfg.policy == PolicyKind::ids_full,
          "config: contextual_mode 'contextual' requires policy ids_full");
  require(cfg.mode != ExperimentConfig::Mode::kernel || cfg.policy != PolicyKind::ids_directed,
          "config: kernel games do not support ids_directed");
  if (cfg.mode != ExperimentConfig::Mode::kernel) {
    if (cfg.theta.kind == ThetaSpec::Kind::laser_truth) {
      require(p.dim == laser::kFeatureDim, "theta: laser-truth needs the laser game");
    }
    for (const auto& v : cfg.theta.values) {
      require(static_cast<Index>(v.size()) == p.dim, "theta: wrong dimension");
      require(v.norm() <= 1.0 + tol::kNorm, "theta: ||theta|| > 1");
    }
  }
  return p;
}

template <class Rng>
Vector draw_theta(const PreparedExperiment& p, Index rep, Rng& rng) {
  const auto& t = p.config.theta;
  switch (t.kind) {
    case ThetaSpec::Kind::explicit_list:
      return t.values[rep % t.values.size()];
    case ThetaSpec::Kind::laser_truth:
      return laser::truth();
    case ThetaSpec::Kind::random_unit: {
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector v(static_cast<Eigen::Index>(p.dim));
      do {
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
      } while (v.norm() == 0.0);
      return v / v.norm();
    }
  }
  throw InvalidArgument("theta: unknown kind");
}

namespace detail {

inline Trajectory run_linear_episode(const PreparedExperiment& p, Index rep) {
  const auto& cfg = p.config;
  std::mt19937_64 rng(episode_seed(cfg.base_seed, rep));
  const Vector theta = draw_theta(p, rep, rng);
  const Environment env(*p.game, theta, episode_seed(cfg.base_seed, rep));
  const Game& g = env.game;
  const double delta = cfg.effective_delta();
  const Index best = g.best_action(theta);
  const double best_reward = g.reward(best, theta);

  EstimatorState state(g.dim());
  Trajectory tr;
  tr.rep = rep;
  tr.rounds.reserve(cfg.horizon);
  double cum = 0.0;
  for (Index t = 1; t <= cfg.horizon; ++t) {
    const PolicyDecision d = decide(cfg.policy, state, g, delta);
    const Index a = d.sample(rng);
    const Vector obs = sample_observation(env, a, rng);
    const double before = state.logdet();
    state.update(g.op(a), obs);
    const double inst = best_reward - g.reward(a, theta);
    cum += inst;
    tr.rounds.push_back({t, a, 0, inst, cum, state.logdet() - before, d.ratio, d.fallback});
    if (d.fallback) ++tr.fallback_rounds;
  }
  return tr;
}

inline Trajectory run_contextual_episode(const PreparedExperiment& p, Index rep) {
  const auto& cfg = p.config;
  const ContextualGame& cg = *p.cgame;
  std::mt19937_64 rng(episode_seed(cfg.base_seed, rep));
  const Vector theta = draw_theta(p, rep, rng);
  const double delta = cfg.effective_delta();

  EstimatorState state(cg.dim());
  Trajectory tr;
  tr.rep = rep;
  tr.rounds.reserve(cfg.horizon);
  double cum = 0.0;
  for (Index t = 1; t <= cfg.horizon; ++t) {
    const Index z = cg.sample_context(rng);
    const Game& g = cg.game(z);
    PolicyDecision d;
    if (cfg.contextual_joint) {
      auto plan = contextual_ids(state, cg, delta);
      d = std::move(plan.conditionals[z]);
      d.fallback = d.fallback || plan.no_information;
    } else {
      d = decide(cfg.policy, state, g, delta);
    }
    const Index a = d.sample(rng);
    const Environment env(g, theta);
    const Vector obs = sample_observation(env, a, rng);
    const double before = state.logdet();
    state.update(g.op(a), obs);
    const double inst = g.reward(g.best_action(theta), theta) - g.reward(a, theta);
    cum += inst;
    tr.rounds.push_back({t, a, z, inst, cum, state.logdet() - before, d.ratio, d.fallback});
    if (d.fallback) ++tr.fallback_rounds;
  }
  return tr;
}

inline Trajectory run_kernel_episode(const PreparedExperiment& p, Index rep) {
  const auto& cfg = p.config;
  const KernelGame& g = *p.kgame;
  const KernelFunction& f = *p.kernel_truth;
  std::mt19937_64 rng(episode_seed(cfg.base_seed, rep));
  const double delta = cfg.effective_delta();
  std::vector<double> rewards;
  for (const auto& a : g.actions) rewards.push_back(f.apply(g.kernel, a.reward));
  const double best_reward = *std::max_element(rewards.begin(), rewards.end());

  KernelData data(g.kernel);
  Trajectory tr;
  tr.rep = rep;
  tr.rounds.reserve(cfg.horizon);
  double cum = 0.0;
  for (Index t = 1; t <= cfg.horizon; ++t) {
    const PolicyDecision d = kernel_decide(cfg.policy, data, g, delta);
    const Index a = d.sample(rng);
    const Vector obs = sample_kernel_observation(g, f, a, rng);
    const double before = data.logdet();
    data.update(g.actions[a].observations, obs);
    const double inst = best_reward - rewards[a];
    cum += inst;
    tr.rounds.push_back({t, a, 0, inst, cum, data.logdet() - before, d.ratio, d.fallback});
    if (d.fallback) ++tr.fallback_rounds;
  }
  return tr;
}

}  // namespace detail

inline Trajectory run_episode(const PreparedExperiment& p, Index rep) {
  switch (p.config.mode) {
    case ExperimentConfig::Mode::linear: return detail::run_linear_episode(p, rep);
    case ExperimentConfig::Mode::contextual: return detail::run_contextual_episode(p, rep);
    case ExperimentConfig::Mode::kernel: return detail::run_kernel_episode(p, rep);
  }
  throw InvalidArgument("run_episode: unknown mode");
}

inline Trajectory run_episode(const ExperimentConfig& cfg, Index rep) {
  return run_episode(prepare(cfg), rep);
}

// ---------------------------------------------------------------------------
// Experiments

/// Least-squares slope of log R_t against log t for t in [lo, hi] (1-based).
inline double fit_regret_exponent(const std::vector<double>& cum_regret, Index lo, Index hi) {
  require(lo >= 1 && lo < hi && hi <= cum_regret.size(),
          "fit_regret_exponent: invalid window");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(hi - lo + 1);
  for (Index t = lo; t <= hi; ++t) {
    const double r = cum_regret[t - 1];
    require(r > 0.0, "fit_regret_exponent: non-positive regret in the window");
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Slope over the default window [n/2, n].
inline double fit_regret_exponent(const std::vector<double>& cum_regret) {
  const Index n = cum_regret.size();
  return fit_regret_exponent(cum_regret, std::max<Index>(1, n / 2), n);
}

/// Log-log slope of final regret against horizon across a sweep.
inline double fit_horizon_exponent(const std::vector<Index>& horizons,
                                   const std::vector<double>& final_regret) {
  require(horizons.size() == final_regret.size() && horizons.size() >= 2,
          "fit_horizon_exponent: need at least two horizons");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(horizons.size());
  for (Index i = 0; i < horizons.size(); ++i) {
    require(final_regret[i] > 0.0, "fit_horizon_exponent: non-positive regret");
    const double x = std::log(static_cast<double>(horizons[i]));
    const double y = std::log(final_regret[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Checkpoint {
  Index t = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct ExperimentSummary {
  std::string game;
  PolicyKind policy = PolicyKind::ids_full;
  Index horizon = 0;
  Index reps = 0;
  double delta = 0.0;
  std::vector<Checkpoint> checkpoints;
  std::vector<double> mean_cum_regret;
  std::optional<double> fitted_exponent;
  Index fallback_rounds = 0;

  double final_mean() const { return mean_cum_regret.empty() ? 0.0 : mean_cum_regret.back(); }
};

struct ExperimentResult {
  std::vector<Trajectory> trajectories;
  ExperimentSummary summary;
};

/// Mean and sample standard deviation of cumulative regret at round t.
inline Checkpoint checkpoint(const std::vector<Trajectory>& trs, Index t) {
  Checkpoint c;
  c.t = t;
  const auto n = static_cast<double>(trs.size());
  for (const auto& tr : trs) c.mean += tr.rounds[t - 1].cum_regret / n;
  if (trs.size() > 1) {
    double ss = 0.0;
    for (const auto& tr : trs) {
      const double d = tr.rounds[t - 1].cum_regret - c.mean;
      ss += d * d;
    }
    c.stddev = std::sqrt(ss / (n - 1.0));
  }
  return c;
}

inline ExperimentSummary summarize(const PreparedExperiment& p,
                                   const std::vector<Trajectory>& trs) {
  const auto& cfg = p.config;
  ExperimentSummary s;
  s.game = p.name;
  s.policy = cfg.policy;
  s.horizon = cfg.horizon;
  s.reps = cfg.reps;
  s.delta = cfg.effective_delta();
  const Index n = cfg.horizon;
  for (Index t : {std::max<Index>(1, n / 4), std::max<Index>(1, n / 2), n}) {
    if (!s.checkpoints.empty() && s.checkpoints.back().t == t) continue;
    s.checkpoints.push_back(checkpoint(trs, t));
  }
  s.mean_cum_regret.assign(n, 0.0);
  for (const auto& tr : trs) {
    for (Index t = 0; t < n; ++t) {
      s.mean_cum_regret[t] += tr.rounds[t].cum_regret / static_cast<double>(trs.size());
    }
    s.fallback_rounds += tr.fallback_rounds;
  }
  if (n >= 2) {
    try {
      s.fitted_exponent = fit_regret_exponent(s.mean_cum_regret);
    } catch (const InvalidArgument&) {
      s.fitted_exponent.reset();
    }
  }
  return s;
}

/// Runs all repetitions, in parallel when threads allow, and merges them in
/// repetition order.
inline std::vector<Trajectory> run_repetitions(const PreparedExperiment& p) {
  const Index reps = p.config.reps;
  std::vector<Trajectory> out(reps);
  Index workers = p.config.threads;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, reps);
  if (workers <= 1) {
    for (Index r = 0; r < reps; ++r) out[r] = run_episode(p, r);
    return out;
  }
  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Index r = next++; r < reps; r = next++) out[r] = run_episode(p, r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline const char* kCsvHeader = "rep,t,action,inst_regret,cum_regret,info_gain,ratio";

inline void write_csv(std::ostream& os, const std::vector<Trajectory>& trs) {
  os << kCsvHeader << '\n';
  for (const auto& tr : trs) {
    for (const auto& r : tr.rounds) {
      os << tr.rep << ',' << r.t << ',' << r.action << ',' << format_number(r.inst_regret) << ','
         << format_number(r.cum_regret) << ',' << format_number(r.info_gain) << ','
         << format_number(r.ratio) << '\n';
    }
  }
}

inline Json summary_json(const ExperimentSummary& s) {
  Json j;
  j["game"] = s.game;
  j["policy"] = policy_name(s.policy);
  j["horizon"] = s.horizon;
  j["reps"] = s.reps;
  j["delta"] = s.delta;
  j["checkpoints"] = Json::array();
  for (const auto& c : s.checkpoints) {
    j["checkpoints"].push_back({{"t", c.t}, {"mean_cum_regret", c.mean}, {"stddev", c.stddev}});
  }
  j["final_mean_regret"] = s.final_mean();
  j["fitted_exponent"] = s.fitted_exponent ? Json(*s.fitted_exponent) : Json(nullptr);
  j["fallback_rounds"] = s.fallback_rounds;
  return j;
}

/// Runs the experiment and, when out_path is set, writes trajectories.csv and
/// summary.json into that directory.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const PreparedExperiment p = prepare(cfg);
  ExperimentResult res;
  res.trajectories = run_repetitions(p);
  res.summary = summarize(p, res.trajectories);
  if (!cfg.out_path.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_path, ec);
    if (ec) throw Error("cannot create output directory '" + cfg.out_path + "': " + ec.message());
    const fs::path dir(cfg.out_path);
    std::ofstream csv(dir / "trajectories.csv");
    if (!csv) throw Error("cannot write '" + (dir / "trajectories.csv").string() + "'");
    write_csv(csv, res.trajectories);
    std::ofstream sum(dir / "summary.json");
    if (!sum) throw Error("cannot write '" + (dir / "summary.json").string() + "'");
    sum << summary_json(res.summary).dump(2) << '\n';
    if (!csv || !sum) throw Error("write to '" + cfg.out_path + "' failed");
  }
  return res;
}

struct SweepResult {
  std::vector<ExperimentSummary> summaries;
  std::optional<double> horizon_exponent;
};

/// Runs the experiment once per horizon. When delta is unset each run uses
/// 1/horizon.
inline SweepResult run_sweep(const ExperimentConfig& cfg, const std::vector<Index>& horizons) {
  require(!horizons.empty(), "sweep: no horizons given");
  SweepResult out;
  std::vector<double> finals;
  for (Index n : horizons) {
    ExperimentConfig c = cfg;
    c.horizon = n;
    if (!cfg.out_path.empty()) {
      c.out_path = (std::filesystem::path(cfg.out_path) / ("n" + std::to_string(n))).string();
    }
    out.summaries.push_back(run_experiment(c).summary);
    finals.push_back(out.summaries.back().final_mean());
  }
  if (horizons.size() >= 2 &&
      std::all_of(finals.begin(), finals.end(), [](double v) { return v > 0.0; })) {
    out.horizon_exponent = fit_horizon_exponent(horizons, finals);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification reports

inline Json report_json(const Game& game, const ClassificationReport& r) {
  Json j;
  j["game"] = game.name();
  j["actions"] = game.size();
  j["dim"] = game.dim();
  j["pareto"] = r.pareto;
  j["neighbor_edges"] = Json::array();
  for (const auto& [a, b] : r.neighbor_edges) j["neighbor_edges"].push_back({a, b});
  j["globally_observable"] = r.globally_observable;
  j["locally_observable"] = r.locally_observable;
  j["regime"] = regime_name(r.regime);
  if (r.alignment_upper && std::isfinite(*r.alignment_upper)) {
    j["alignment_upper"] = *r.alignment_upper;
  } else {
    j["alignment_upper"] = nullptr;
  }
  return j;
}

/// Classification of the configured game, or of every context.
inline Json classify_config(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case ExperimentConfig::Mode::linear: {
      const Game g = build_game(cfg.game);
      return report_json(g, classify(g));
    }
    case ExperimentConfig::Mode::contextual: {
      const PreparedExperiment p = prepare(cfg);
      Json j;
      j["contexts"] = Json::array();
      for (Index z = 0; z < p.cgame->size(); ++z) {
        const Game& g = p.cgame->game(z);
        j["contexts"].push_back(report_json(g, classify(g)));
      }
      const double bound = expected_alignment_upper(*p.cgame, pareto_subsets(*p.cgame));
      j["expected_alignment_upper"] = std::isfinite(bound) ? Json(bound) : Json(nullptr);
      return j;
    }
    case ExperimentConfig::Mode::kernel:
      break;
  }
  throw InvalidArgument("classify: kernel games have no finite classification");
}

}  // namespace pmids

#endif  // PMIDS_HARNESS_HPP
