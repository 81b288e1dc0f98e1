#pragma once

#include "pico/probes.hpp"
#include "pico/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pico {

enum class ExperimentKind {
  CartesianLinear,
  NoncartesianLinear,
  CsNonlinear,
  Ablation,
  Shrinkage,
  Robustness,
};

enum class TrajectoryKind { Cartesian, Radial, External };
enum class RunMethod { Pico, Pmr };

// One experiment = one system + one estimator run (or one report), fully
// determined by these values plus the master seed. parse_config fills
// defaults, resolves the checkpoint schedule, and validates every field;
// serialize_config writes every field back out, so a saved manifest is
// itself a complete, re-runnable configuration.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::CartesianLinear;
  TrajectoryKind trajectory = TrajectoryKind::Cartesian;
  std::string trajectory_csv;  // External trajectory sample file

  Index rows = 16;
  Index cols = 16;
  Index coils = 4;
  double coil_width = 0.8;
  Index R = 2;
  Index calib = 0;
  Index spokes = 64;
  Index samples_per_spoke = 32;
  bool normalize = false;  // resolved from "auto" by trajectory/kind

  double lambda = 0.0;
  double lambda_tv = 0.0;
  Index cg_max_iters = 400;
  double cg_tol = 1e-8;
  Index fista_iters = 60;
  Index tv_inner_iters = 20;

  RunMethod method = RunMethod::Pico;
  ProbeFamily family = ProbeFamily::RandomPhase;
  Index n = 2000;
  std::vector<Index> checkpoints;  // resolved: never empty after parsing
  double sigma_k = 0.01;   // replica perturbation scale
  double data_noise = 0.0;  // measurement noise in simulated data
  std::vector<double> sigmas;  // robustness levels; resolved for that kind
  bool reference = false;      // also compute the unaccelerated reference + g
  bool save_snapshots = true;

  std::uint64_t seed = 1;
  std::string out = ".";
};

// Geometric checkpoint schedule {25, 50, 100, ...} capped at n, with n
// appended when not already on the grid; {n} when n < 25.
std::vector<Index> default_checkpoints(Index n);

// Parse from "key = value" pairs (see read_key_values). Unknown keys,
// malformed values, and out-of-range or kind-inconsistent settings throw
// ConfigError naming the offending key. `overrides` entries of the form
// "key=value" are applied on top before validation.
ExperimentConfig parse_config(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& overrides = {});

// Every field as a "key = value" pair, in a fixed order.
std::vector<std::pair<std::string, std::string>> serialize_config(
    const ExperimentConfig& config);

const char* experiment_kind_name(ExperimentKind kind);

}  // namespace pico
