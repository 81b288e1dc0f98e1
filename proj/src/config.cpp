#include "pico/config.hpp"

#include "pico/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace pico {

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw ConfigError("key '" + key + "' " + why);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const FormatError&) {
    bad_key(key, "has a malformed number '" + value + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    bad_key(key, "has a malformed integer '" + value + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    bad_key(key, "has a malformed unsigned integer '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad_key(key, "must be true or false");
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto stop = comma == std::string::npos ? value.size() : comma;
    std::string part = value.substr(start, stop - start);
    const auto first = part.find_first_not_of(" \t");
    if (first == std::string::npos)
      part.clear();
    else
      part = part.substr(first, part.find_last_not_of(" \t") - first + 1);
    parts.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::string join_commas(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

const char* family_name(ProbeFamily family) {
  switch (family) {
    case ProbeFamily::RandomPhase: return "random-phase";
    case ProbeFamily::RealRademacher: return "rademacher";
    case ProbeFamily::ComplexGaussian: return "complex-gaussian";
  }
  return "random-phase";
}

bool is_fista_kind(ExperimentKind kind) {
  return kind == ExperimentKind::CsNonlinear ||
         kind == ExperimentKind::Robustness;
}

bool is_map_run_kind(ExperimentKind kind) {
  return kind == ExperimentKind::CartesianLinear ||
         kind == ExperimentKind::NoncartesianLinear ||
         kind == ExperimentKind::CsNonlinear;
}

}  // namespace

std::vector<Index> default_checkpoints(Index n) {
  std::vector<Index> points;
  for (Index c = 25; c <= n; c *= 2) points.push_back(c);
  if (points.empty() || points.back() != n) points.push_back(n);
  return points;
}

ExperimentConfig parse_config(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& overrides) {
  std::vector<std::pair<std::string, std::string>> merged = pairs;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq);
    const std::string value = o.substr(eq + 1);
    bool replaced = false;
    for (auto& [k, v] : merged)
      if (k == key) {
        v = value;
        replaced = true;
        break;
      }
    if (!replaced) merged.emplace_back(key, value);
  }

  ExperimentConfig cfg;
  bool saw_kind = false;
  bool saw_trajectory = false;
  bool saw_normalize = false;
  bool normalize_value = false;
  bool saw_checkpoints = false;
  bool saw_sigmas = false;

  for (const auto& [key, value] : merged) {
    if (key == "kind") {
      saw_kind = true;
      if (value == "cartesian-linear") cfg.kind = ExperimentKind::CartesianLinear;
      else if (value == "noncartesian-linear") cfg.kind = ExperimentKind::NoncartesianLinear;
      else if (value == "cs-nonlinear") cfg.kind = ExperimentKind::CsNonlinear;
      else if (value == "ablation") cfg.kind = ExperimentKind::Ablation;
      else if (value == "shrinkage") cfg.kind = ExperimentKind::Shrinkage;
      else if (value == "robustness") cfg.kind = ExperimentKind::Robustness;
      else bad_key(key, "must be one of cartesian-linear, noncartesian-linear, cs-nonlinear, ablation, shrinkage, robustness");
    } else if (key == "trajectory") {
      saw_trajectory = true;
      if (value == "cartesian") cfg.trajectory = TrajectoryKind::Cartesian;
      else if (value == "radial") cfg.trajectory = TrajectoryKind::Radial;
      else bad_key(key, "must be cartesian or radial");
    } else if (key == "trajectory_csv") {
      cfg.trajectory_csv = value;
    } else if (key == "rows") {
      cfg.rows = to_int(key, value);
    } else if (key == "cols") {
      cfg.cols = to_int(key, value);
    } else if (key == "coils") {
      cfg.coils = to_int(key, value);
    } else if (key == "coil_width") {
      cfg.coil_width = to_double(key, value);
    } else if (key == "R") {
      cfg.R = to_int(key, value);
    } else if (key == "calib") {
      cfg.calib = to_int(key, value);
    } else if (key == "spokes") {
      cfg.spokes = to_int(key, value);
    } else if (key == "samples_per_spoke") {
      cfg.samples_per_spoke = to_int(key, value);
    } else if (key == "normalize") {
      if (value == "auto") {
        saw_normalize = false;
      } else {
        saw_normalize = true;
        normalize_value = to_bool(key, value);
      }
    } else if (key == "lambda") {
      cfg.lambda = to_double(key, value);
    } else if (key == "lambda_tv") {
      cfg.lambda_tv = to_double(key, value);
    } else if (key == "cg_max_iters") {
      cfg.cg_max_iters = to_int(key, value);
    } else if (key == "cg_tol") {
      cfg.cg_tol = to_double(key, value);
    } else if (key == "fista_iters") {
      cfg.fista_iters = to_int(key, value);
    } else if (key == "tv_inner_iters") {
      cfg.tv_inner_iters = to_int(key, value);
    } else if (key == "method") {
      if (value == "pico") cfg.method = RunMethod::Pico;
      else if (value == "pmr") cfg.method = RunMethod::Pmr;
      else bad_key(key, "must be pico or pmr");
    } else if (key == "family") {
      if (value == "random-phase") cfg.family = ProbeFamily::RandomPhase;
      else if (value == "rademacher") cfg.family = ProbeFamily::RealRademacher;
      else if (value == "complex-gaussian") cfg.family = ProbeFamily::ComplexGaussian;
      else bad_key(key, "must be random-phase, rademacher, or complex-gaussian");
    } else if (key == "n") {
      cfg.n = to_int(key, value);
    } else if (key == "checkpoints") {
      saw_checkpoints = true;
      cfg.checkpoints.clear();
      if (!value.empty())
        for (const auto& part : split_commas(value)) {
          if (part.empty()) bad_key(key, "has an empty entry");
          cfg.checkpoints.push_back(to_int(key, part));
        }
    } else if (key == "sigma_k") {
      cfg.sigma_k = to_double(key, value);
    } else if (key == "data_noise") {
      cfg.data_noise = to_double(key, value);
    } else if (key == "sigmas") {
      saw_sigmas = true;
      cfg.sigmas.clear();
      if (!value.empty())
        for (const auto& part : split_commas(value)) {
          if (part.empty()) bad_key(key, "has an empty entry");
          cfg.sigmas.push_back(to_double(key, part));
        }
    } else if (key == "reference") {
      if (value == "none") cfg.reference = false;
      else if (value == "unaccelerated") cfg.reference = true;
      else bad_key(key, "must be none or unaccelerated");
    } else if (key == "save_snapshots") {
      cfg.save_snapshots = to_bool(key, value);
    } else if (key == "seed") {
      cfg.seed = to_u64(key, value);
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }

  if (!saw_kind) throw ConfigError("key 'kind' is required");

  // Trajectory resolution and kind consistency.
  if (!saw_trajectory)
    cfg.trajectory = cfg.kind == ExperimentKind::NoncartesianLinear
                         ? TrajectoryKind::Radial
                         : TrajectoryKind::Cartesian;
  if (!cfg.trajectory_csv.empty()) {
    if (cfg.trajectory == TrajectoryKind::Cartesian && saw_trajectory)
      bad_key("trajectory_csv", "replaces the radial trajectory; set trajectory = radial");
    cfg.trajectory = TrajectoryKind::External;
  }
  if (cfg.kind == ExperimentKind::CartesianLinear &&
      cfg.trajectory != TrajectoryKind::Cartesian)
    bad_key("trajectory", "must be cartesian for kind cartesian-linear");
  if (cfg.kind == ExperimentKind::NoncartesianLinear &&
      cfg.trajectory == TrajectoryKind::Cartesian)
    bad_key("trajectory", "must be radial (or an external file) for kind noncartesian-linear");

  // Normalization: default on for non-Cartesian trajectories and for FISTA
  // kinds (the FISTA step size assumes unit spectral norm).
  if (saw_normalize)
    cfg.normalize = normalize_value;
  else
    cfg.normalize =
        cfg.trajectory != TrajectoryKind::Cartesian || is_fista_kind(cfg.kind);
  if (is_fista_kind(cfg.kind) && !cfg.normalize)
    bad_key("normalize", "must be true for FISTA-based kinds");

  // Geometry and solver ranges.
  if (cfg.rows < 8 || cfg.rows > 256) bad_key("rows", "must be in [8, 256]");
  if (cfg.cols < 8 || cfg.cols > 256) bad_key("cols", "must be in [8, 256]");
  if (cfg.coils < 1 || cfg.coils > 64) bad_key("coils", "must be in [1, 64]");
  if (!(cfg.coil_width > 0.0)) bad_key("coil_width", "must be positive");
  if (cfg.R < 1) bad_key("R", "must be >= 1");
  if (cfg.calib < 0 || cfg.calib >= cfg.rows)
    bad_key("calib", "must be in [0, rows)");
  if (cfg.spokes < 1) bad_key("spokes", "must be >= 1");
  if (cfg.samples_per_spoke < 2) bad_key("samples_per_spoke", "must be >= 2");
  if (cfg.lambda < 0.0) bad_key("lambda", "must be >= 0");
  if (cfg.lambda_tv < 0.0) bad_key("lambda_tv", "must be >= 0");
  if (cfg.cg_max_iters < 1) bad_key("cg_max_iters", "must be >= 1");
  if (!(cfg.cg_tol > 0.0)) bad_key("cg_tol", "must be positive");
  if (cfg.fista_iters < 1) bad_key("fista_iters", "must be >= 1");
  if (cfg.tv_inner_iters < 1) bad_key("tv_inner_iters", "must be >= 1");
  if (cfg.n < 1) bad_key("n", "must be >= 1");
  if (!(cfg.sigma_k > 0.0)) bad_key("sigma_k", "must be positive");
  if (cfg.data_noise < 0.0) bad_key("data_noise", "must be >= 0");
  if (cfg.out.empty()) bad_key("out", "must not be empty");

  // Kind-specific couplings.
  if (is_fista_kind(cfg.kind)) {
    if (cfg.lambda != 0.0)
      bad_key("lambda", "must be 0 for FISTA-based kinds (use lambda_tv)");
  } else {
    if (cfg.lambda_tv != 0.0)
      bad_key("lambda_tv", "must be 0 for linear kinds (use lambda)");
  }
  if (cfg.kind == ExperimentKind::Shrinkage && !(cfg.lambda > 0.0))
    bad_key("lambda", "must be positive for kind shrinkage");
  if (cfg.kind == ExperimentKind::Ablation && cfg.method == RunMethod::Pmr)
    bad_key("method", "must be pico for kind ablation (families are probe families)");
  if (cfg.reference && !(cfg.kind == ExperimentKind::CartesianLinear ||
                         cfg.kind == ExperimentKind::NoncartesianLinear))
    bad_key("reference", "is only available for the linear map kinds");
  if (cfg.method == RunMethod::Pmr && cfg.n < 2)
    bad_key("n", "must be >= 2 for method pmr");
  if (is_fista_kind(cfg.kind) || cfg.method == RunMethod::Pmr) {
    // Simulated data needs a phantom, which needs at least 8x8.
    if (cfg.rows < 8) bad_key("rows", "must be >= 8 when data is simulated");
    if (cfg.cols < 8) bad_key("cols", "must be >= 8 when data is simulated");
  }

  // Checkpoint schedule.
  if (!saw_checkpoints || cfg.checkpoints.empty())
    cfg.checkpoints = default_checkpoints(cfg.n);
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    if (cfg.checkpoints[i] < 1) bad_key("checkpoints", "entries must be >= 1");
    if (cfg.checkpoints[i] > cfg.n)
      bad_key("checkpoints", "entries must be <= n");
    if (i > 0 && cfg.checkpoints[i] <= cfg.checkpoints[i - 1])
      bad_key("checkpoints", "must be strictly ascending");
  }

  // Robustness levels.
  if (cfg.kind == ExperimentKind::Robustness) {
    if (!saw_sigmas || cfg.sigmas.empty()) {
      cfg.sigmas.clear();
      for (const double scale : {1.0, 5.0, 10.0, 50.0, 100.0, 200.0})
        cfg.sigmas.push_back(cfg.sigma_k * scale);
    }
    for (std::size_t i = 0; i < cfg.sigmas.size(); ++i) {
      if (!(cfg.sigmas[i] > 0.0)) bad_key("sigmas", "entries must be positive");
      if (i > 0 && !(cfg.sigmas[i] > cfg.sigmas[i - 1]))
        bad_key("sigmas", "must be strictly ascending");
    }
    if (cfg.n < 2) bad_key("n", "must be >= 2 for kind robustness");
  } else if (saw_sigmas && !cfg.sigmas.empty()) {
    bad_key("sigmas", "is only available for kind robustness");
  }

  return cfg;
}

std::vector<std::pair<std::string, std::string>> serialize_config(
    const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> pairs;
  auto put = [&](const char* key, std::string value) {
    pairs.emplace_back(key, std::move(value));
  };
  put("kind", experiment_kind_name(cfg.kind));
  put("trajectory",
      cfg.trajectory == TrajectoryKind::Cartesian ? "cartesian" : "radial");
  put("trajectory_csv", cfg.trajectory_csv);
  put("rows", std::to_string(cfg.rows));
  put("cols", std::to_string(cfg.cols));
  put("coils", std::to_string(cfg.coils));
  put("coil_width", format_double(cfg.coil_width));
  put("R", std::to_string(cfg.R));
  put("calib", std::to_string(cfg.calib));
  put("spokes", std::to_string(cfg.spokes));
  put("samples_per_spoke", std::to_string(cfg.samples_per_spoke));
  put("normalize", cfg.normalize ? "true" : "false");
  put("lambda", format_double(cfg.lambda));
  put("lambda_tv", format_double(cfg.lambda_tv));
  put("cg_max_iters", std::to_string(cfg.cg_max_iters));
  put("cg_tol", format_double(cfg.cg_tol));
  put("fista_iters", std::to_string(cfg.fista_iters));
  put("tv_inner_iters", std::to_string(cfg.tv_inner_iters));
  put("method", cfg.method == RunMethod::Pico ? "pico" : "pmr");
  put("family", family_name(cfg.family));
  put("n", std::to_string(cfg.n));
  {
    std::vector<std::string> parts;
    for (const Index c : cfg.checkpoints) parts.push_back(std::to_string(c));
    put("checkpoints", join_commas(parts));
  }
  put("sigma_k", format_double(cfg.sigma_k));
  put("data_noise", format_double(cfg.data_noise));
  {
    std::vector<std::string> parts;
    for (const double s : cfg.sigmas) parts.push_back(format_double(s));
    put("sigmas", join_commas(parts));
  }
  put("reference", cfg.reference ? "unaccelerated" : "none");
  put("save_snapshots", cfg.save_snapshots ? "true" : "false");
  put("seed", std::to_string(cfg.seed));
  put("out", cfg.out);
  return pairs;
}

const char* experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::CartesianLinear: return "cartesian-linear";
    case ExperimentKind::NoncartesianLinear: return "noncartesian-linear";
    case ExperimentKind::CsNonlinear: return "cs-nonlinear";
    case ExperimentKind::Ablation: return "ablation";
    case ExperimentKind::Shrinkage: return "shrinkage";
    case ExperimentKind::Robustness: return "robustness";
  }
  return "cartesian-linear";
}

}  // namespace pico
