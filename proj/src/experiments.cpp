#include "pico/experiments.hpp"

#include "pico/analysis.hpp"
#include "pico/coils.hpp"
#include "pico/estimators.hpp"
#include "pico/io.hpp"
#include "pico/operators.hpp"
#include "pico/phantom.hpp"
#include "pico/rng.hpp"
#include "pico/sampling.hpp"

#include <Eigen/Core>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace pico {

namespace {

namespace fs = std::filesystem;

// Stream tag for simulated measurement noise, distinct from the estimator's
// own probe/replica streams (which consume the master seed directly).
constexpr std::uint64_t kDataNoiseTag = 101;

SamplingPattern build_pattern(const ExperimentConfig& cfg, Index R) {
  const Shape shape{cfg.rows, cfg.cols};
  switch (cfg.trajectory) {
    case TrajectoryKind::Cartesian:
      return make_pattern_cartesian(shape, R, cfg.calib);
    case TrajectoryKind::Radial:
      return make_pattern_radial(shape, cfg.spokes, cfg.samples_per_spoke, R);
    case TrajectoryKind::External:
      return load_trajectory_csv(cfg.trajectory_csv, shape, R);
  }
  throw Error("unhandled trajectory kind");
}

EncodingOperator build_operator(const ExperimentConfig& cfg, Index R) {
  const Shape shape{cfg.rows, cfg.cols};
  auto op = make_operator(synth_coils(shape, cfg.coils, cfg.coil_width),
                          build_pattern(cfg, R));
  if (cfg.normalize) op = normalized(std::move(op), 60, 1.05);
  return op;
}

ComplexImage true_image(const ExperimentConfig& cfg) {
  const bool fista = cfg.kind == ExperimentKind::CsNonlinear ||
                     cfg.kind == ExperimentKind::Robustness;
  return fista ? piecewise_phantom(cfg.rows, cfg.cols)
               : shepp_logan(cfg.rows, cfg.cols);
}

KSpaceData simulate_data(const ExperimentConfig& cfg, const ReconSpec& spec) {
  KSpaceData b = forward(spec.op, true_image(cfg));
  if (cfg.data_noise > 0.0)
    b.data += cfg.data_noise *
              draw_complex_gaussian(
                  SeedSpec{derive_seed(cfg.seed, kDataNoiseTag), 0},
                  spec.op.kspace_dim());
  return b;
}

std::string snapshot_name(Index n) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "snapshots/snapshot_n%08lld.picv",
                static_cast<long long>(n));
  return buf;
}

class Writer {
 public:
  Writer(const ExperimentConfig& cfg) : dir_(cfg.out) {
    fs::create_directories(dir_);
  }

  void map(const std::string& name, const RVec& values, Shape shape) {
    write_real_map((dir_ / name).string(), values, shape);
    result.files.push_back(name);
  }
  void curve(const std::string& name, const ConvergenceCurve& c) {
    write_curve_csv((dir_ / name).string(), c);
    result.files.push_back(name);
  }
  void text(const std::string& name, const std::string& body) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + name + "' for writing");
    out << body;
    if (!out.flush()) throw IoError("write failed on '" + name + "'");
    result.files.push_back(name);
  }
  void keyvals(const std::string& name,
               const std::vector<std::pair<std::string, std::string>>& pairs,
               const std::vector<std::string>& comments = {}) {
    write_key_values((dir_ / name).string(), pairs, comments);
    result.files.push_back(name);
  }
  void snapshots(const EstimatorRun& run) {
    fs::create_directories(dir_ / "snapshots");
    for (const auto& snap : run.snapshots)
      map(snapshot_name(snap.n_samples), snap.values, snap.shape);
  }

  ExperimentResult result;

 private:
  fs::path dir_;
};

void describe_run(std::vector<std::string>& comments, const std::string& label,
                  const VarianceMap& final_map) {
  comments.push_back("result." + label +
                     ".probes = " + std::to_string(final_map.n_samples));
  comments.push_back(
      "result." + label + ".operator_applications = " +
      std::to_string(final_map.operator_applications));
  comments.push_back("result." + label + ".clamped_voxels = " +
                     std::to_string(final_map.clamped_voxels));
  comments.push_back("result." + label + ".worst_negative = " +
                     format_double(final_map.worst_negative));
}

std::vector<std::string> base_comments() {
  return {std::string("pico_version = ") + kPicoVersion,
          "eigen = " + std::to_string(EIGEN_WORLD_VERSION) + "." +
              std::to_string(EIGEN_MAJOR_VERSION) + "." +
              std::to_string(EIGEN_MINOR_VERSION)};
}

EstimatorRun run_map_estimator(const ExperimentConfig& cfg,
                               const ReconSpec& spec, const KSpaceData& b) {
  if (spec.is_linear() && cfg.method == RunMethod::Pico)
    return pico_linear(spec, cfg.family, cfg.n, cfg.seed, cfg.checkpoints);
  if (!spec.is_linear() && cfg.method == RunMethod::Pico)
    return pico_jacobian(spec, b, cfg.family, cfg.n, cfg.seed,
                         cfg.checkpoints);
  return pmr(spec, b, cfg.sigma_k, cfg.n, cfg.seed, cfg.checkpoints);
}

bool needs_data(const ExperimentConfig& cfg) {
  return cfg.kind == ExperimentKind::CsNonlinear ||
         cfg.method == RunMethod::Pmr;
}

void run_map_kind(const ExperimentConfig& cfg, const ReconSpec& spec,
                  Writer& out, std::vector<std::string>& comments) {
  const Shape shape = spec.op.shape;
  KSpaceData b;
  if (needs_data(cfg)) b = simulate_data(cfg, spec);

  const EstimatorRun run = run_map_estimator(cfg, spec, b);
  out.map("variance.picv", run.final.values, shape);
  out.map("sigma.picv", sigma_map(run.final), shape);
  if (cfg.save_snapshots) out.snapshots(run);
  describe_run(comments, "run", run.final);

  if (spec.op.image_dim() <= 1024) {
    const VarianceMap oracle =
        spec.is_linear()
            ? oracle_diag(spec)
            : oracle_diag(spec, std::optional<KSpaceData>(b));
    out.map("oracle.picv", oracle.values, shape);
    out.curve("curve.csv", convergence_curve(run, oracle));
  }

  if (cfg.kind == ExperimentKind::CartesianLinear && !cfg.normalize &&
      cfg.lambda == 0.0 && cfg.calib == 0) {
    const auto closed_form =
        analytical_sense(spec.op.coils, spec.op.pattern);
    out.map("analytical.picv", closed_form.values, shape);
  }

  if (cfg.reference) {
    const auto ref_spec = ReconSpec::linear(build_operator(cfg, 1), 0.0,
                                            cfg.cg_max_iters, cfg.cg_tol);
    const VarianceMap ref = oracle_diag(ref_spec);
    out.map("reference.picv", ref.values, shape);
    const auto g = g_factor(run.final, ref, cfg.R);
    out.map("g.picv", g.values, shape);
  }
}

void run_ablation(const ExperimentConfig& cfg, const ReconSpec& spec,
                  Writer& out, std::vector<std::string>& comments) {
  if (spec.op.image_dim() > 1024)
    throw TooLarge("ablation needs the oracle map (image dim <= 1024)");
  const VarianceMap oracle = oracle_diag(spec);
  out.map("oracle.picv", oracle.values, spec.op.shape);
  const std::pair<ProbeFamily, const char*> families[] = {
      {ProbeFamily::RandomPhase, "random-phase"},
      {ProbeFamily::RealRademacher, "rademacher"},
      {ProbeFamily::ComplexGaussian, "complex-gaussian"},
  };
  for (const auto& [family, name] : families) {
    const EstimatorRun run =
        pico_linear(spec, family, cfg.n, cfg.seed, cfg.checkpoints);
    out.curve(std::string("curve_") + name + ".csv",
              convergence_curve(run, oracle));
    describe_run(comments, name, run.final);
  }
}

void run_shrinkage(const ReconSpec& spec, Writer& out) {
  const ShrinkageReport report = shrinkage_check(spec);
  out.keyvals("shrinkage.txt",
              {{"passed", report.passed ? "true" : "false"},
               {"min_gap_eigenvalue", format_double(report.min_gap_eigenvalue)},
               {"trace_gap", format_double(report.trace_gap)},
               {"diag_violations", std::to_string(report.diag_violations)},
               {"max_mode_factor_error",
                format_double(report.max_mode_factor_error)}});
}

void run_robustness(const ExperimentConfig& cfg, const ReconSpec& spec,
                    Writer& out) {
  const auto levels = robustness_sweep(spec, true_image(cfg), cfg.sigmas,
                                       cfg.n, cfg.seed);
  std::string csv = "sigma,nrmse\n";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    csv += format_double(levels[i].sigma) + "," +
           format_double(levels[i].nrmse_between) + "\n";
    const std::string tag = "level" + std::to_string(i);
    out.map(tag + "_jacobian_var.picv", levels[i].jacobian_map.values,
            spec.op.shape);
    out.map(tag + "_replica_var.picv", levels[i].replica_map.values,
            spec.op.shape);
  }
  out.text("robustness.csv", csv);
}

}  // namespace

ReconSpec build_recon_spec(const ExperimentConfig& cfg) {
  auto op = build_operator(cfg, cfg.R);
  if (cfg.kind == ExperimentKind::CsNonlinear ||
      cfg.kind == ExperimentKind::Robustness)
    return ReconSpec::fista_tv(std::move(op), cfg.lambda_tv, cfg.fista_iters,
                               0.99, cfg.tv_inner_iters);
  return ReconSpec::linear(std::move(op), cfg.lambda, cfg.cg_max_iters,
                           cfg.cg_tol);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ReconSpec spec = build_recon_spec(cfg);
  Writer out(cfg);
  std::vector<std::string> comments = base_comments();

  switch (cfg.kind) {
    case ExperimentKind::CartesianLinear:
    case ExperimentKind::NoncartesianLinear:
    case ExperimentKind::CsNonlinear:
      run_map_kind(cfg, spec, out, comments);
      break;
    case ExperimentKind::Ablation:
      run_ablation(cfg, spec, out, comments);
      break;
    case ExperimentKind::Shrinkage:
      run_shrinkage(spec, out);
      break;
    case ExperimentKind::Robustness:
      run_robustness(cfg, spec, out);
      break;
  }

  out.keyvals("manifest.txt", serialize_config(cfg), comments);
  return out.result;
}

}  // namespace pico
