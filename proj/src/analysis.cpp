#include "pico/analysis.hpp"

#include "pico/linalg.hpp"

#include <cmath>
#include <cstdint>

namespace pico {

namespace {

BoolVec full_mask(Index n) { return BoolVec::Constant(n, true); }

const BoolVec& resolve_mask(const BoolVec& mask, Index n, BoolVec& storage) {
  if (mask.size() == 0) {
    storage = full_mask(n);
    return storage;
  }
  if (mask.size() != n)
    throw ShapeMismatch("mask length does not match map length");
  return mask;
}

// Independent derived seeds for the sweep's per-level data noise and
// estimator streams.
std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
  return derive_seed(seed, tag);
}

double roi_mean(const RVec& values, const BoolVec& mask) {
  double sum = 0.0;
  Index count = 0;
  for (Index k = 0; k < values.size(); ++k)
    if (mask[k]) {
      sum += values[k];
      ++count;
    }
  if (count == 0) throw Error("ROI mask selects no voxels");
  return sum / static_cast<double>(count);
}

}  // namespace

GFactorMap g_factor(const VarianceMap& acc, const VarianceMap& ref, Index R,
                    const BoolVec& mask) {
  if (!(acc.shape == ref.shape) || acc.values.size() != ref.values.size())
    throw ShapeMismatch("variance maps have different shapes");
  if (R < 1) throw Error("acceleration factor must be at least 1");
  const Index n = acc.values.size();
  BoolVec storage;
  const BoolVec& m = resolve_mask(mask, n, storage);

  // Undo each operator's spectral normalization so the ratio compares
  // physical variances.
  const double acc_scale = acc.norm_scale * acc.norm_scale;
  const double ref_scale = ref.norm_scale * ref.norm_scale;

  GFactorMap g;
  g.values = RVec::Zero(n);
  g.R = R;
  g.support_mask = m;
  g.shape = acc.shape;
  for (Index k = 0; k < n; ++k) {
    if (!m[k]) continue;
    const double r = ref.values[k] / ref_scale;
    if (r <= 0.0)
      throw ZeroReference("reference variance is not positive on the mask");
    const double a = acc.values[k] / acc_scale;
    g.values[k] = std::sqrt(a / (static_cast<double>(R) * r));
  }
  return g;
}

double nrmse(const RVec& est, const RVec& ref, const BoolVec& mask) {
  if (est.size() != ref.size())
    throw ShapeMismatch("maps have different lengths");
  BoolVec storage;
  const BoolVec& m = resolve_mask(mask, est.size(), storage);
  double err = 0.0, den = 0.0;
  for (Index k = 0; k < est.size(); ++k)
    if (m[k]) {
      const double d = est[k] - ref[k];
      err += d * d;
      den += ref[k] * ref[k];
    }
  if (den == 0.0) throw ZeroReference("reference is zero on the mask");
  return std::sqrt(err / den);
}

double nrmse(const VarianceMap& est, const VarianceMap& ref,
             const BoolVec& mask) {
  if (!(est.shape == ref.shape))
    throw ShapeMismatch("variance maps have different shapes");
  return nrmse(est.values, ref.values, mask);
}

ConvergenceCurve convergence_curve(const EstimatorRun& run,
                                   const VarianceMap& ref,
                                   const BoolVec& mask) {
  if (run.snapshots.empty())
    throw Error("convergence curve needs a checkpointed run");
  ConvergenceCurve curve;
  curve.method = run.final.method;
  curve.entries.reserve(run.snapshots.size());
  for (const auto& snap : run.snapshots)
    curve.entries.push_back(
        {snap.n_samples, nrmse(snap, ref, mask), snap.operator_applications});
  return curve;
}

Crossing efficiency_crossing(const ConvergenceCurve& curve, double threshold) {
  if (!(threshold > 0.0)) throw Error("crossing threshold must be positive");
  for (const auto& e : curve.entries)
    if (e.nrmse <= threshold) return {e.n, e.operator_applications};
  throw NotReached("no checkpoint reaches the NRMSE threshold");
}

CertificationReport certify_pmr(const EstimatorRun& run,
                                const VarianceMap& gold,
                                const BoolVec& roi_mask) {
  if (run.snapshots.size() < 2)
    throw Error("certification needs checkpoints at N and 2N");
  BoolVec storage;
  const BoolVec& roi =
      resolve_mask(roi_mask, gold.values.size(), storage);

  bool any_pair = false;
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    const auto& at_n = run.snapshots[i];
    const VarianceMap* at_2n = nullptr;
    for (std::size_t j = i + 1; j < run.snapshots.size(); ++j)
      if (run.snapshots[j].n_samples == 2 * at_n.n_samples) {
        at_2n = &run.snapshots[j];
        break;
      }
    if (!at_2n) continue;
    any_pair = true;

    const double nr_n = nrmse(at_n, gold, roi);
    const double nr_2n = nrmse(*at_2n, gold, roi);
    const double mean_2n = roi_mean(at_2n->values, roi);
    if (mean_2n == 0.0)
      throw ZeroReference("ROI mean vanishes at the doubled checkpoint");
    const double delta_roi =
        std::abs(roi_mean(at_n.values, roi) - mean_2n) / std::abs(mean_2n);
    if (nr_n - nr_2n < 0.005 && delta_roi < 0.002)
      return {at_n.n_samples, nr_n, delta_roi, gold.n_samples};
  }
  if (!any_pair) throw Error("certification needs checkpoints at N and 2N");
  throw NotCertifiable("no checkpoint satisfies the doubling rule");
}

ShrinkageReport shrinkage_check(const ReconSpec& spec) {
  if (!spec.is_linear())
    throw NonLinearSpec("shrinkage check applies to the linear spec");
  if (!(spec.lambda > 0.0))
    throw Error("shrinkage check needs lambda > 0");
  const Index n = spec.op.image_dim();
  if (n > 256) throw TooLarge("shrinkage check capped at dim 256");

  const CMat m = materialize_dense(NormalOperator{spec.op, 0.0});
  const auto eig = hermitian_eig(HermitianMatrix(m));
  const double mu_max = eig.values(n - 1);
  if (!(eig.values(0) > 1e-12 * mu_max))
    throw NotPositiveDefinite(
        "least-squares covariance needs a positive-definite normal operator");

  // Unregularized covariance from the eigendecomposition; regularized
  // covariance independently from dense Cholesky inversion.
  // Both covariances are Hermitian in exact arithmetic; symmetrize them so
  // round-off asymmetry cannot dominate their difference when the gap is
  // small relative to the covariances themselves.
  CMat sigma_ls = eig.vectors * eig.values.cwiseInverse().asDiagonal() *
                  eig.vectors.adjoint();
  sigma_ls = (0.5 * (sigma_ls + sigma_ls.adjoint())).eval();
  const CMat reg = m + spec.lambda * CMat::Identity(n, n);
  const CMat inv = cholesky_solve(cholesky(HermitianMatrix(reg)),
                                  CMat::Identity(n, n));
  CMat sigma_l = inv * m * inv;
  sigma_l = (0.5 * (sigma_l + sigma_l.adjoint())).eval();

  ShrinkageReport report;
  const CMat gap = sigma_ls - sigma_l;
  report.min_gap_eigenvalue = hermitian_eig(HermitianMatrix(gap)).values(0);
  report.trace_gap = gap.trace().real();
  for (Index k = 0; k < n; ++k)
    if (!(sigma_l(k, k).real() < sigma_ls(k, k).real()))
      ++report.diag_violations;
  for (Index i = 0; i < n; ++i) {
    const double mu = eig.values(i);
    const double expected = (mu / (mu + spec.lambda)) * (mu / (mu + spec.lambda));
    const double measured =
        (eig.vectors.col(i).dot(sigma_l * eig.vectors.col(i))).real() * mu;
    report.max_mode_factor_error = std::max(
        report.max_mode_factor_error, std::abs(measured / expected - 1.0));
  }
  report.passed = report.min_gap_eigenvalue > -1e-10 &&
                  report.trace_gap > 0.0 && report.diag_violations == 0 &&
                  report.max_mode_factor_error <= 1e-6;
  return report;
}

std::vector<RobustnessLevel> robustness_sweep(const ReconSpec& spec,
                                              const ComplexImage& x_true,
                                              const std::vector<double>& sigmas,
                                              Index n, std::uint64_t seed) {
  if (spec.is_linear())
    throw NonLinearSpec("robustness sweep drives the FISTA reconstruction");
  if (!(x_true.shape == spec.op.shape))
    throw ShapeMismatch("true image shape does not match the operator");
  if (sigmas.empty()) throw Error("robustness sweep needs noise levels");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0)) throw Error("noise levels must be positive");
    if (i > 0 && !(sigmas[i] > sigmas[i - 1]))
      throw Error("noise levels must be strictly ascending");
  }

  const CVec clean = forward_batch(spec.op, x_true.data).col(0);
  std::vector<RobustnessLevel> levels;
  levels.reserve(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double sigma = sigmas[i];
    const std::uint64_t tag = 3 * static_cast<std::uint64_t>(i);
    const CVec eta = draw_complex_gaussian(SeedSpec{mix(seed, tag), 0},
                                           spec.op.kspace_dim());
    const KSpaceData b(clean + sigma * eta, spec.op.n_samples,
                       spec.op.n_coils);

    const auto jac = pico_jacobian(spec, b, ProbeFamily::RandomPhase, n,
                                   mix(seed, tag + 1));
    const auto rep = pmr(spec, b, sigma, n, mix(seed, tag + 2));
    // Both maps are variance per unit input noise by construction; the
    // replica map serves as the reference of the comparison.
    const double nr = nrmse(sigma_map(jac.final), sigma_map(rep.final));
    levels.push_back({sigma, jac.final, rep.final, nr});
  }
  return levels;
}

}  // namespace pico
