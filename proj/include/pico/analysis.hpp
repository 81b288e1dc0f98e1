#pragma once

#include "pico/estimators.hpp"
#include "pico/recon.hpp"
#include "pico/types.hpp"

#include <cstdint>
#include <vector>

namespace pico {

// Voxelwise noise amplification of an accelerated reconstruction relative to
// a fully sampled reference, normalized by sqrt(R). Values are 0 off the
// support mask.
struct GFactorMap {
  RVec values;
  Index R = 1;
  BoolVec support_mask;
  Shape shape;
};

// NRMSE against a fixed reference map at increasing sample counts, with the
// operator-application cost of each point.
struct ConvergenceCurve {
  struct Entry {
    Index n = 0;
    double nrmse = 0.0;
    std::int64_t operator_applications = 0;
  };
  std::vector<Entry> entries;
  EstimatorMethod method = EstimatorMethod::Pico;
};

struct Crossing {
  Index n = 0;
  std::int64_t operator_applications = 0;
};

// Outcome of the replica-doubling convergence certification.
struct CertificationReport {
  Index certified_n = 0;
  double nrmse_at_n = 0.0;
  double delta_roi_at_n = 0.0;
  Index gold_n = 0;
};

// Dense verification that Tikhonov regularization shrinks the output
// covariance in the Loewner order.
struct ShrinkageReport {
  double min_gap_eigenvalue = 0.0;   // smallest eigenvalue of Sigma_LS - Sigma_l
  double trace_gap = 0.0;            // tr(Sigma_LS) - tr(Sigma_l)
  Index diag_violations = 0;         // voxels with diag(Sigma_l) >= diag(Sigma_LS)
  double max_mode_factor_error = 0.0;  // worst |measured/(mu/(mu+l))^2 - 1|
  bool passed = false;
};

// One level of the input-noise robustness sweep: both estimators' maps (each
// already per unit input noise) and the NRMSE between their sigma maps.
struct RobustnessLevel {
  double sigma = 0.0;
  VarianceMap jacobian_map;
  VarianceMap replica_map;
  double nrmse_between = 0.0;
};

// g = sqrt(acc)/(sqrt(R)*sqrt(ref)) per masked voxel, 0 elsewhere. Each map
// is first divided by its own norm_scale^2 so the ratio is independent of the
// operators' spectral normalization. An empty mask means all voxels.
GFactorMap g_factor(const VarianceMap& acc, const VarianceMap& ref, Index R,
                    const BoolVec& mask = {});

// ||est - ref||_2 / ||ref||_2 over masked voxels (all voxels if the mask is
// empty). Values are compared as stored: callers choose variance or sigma
// maps.
double nrmse(const VarianceMap& est, const VarianceMap& ref,
             const BoolVec& mask = {});
double nrmse(const RVec& est, const RVec& ref, const BoolVec& mask = {});

// NRMSE of every checkpoint snapshot against a reference map.
ConvergenceCurve convergence_curve(const EstimatorRun& run,
                                   const VarianceMap& ref,
                                   const BoolVec& mask = {});

// First curve entry at or below the threshold; throws NotReached if none.
Crossing efficiency_crossing(const ConvergenceCurve& curve, double threshold);

// Replica-doubling certification: the smallest checkpoint N with a 2N
// checkpoint available such that NRMSE(N) - NRMSE(2N) < 0.005 and the
// relative ROI-mean change is < 0.002 (both NRMSE and ROI means over
// roi_mask, against `gold`). Throws NotCertifiable if no N qualifies.
CertificationReport certify_pmr(const EstimatorRun& run,
                                const VarianceMap& gold,
                                const BoolVec& roi_mask);

// Materializes the unregularized and regularized output covariances of a
// linear spec (lambda > 0, dim <= 256) and verifies: (i) Sigma_LS - Sigma_l
// is PSD within -1e-10 with a strictly positive trace gap, (ii) strict
// elementwise diagonal dominance, (iii) modewise variance factors equal
// (mu/(mu+lambda))^2.
ShrinkageReport shrinkage_check(const ReconSpec& spec);

// For each noise level sigma (positive, ascending): simulate data
// b = A x_true + sigma*eta, run the Jacobian prober and the pseudo-replica
// estimator (sigma_k = sigma) with n samples each, and report the NRMSE
// between their sigma maps. Seeds for data noise and both estimators are
// derived from the master seed per level.
std::vector<RobustnessLevel> robustness_sweep(const ReconSpec& spec,
                                              const ComplexImage& x_true,
                                              const std::vector<double>& sigmas,
                                              Index n, std::uint64_t seed);

}  // namespace pico
