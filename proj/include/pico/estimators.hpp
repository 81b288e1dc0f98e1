#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pico/coils.hpp"
#include "pico/fista.hpp"
#include "pico/noise.hpp"
#include "pico/probes.hpp"
#include "pico/recon.hpp"
#include "pico/sampling.hpp"
#include "pico/types.hpp"

namespace pico {

enum class EstimatorMethod { Pico, Pmr, AnalyticalSense, Oracle };

const char* estimator_method_name(EstimatorMethod method);

// Per-voxel noise variance of the reconstruction output, per unit whitened
// input noise, in the scaling of the operator the estimate was run on (carry
// norm_scale so maps from differently normalized operators can be compared).
struct VarianceMap {
  RVec values;  // >= 0 after output clamping; finite
  EstimatorMethod method = EstimatorMethod::Pico;
  ProbeFamily family = ProbeFamily::RandomPhase;  // meaningful for Pico only
  Index n_samples = 0;
  SeedSpec seed;
  std::int64_t operator_applications = 0;  // single A or A^H applications
  double norm_scale = 1.0;
  Shape shape;
  // Clamp log: Monte Carlo estimates may go slightly negative per voxel.
  Index clamped_voxels = 0;
  double worst_negative = 0.0;  // most negative pre-clamp value (<= 0)
};

// One streaming estimation run: the raw accumulators, the probes consumed,
// and a finished map at every requested checkpoint plus the final count.
// Accumulator meaning per method: Pico (linear) uses s = sum of
// conj(v) .* (Sigma v); Jacobian probing and PMR use s2 = sum of |output|^2
// and PMR additionally s = sum of (output - reference) for mean removal.
struct EstimatorRun {
  CVec s;
  RVec s2;
  Index probes = 0;
  std::vector<VarianceMap> snapshots;  // one per requested checkpoint
  VarianceMap final;
};

// Monte Carlo estimate of diag(Sigma) for the linear reconstruction by
// probing: mean over probes of Re[conj(v) .* apply_covariance(v)], probe i
// drawn on stream i of the master seed. Checkpoints (ascending, <= N) emit
// intermediate maps that are bitwise equal to fresh runs at those counts.
EstimatorRun pico_linear(const ReconSpec& spec, ProbeFamily family, Index n,
                         std::uint64_t master_seed,
                         const std::vector<Index>& checkpoints = {});

// Monte Carlo estimate of diag(J J^H) for the FISTA reconstruction at data b:
// mean over k-space probes of |fista_jvp(trace, v)|^2, with the trace built
// once from b.
EstimatorRun pico_jacobian(const ReconSpec& spec, const KSpaceData& b,
                           ProbeFamily family, Index n,
                           std::uint64_t master_seed,
                           const std::vector<Index>& checkpoints = {});

// Pseudo multiple replica baseline: reconstruct b + sigma_k * eta for N
// i.i.d. CN(0, I) draws of eta, take the per-voxel total complex sample
// variance (1/(N-1)), and divide by sigma_k^2 so the map is per unit input
// noise. The reconstruction of b itself is subtracted before accumulating to
// keep the sums well conditioned at small sigma_k.
EstimatorRun pmr(const ReconSpec& spec, const KSpaceData& b, double sigma_k,
                 Index n, std::uint64_t master_seed,
                 const std::vector<Index>& checkpoints = {});

// Closed-form SENSE variance map for uniform Cartesian undersampling with
// identity noise and lambda = 0: per aliasing set of R voxels, the diagonal
// of R * (S^H S)^{-1} where S stacks the coil sensitivities of the set.
// Matches oracle_diag of the unnormalized lambda=0 operator.
VarianceMap analytical_sense(const CoilSensitivities& coils,
                             const SamplingPattern& pattern,
                             const std::optional<NoiseModel>& noise = {});

// Brute-force reference diagonal (image dim <= 1024). Linear mode:
// materialize the reconstruction matrix column-by-column by dense solves and
// take row norms. FISTA mode: materialize the real-linear Jacobian at b via
// fista_jvp over the k-space basis e_j and i*e_j; requires b.
VarianceMap oracle_diag(const ReconSpec& spec,
                        const std::optional<KSpaceData>& b = {});

// Elementwise square root of a variance map (standard-deviation map).
RVec sigma_map(const VarianceMap& map);

// Number of concurrent chunk workers used by the estimators: the value of
// the PICO_WORKERS environment variable when set to a positive integer,
// otherwise 1. Results are bitwise independent of this value.
Index worker_count();

// SplitMix64-style finalizer mapping (master seed, tag) to an independent
// derived seed. Used wherever one configured seed has to fan out into
// several decorrelated streams (data noise, per-level estimators, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace pico
