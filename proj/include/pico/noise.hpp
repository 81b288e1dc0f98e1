#pragma once

#include "pico/linalg.hpp"
#include "pico/types.hpp"

namespace pico {

// Acquisition noise description: per-sample inter-coil covariance plus the
// scalar k-space noise level used for replica injection.
struct NoiseModel {
  HermitianMatrix covariance;
  double kspace_sigma = 0.0;

  NoiseModel(HermitianMatrix cov, double sigma);
};

// Apply L^{-1} (Cholesky factor of the inter-coil covariance) to every
// k-space sample across the coil dimension, so residual noise drawn from the
// model has identity covariance.
KSpaceData prewhiten(const KSpaceData& data, const NoiseModel& model);

}  // namespace pico
