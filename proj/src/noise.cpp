#include "pico/noise.hpp"

#include <cmath>

namespace pico {

NoiseModel::NoiseModel(HermitianMatrix cov, double sigma)
    : covariance(std::move(cov)), kspace_sigma(sigma) {
  if (!(std::isfinite(kspace_sigma) && kspace_sigma > 0.0))
    throw ShapeMismatch("kspace_sigma must be finite and positive");
  (void)cholesky(covariance);  // validates positive-definiteness eagerly
}

KSpaceData prewhiten(const KSpaceData& data, const NoiseModel& model) {
  if (model.covariance.dim() != data.n_coils)
    throw ShapeMismatch("noise covariance dimension does not match coil count");
  const CMat l = cholesky(model.covariance);
  CMat coils_by_samples = data.as_matrix().transpose();
  l.triangularView<Eigen::Lower>().solveInPlace(coils_by_samples);
  KSpaceData out = KSpaceData::zero(data.n_samples, data.n_coils);
  out.as_matrix() = coils_by_samples.transpose();
  return out;
}

}  // namespace pico
