#include "pico/recon.hpp"

#include <cmath>

namespace pico {

ReconSpec ReconSpec::linear(EncodingOperator op, double lambda, Index max_iters,
                            double tol) {
  if (lambda < 0.0) throw ShapeMismatch("lambda must be >= 0");
  if (max_iters < 1 || !(tol > 0.0))
    throw ShapeMismatch("CG budget requires max_iters >= 1 and tol > 0");
  ReconSpec s;
  s.op = std::move(op);
  s.kind = ReconKind::Linear;
  s.lambda = lambda;
  s.cg_max_iters = max_iters;
  s.cg_tol = tol;
  return s;
}

ReconSpec ReconSpec::fista_tv(EncodingOperator op, double lambda_tv, Index iters,
                              double step, Index inner_iters) {
  if (lambda_tv < 0.0) throw ShapeMismatch("lambda_tv must be >= 0");
  if (iters < 1 || !(step > 0.0) || inner_iters < 1)
    throw ShapeMismatch("FISTA budget requires iters >= 1, step > 0, inner_iters >= 1");
  ReconSpec s;
  s.op = std::move(op);
  s.kind = ReconKind::FistaTv;
  s.lambda_tv = lambda_tv;
  s.fista_iters = iters;
  s.fista_step = step;
  s.tv_inner_iters = inner_iters;
  return s;
}

CMat cg_solve_batch_fn(const ApplyBatchFn& apply, const CMat& rhs,
                       Index max_iters, double tol,
                       std::vector<CgStatus>* statuses,
                       const CgObserver& observer) {
  const Index n = rhs.rows();
  const Index batch = rhs.cols();
  CMat x = CMat::Zero(n, batch);
  CMat r = rhs;
  CMat p = rhs;
  RVec rz(batch), rhs_norm(batch);
  std::vector<CgStatus> status(static_cast<std::size_t>(batch));
  std::vector<Index> active;
  for (Index b = 0; b < batch; ++b) {
    rz(b) = r.col(b).squaredNorm();
    rhs_norm(b) = std::sqrt(rz(b));
    if (rhs_norm(b) == 0.0) {
      status[static_cast<std::size_t>(b)].converged = true;  // zero rhs: x = 0
    } else {
      active.push_back(b);
    }
  }

  for (Index it = 1; it <= max_iters && !active.empty(); ++it) {
    CMat pa(n, static_cast<Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) pa.col(static_cast<Index>(i)) = p.col(active[i]);
    const CMat ap = apply(pa);

    std::vector<Index> still_active;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const Index b = active[i];
      const Index col = static_cast<Index>(i);
      CgStatus& st = status[static_cast<std::size_t>(b)];
      const double denom = pa.col(col).dot(ap.col(col)).real();
      if (denom <= 0.0) {
        // Curvature lost to round-off on a PSD system: stop with the current
        // iterate rather than divide by a non-positive quantity.
        st.breakdown = true;
        st.rel_residual = std::sqrt(rz(b)) / rhs_norm(b);
        continue;
      }
      const double alpha = rz(b) / denom;
      x.col(b) += alpha * pa.col(col);
      r.col(b) -= alpha * ap.col(col);
      const double rz_new = r.col(b).squaredNorm();
      st.iters = it;
      st.rel_residual = std::sqrt(rz_new) / rhs_norm(b);
      if (st.rel_residual <= tol) {
        st.converged = true;
        continue;
      }
      const double beta = rz_new / rz(b);
      p.col(b) = r.col(b) + beta * pa.col(col);
      rz(b) = rz_new;
      still_active.push_back(b);
    }
    if (observer) observer(it, x);
    active.swap(still_active);
  }

  if (statuses) *statuses = std::move(status);
  return x;
}

CMat cg_solve_batch(const NormalOperator& nop, const CMat& rhs, Index max_iters,
                    double tol, std::vector<CgStatus>* statuses) {
  return cg_solve_batch_fn(
      [&nop](const CMat& v) { return apply_normal_batch(nop, v); }, rhs,
      max_iters, tol, statuses);
}

ComplexImage cg_solve(const NormalOperator& nop, const ComplexImage& rhs,
                      Index max_iters, double tol, CgStatus* status) {
  std::vector<CgStatus> statuses;
  const CMat x = cg_solve_batch(nop, rhs.data, max_iters, tol, &statuses);
  if (status) *status = statuses.front();
  return {x.col(0), rhs.shape};
}

namespace {

// One CG solve against the spec's normal system, with op-count bookkeeping:
// each iteration applies the normal operator once (two singles per active
// column).
CMat solve_normal(const ReconSpec& spec, const CMat& rhs, OpCount* count,
                  std::vector<CgStatus>* statuses = nullptr) {
  const NormalOperator nop{spec.op, spec.lambda};
  std::vector<CgStatus> local;
  const CMat x = cg_solve_batch(nop, rhs, spec.cg_max_iters, spec.cg_tol, &local);
  if (count)
    for (const CgStatus& st : local) count->singles += 2 * st.iters;
  if (statuses) *statuses = std::move(local);
  return x;
}

void require_linear(const ReconSpec& spec) {
  if (!spec.is_linear())
    throw NonLinearSpec("operation requires the linear reconstruction mode");
}

}  // namespace

CMat reconstruct_linear_batch(const ReconSpec& spec, const CMat& b,
                              OpCount* count) {
  require_linear(spec);
  const CMat rhs = adjoint_batch(spec.op, b);
  if (count) count->singles += b.cols();
  return solve_normal(spec, rhs, count);
}

ComplexImage reconstruct_linear(const ReconSpec& spec, const KSpaceData& b,
                                CgStatus* status, OpCount* count) {
  require_linear(spec);
  const CMat rhs = adjoint_batch(spec.op, b.data);
  if (count) count->singles += 1;
  std::vector<CgStatus> statuses;
  const CMat x = solve_normal(spec, rhs, count, &statuses);
  if (status) *status = statuses.front();
  return {x.col(0), spec.op.shape};
}

KSpaceData apply_R_adjoint(const ReconSpec& spec, const ComplexImage& v,
                           OpCount* count) {
  require_linear(spec);
  const CMat y = forward_batch(spec.op, solve_normal(spec, v.data, count));
  if (count) count->singles += 1;
  return {y.col(0), spec.op.n_samples, spec.op.n_coils};
}

CMat apply_covariance_batch(const ReconSpec& spec, const CMat& v,
                            OpCount* count) {
  require_linear(spec);
  const CMat t = solve_normal(spec, v, count);
  const CMat aha = adjoint_batch(spec.op, forward_batch(spec.op, t));
  if (count) count->singles += 2 * v.cols();
  return solve_normal(spec, aha, count);
}

ComplexImage apply_covariance(const ReconSpec& spec, const ComplexImage& v,
                              OpCount* count) {
  return {apply_covariance_batch(spec, v.data, count).col(0), v.shape};
}

}  // namespace pico
