#include "pico/fista.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace pico {

namespace {

CVec project_ball(const CVec& w, double gamma) {
  CVec q(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    const double r = std::abs(w[i]);
    q[i] = r > gamma ? w[i] * (gamma / r) : w[i];
  }
  return q;
}

// Dual projection loop for the anisotropic-TV prox. The dual variable q is
// threaded across outer iterations (warm start), so the prox becomes exact as
// the outer iterates settle. Optionally records the pre-projection dual
// points, which carry all the branch information the tangent recursion needs.
CVec prox_tv(const TvOps& tv, const CVec& z, double gamma, Index inner,
             double dual_step, CVec& q, std::vector<CVec>* w_record = nullptr) {
  if (gamma == 0.0) return z;
  for (Index j = 0; j < inner; ++j) {
    const CVec w = q + dual_step * tv.grad(z - tv.div_adj(q));
    if (w_record) w_record->push_back(w);
    q = project_ball(w, gamma);
  }
  return z - tv.div_adj(q);
}

void check_spec(const ReconSpec& spec) {
  if (spec.kind != ReconKind::FistaTv)
    throw NonLinearSpec("operation requires the FISTA/TV reconstruction mode");
}

void check_trace(const FistaTrace& trace, const ReconSpec& spec) {
  check_spec(spec);
  if (!(trace.shape == spec.op.shape) || trace.z.rows() != spec.op.image_dim() ||
      trace.z.cols() != spec.fista_iters ||
      trace.momentum_cand.size() != spec.fista_iters ||
      trace.momentum_diff.size() != spec.fista_iters ||
      trace.accepted.size() != spec.fista_iters ||
      trace.inner_iters != spec.tv_inner_iters ||
      trace.gamma != spec.fista_step * spec.lambda_tv)
    throw TraceMismatch("trace was not produced by this reconstruction spec");
}

}  // namespace

FistaResult fista_tv(const ReconSpec& spec, const KSpaceData& b,
                     bool record_objective, OpCount* count) {
  check_spec(spec);
  if (b.n_samples != spec.op.n_samples || b.n_coils != spec.op.n_coils)
    throw ShapeMismatch("k-space data does not match operator");

  const TvOps tv(spec.op.shape);
  const Index n = spec.op.image_dim();
  const double step = spec.fista_step;
  const double gamma = step * spec.lambda_tv;
  const NormalOperator nop{spec.op, 0.0};

  const CVec ahb = adjoint_batch(spec.op, b.data).col(0);
  if (count) count->singles += 1;

  FistaTrace trace;
  trace.z.resize(n, spec.fista_iters);
  trace.momentum_cand.resize(spec.fista_iters);
  trace.momentum_diff.resize(spec.fista_iters);
  trace.accepted.resize(spec.fista_iters);
  if (record_objective) trace.objectives.resize(spec.fista_iters);
  trace.gamma = gamma;
  trace.dual_step = 0.125;
  trace.inner_iters = spec.tv_inner_iters;
  trace.shape = spec.op.shape;

  CVec x = CVec::Zero(n);          // best kept iterate
  double fx = 0.5 * b.data.squaredNorm();  // objective at the zero image
  CVec y = CVec::Zero(n);
  CVec q = CVec::Zero(2 * n);
  double t = 1.0;
  for (Index k = 0; k < spec.fista_iters; ++k) {
    const CVec my = apply_normal_batch(nop, y).col(0);
    if (count) count->singles += 2;
    const CVec z = y - step * my + step * ahb;
    trace.z.col(k) = z;

    const CVec cand = prox_tv(tv, z, gamma, spec.tv_inner_iters,
                              trace.dual_step, q);
    const CVec resid = forward_batch(spec.op, cand).col(0) - b.data;
    if (count) count->singles += 1;
    const double f_cand =
        0.5 * resid.squaredNorm() + spec.lambda_tv * tv.tv_value(cand);

    const double t_new = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    const double c_cand = t / t_new;
    const double c_diff = (t - 1.0) / t_new;
    trace.momentum_cand(k) = c_cand;
    trace.momentum_diff(k) = c_diff;

    const bool accept = f_cand <= fx;
    trace.accepted(k) = accept;
    const CVec x_new = accept ? cand : x;
    y = x_new + c_cand * (cand - x_new) + c_diff * (x_new - x);
    x = x_new;
    if (accept) fx = f_cand;
    t = t_new;

    if (record_objective) trace.objectives(k) = fx;
  }
  trace.x_hat = x;
  return {{x, spec.op.shape}, std::move(trace)};
}

ComplexImage fista_replay(const FistaTrace& trace, const ReconSpec& spec) {
  check_trace(trace, spec);
  const TvOps tv(spec.op.shape);
  const Index n = spec.op.image_dim();
  // Replay the whole warm-started dual chain over the recorded gradient
  // points, keeping candidates exactly where the original run kept them.
  CVec q = CVec::Zero(2 * n);
  CVec x = CVec::Zero(n);
  for (Index k = 0; k < trace.z.cols(); ++k) {
    const CVec cand = prox_tv(tv, trace.z.col(k), trace.gamma,
                              trace.inner_iters, trace.dual_step, q);
    if (trace.accepted(k)) x = cand;
  }
  return {x, trace.shape};
}

CMat fista_jvp_batch(const FistaTrace& trace, const ReconSpec& spec,
                     const CMat& tangents, OpCount* count) {
  check_trace(trace, spec);
  if (tangents.rows() != spec.op.kspace_dim())
    throw ShapeMismatch("tangent rows do not match operator sampling");

  const TvOps tv(spec.op.shape);
  const Index n = spec.op.image_dim();
  const Index batch = tangents.cols();
  const double step = spec.fista_step;
  const double gamma = trace.gamma;
  const NormalOperator nop{spec.op, 0.0};

  const CMat g0 = step * adjoint_batch(spec.op, tangents);
  if (count) count->singles += batch;

  CMat dx = CMat::Zero(n, batch);
  CMat dy = CMat::Zero(n, batch);
  CVec q_fwd = CVec::Zero(2 * n);       // warm-started primal-run dual
  CMat dqt = CMat::Zero(batch, 2 * n);  // its tangent, threaded identically
  std::vector<CVec> w_steps;
  for (Index k = 0; k < spec.fista_iters; ++k) {
    CMat dz;
    if (k == 0) {
      dz = g0;  // dy is still zero
    } else {
      const CMat mdy = apply_normal_batch(nop, dy);
      if (count) count->singles += 2 * batch;
      dz = dy - step * mdy + g0;
    }

    CMat dcand;
    if (gamma == 0.0) {
      dcand = std::move(dz);
    } else {
      // Recompute the dual trajectory of this prox once per step, then run
      // the linearized dual iteration for the whole tangent batch in a
      // transposed layout so per-component work is contiguous.
      w_steps.clear();
      (void)prox_tv(tv, trace.z.col(k), gamma, trace.inner_iters,
                    trace.dual_step, q_fwd, &w_steps);

      const CMat dzt = dz.transpose();
      for (Index j = 0; j < trace.inner_iters; ++j) {
        const CMat dwt =
            dqt + trace.dual_step * tv.grad_t(dzt - tv.div_adj_t(dqt));
        const CVec& w = w_steps[static_cast<std::size_t>(j)];
        for (Index i = 0; i < 2 * n; ++i) {
          const double r = std::abs(w[i]);
          if (r > gamma) {
            // Derivative of the radial projection w -> gamma*w/|w|: scale the
            // tangent and remove its radial component.
            const Complex wi = w[i];
            const Eigen::ArrayXd radial =
                (dwt.col(i).array() * std::conj(wi)).real();
            dqt.col(i) = (gamma / r) *
                         (dwt.col(i).array() -
                          (wi / (r * r)) * radial.cast<Complex>())
                             .matrix();
          } else {
            dqt.col(i) = dwt.col(i);
          }
        }
      }
      dcand = (dzt - tv.div_adj_t(dqt)).transpose();
    }

    // Mirror the monotone safeguard with the recorded selection.
    const double c_cand = trace.momentum_cand(k);
    const double c_diff = trace.momentum_diff(k);
    const CMat dx_new = trace.accepted(k) ? dcand : dx;
    dy = dx_new + c_cand * (dcand - dx_new) + c_diff * (dx_new - dx);
    dx = dx_new;
  }
  return dx;
}

ComplexImage fista_jvp(const FistaTrace& trace, const ReconSpec& spec,
                       const KSpaceData& tangent, OpCount* count) {
  if (tangent.n_samples != spec.op.n_samples || tangent.n_coils != spec.op.n_coils)
    throw ShapeMismatch("tangent does not match operator");
  const CMat u = fista_jvp_batch(trace, spec, tangent.data, count);
  return {u.col(0), spec.op.shape};
}

}  // namespace pico
