#pragma once

#include "pico/operators.hpp"
#include "pico/types.hpp"

#include <functional>
#include <vector>

namespace pico {

enum class ReconKind { Linear, FistaTv };

// Everything that defines the reconstruction map: the encoding operator plus
// exactly one regularization mode with its solver budget.
struct ReconSpec {
  EncodingOperator op;
  ReconKind kind = ReconKind::Linear;

  // Linear mode: Tikhonov-regularized normal equations solved by CG.
  double lambda = 0.0;
  Index cg_max_iters = 100;
  double cg_tol = 1e-10;

  // Nonlinear mode: FISTA with anisotropic total variation.
  double lambda_tv = 0.0;
  Index fista_iters = 100;
  double fista_step = 0.99;
  Index tv_inner_iters = 20;

  bool is_linear() const { return kind == ReconKind::Linear; }

  static ReconSpec linear(EncodingOperator op, double lambda,
                          Index max_iters = 100, double tol = 1e-10);
  static ReconSpec fista_tv(EncodingOperator op, double lambda_tv,
                            Index iters = 100, double step = 0.99,
                            Index inner_iters = 20);
};

struct CgStatus {
  Index iters = 0;
  double rel_residual = 0.0;
  bool breakdown = false;
  bool converged = false;
};

// Running count of single operator applications (one forward or one adjoint,
// per batch column). A forward+adjoint pair is two singles.
struct OpCount {
  std::int64_t singles = 0;
};

using ApplyBatchFn = std::function<CMat(const CMat&)>;
using CgObserver = std::function<void(Index iter, const CMat& x)>;

// Conjugate gradients on a Hermitian PSD system, batched over columns with
// zero initial guess. Columns converge (relative recurrence residual <= tol)
// or break down independently and are frozen; the operator is applied only to
// the still-active columns. Budget exhaustion returns the current iterate
// with converged = false.
CMat cg_solve_batch_fn(const ApplyBatchFn& apply, const CMat& rhs,
                       Index max_iters, double tol,
                       std::vector<CgStatus>* statuses = nullptr,
                       const CgObserver& observer = {});

CMat cg_solve_batch(const NormalOperator& nop, const CMat& rhs, Index max_iters,
                    double tol, std::vector<CgStatus>* statuses = nullptr);

ComplexImage cg_solve(const NormalOperator& nop, const ComplexImage& rhs,
                      Index max_iters, double tol, CgStatus* status = nullptr);

// R_lambda b = cg(M + lambda I, A^H b): CG-SENSE / Tikhonov reconstruction.
ComplexImage reconstruct_linear(const ReconSpec& spec, const KSpaceData& b,
                                CgStatus* status = nullptr,
                                OpCount* count = nullptr);
CMat reconstruct_linear_batch(const ReconSpec& spec, const CMat& b,
                              OpCount* count = nullptr);

// R^H v = A cg(M + lambda I, v): adjoint of the linear reconstruction.
KSpaceData apply_R_adjoint(const ReconSpec& spec, const ComplexImage& v,
                           OpCount* count = nullptr);

// Sigma v = R (R^H v): two CG solves around one forward+adjoint pair.
ComplexImage apply_covariance(const ReconSpec& spec, const ComplexImage& v,
                              OpCount* count = nullptr);
CMat apply_covariance_batch(const ReconSpec& spec, const CMat& v,
                            OpCount* count = nullptr);

}  // namespace pico
