#pragma once

#include "pico/recon.hpp"
#include "pico/tv.hpp"
#include "pico/types.hpp"

namespace pico {

// Everything needed to replay the FISTA iteration and to propagate tangents
// through its almost-everywhere derivative: the pre-prox point of every
// iteration, the momentum weights, the candidate accept/reject decisions of
// the monotone safeguard, and the prox geometry.
struct FistaTrace {
  CMat z;              // image_dim x iters: z_k = y_k - step*grad(y_k)
  RVec momentum_cand;  // iters entries: t_k / t_{k+1}
  RVec momentum_diff;  // iters entries: (t_k - 1) / t_{k+1}
  BoolVec accepted;    // iters entries: candidate beat the previous iterate
  CVec x_hat;          // final kept iterate
  RVec objectives;     // per-iteration objective when recorded, else empty
  double gamma = 0.0;  // dual radius = step * lambda_tv
  double dual_step = 0.125;
  Index inner_iters = 0;
  Shape shape;
};

struct FistaResult {
  ComplexImage x;
  FistaTrace trace;
};

// Monotone FISTA on 0.5*|A x - b|^2 + lambda_tv*|grad x|_1 (anisotropic TV,
// periodic boundary). The TV prox is a fixed-iteration dual projection loop
// whose dual variable is warm-started across outer iterations; a candidate
// step is kept only if it does not increase the objective, which makes the
// objective non-increasing by construction while momentum still follows the
// candidate. Deterministic: the returned trace replays to x bitwise.
FistaResult fista_tv(const ReconSpec& spec, const KSpaceData& b,
                     bool record_objective = false, OpCount* count = nullptr);

// Recompute the final iterate from the recorded trace by replaying every
// prox through the warm-started dual chain and the recorded accept/reject
// decisions. Bitwise equal to the trace's x_hat.
ComplexImage fista_replay(const FistaTrace& trace, const ReconSpec& spec);

// Propagate k-space tangents through the recorded iteration using the frozen
// almost-everywhere derivative of every prox step and the recorded
// accept/reject selections: J_f(b) * tangent.
ComplexImage fista_jvp(const FistaTrace& trace, const ReconSpec& spec,
                       const KSpaceData& tangent, OpCount* count = nullptr);
CMat fista_jvp_batch(const FistaTrace& trace, const ReconSpec& spec,
                     const CMat& tangents, OpCount* count = nullptr);

}  // namespace pico
