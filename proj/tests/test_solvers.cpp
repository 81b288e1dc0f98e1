#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pico/coils.hpp"
#include "pico/linalg.hpp"
#include "pico/operators.hpp"
#include "pico/phantom.hpp"
#include "pico/recon.hpp"
#include "pico/rng.hpp"
#include "pico/sampling.hpp"

using namespace pico;

namespace {

CVec random_cvec(Index n, std::uint64_t stream) {
  return draw_complex_gaussian(SeedSpec{7u, stream}, n);
}

// Small two-coil accelerated system used throughout: dense enough to oracle,
// regular enough for CG to converge tightly.
EncodingOperator small_system(double lambda_weight = 1.0) {
  (void)lambda_weight;
  const Shape shape{16, 16};
  const auto coils = synth_coils(shape, 2, 0.5);
  const auto pattern = make_pattern_cartesian(shape, 2, 4);
  return make_operator(coils, pattern);
}

CMat dense_normal(const EncodingOperator& op, double lambda) {
  const CMat a = materialize_dense(op);
  CMat m = a.adjoint() * a;
  m += lambda * CMat::Identity(m.rows(), m.cols());
  return m;
}

}  // namespace

TEST_CASE("cg on the identity converges in one iteration to the rhs") {
  const Index n = 12;
  const CMat rhs = random_cvec(n, 1);
  std::vector<CgStatus> statuses;
  const CMat x = cg_solve_batch_fn([](const CMat& p) { return p; }, rhs, 10,
                                   1e-12, &statuses);
  REQUIRE(statuses.size() == 1);
  CHECK(statuses[0].converged);
  CHECK(statuses[0].iters == 1);
  CHECK(!statuses[0].breakdown);
  CHECK((x - rhs).norm() == 0.0);
}

TEST_CASE("cg solves a hand-checked diagonal system") {
  CMat rhs(2, 1);
  rhs << Complex(2.0, 0.0), Complex(3.0, 0.0);
  const auto apply = [](const CMat& p) -> CMat {
    CMat out = p;
    out.row(0) *= 2.0;
    return out;
  };
  std::vector<CgStatus> statuses;
  const CMat x = cg_solve_batch_fn(apply, rhs, 10, 1e-14, &statuses);
  CHECK(std::abs(x(0, 0) - Complex(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(x(1, 0) - Complex(3.0, 0.0)) < 1e-12);
  CHECK(statuses[0].converged);
  CHECK(statuses[0].iters <= 2);
}

TEST_CASE("cg flags breakdown on an indefinite operator") {
  // diag(1, -1) with rhs along the negative direction: the very first
  // curvature <p, Ap> is negative.
  CMat rhs(2, 1);
  rhs << Complex(0.0, 0.0), Complex(1.0, 0.0);
  const auto apply = [](const CMat& p) -> CMat {
    CMat out = p;
    out.row(1) *= -1.0;
    return out;
  };
  std::vector<CgStatus> statuses;
  const CMat x = cg_solve_batch_fn(apply, rhs, 10, 1e-12, &statuses);
  CHECK(statuses[0].breakdown);
  CHECK(!statuses[0].converged);
  CHECK(x.norm() == 0.0);  // frozen before the first update
}

TEST_CASE("cg reports non-convergence when the budget runs out") {
  const auto op = small_system();
  const NormalOperator nop{op, 1e-6};
  CMat rhs = random_cvec(op.image_dim(), 2);
  std::vector<CgStatus> statuses;
  (void)cg_solve_batch(nop, rhs, 2, 1e-14, &statuses);
  CHECK(!statuses[0].converged);
  CHECK(statuses[0].iters == 2);
  CHECK(statuses[0].rel_residual > 1e-14);
}

TEST_CASE("batched cg matches a dense Cholesky solve") {
  const auto op = small_system();
  const double lambda = 0.1;
  const NormalOperator nop{op, lambda};
  const Index n = op.image_dim();

  CMat rhs(n, 3);
  for (Index j = 0; j < 3; ++j) rhs.col(j) = random_cvec(n, 10 + j);

  std::vector<CgStatus> statuses;
  const CMat x = cg_solve_batch(nop, rhs, 500, 1e-12, &statuses);
  for (const auto& st : statuses) {
    CHECK(st.converged);
    CHECK(!st.breakdown);
  }

  const CMat l = cholesky(dense_normal(op, lambda));
  const CMat x_ref = cholesky_solve(l, rhs);
  CHECK((x - x_ref).norm() / x_ref.norm() < 1e-8);
}

TEST_CASE("cg error decreases monotonically in the operator norm") {
  const auto op = small_system();
  const double lambda = 0.05;
  const NormalOperator nop{op, lambda};
  const Index n = op.image_dim();
  const CMat rhs_v = random_cvec(n, 20);

  const CMat m = dense_normal(op, lambda);
  const CMat x_star = cholesky_solve(cholesky(m), rhs_v);

  std::vector<double> a_norm_err;
  const auto observer = [&](Index, const CMat& x) {
    const CMat e = x - x_star;
    a_norm_err.push_back(std::sqrt((e.adjoint() * m * e)(0, 0).real()));
  };
  (void)cg_solve_batch_fn(
      [&](const CMat& p) { return apply_normal_batch(nop, p); }, rhs_v, 40,
      1e-12, nullptr, observer);

  REQUIRE(a_norm_err.size() >= 10);
  for (std::size_t i = 1; i < a_norm_err.size(); ++i)
    CHECK(a_norm_err[i] <= a_norm_err[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("linear reconstruction inverts a fully sampled single-coil system") {
  const Shape shape{16, 16};
  const auto coils = synth_coils(shape, 1, std::numeric_limits<double>::infinity());
  const auto pattern = make_pattern_cartesian(shape, 1, 0);
  const auto op = make_operator(coils, pattern);
  const auto spec = ReconSpec::linear(op, 0.0, 100, 1e-12);

  const CVec x_true = shepp_logan(shape.rows, shape.cols).data;
  const KSpaceData b(forward_batch(op, x_true).col(0), op.n_samples,
                     op.n_coils);

  CgStatus status;
  OpCount count;
  const auto x = reconstruct_linear(spec, b, &status, &count);
  CHECK(status.converged);
  CHECK((x.data - x_true).norm() / x_true.norm() < 1e-8);
  // adjoint (1) + two applications per CG iteration
  CHECK(count.singles == 1 + 2 * status.iters);
}

TEST_CASE("linear reconstruction maps zero data to the zero image") {
  const auto op = small_system();
  const auto spec = ReconSpec::linear(op, 0.01);
  const auto b = KSpaceData::zero(op.n_samples, op.n_coils);
  const auto x = reconstruct_linear(spec, b);
  CHECK(x.data.norm() == 0.0);
}

TEST_CASE("linear reconstruction is linear in the data") {
  const auto op = small_system();
  const auto spec = ReconSpec::linear(op, 0.1, 400, 1e-12);
  const Index m = op.kspace_dim();

  const KSpaceData b1(draw_complex_gaussian(SeedSpec{11u, 1}, m),
                      op.n_samples, op.n_coils);
  const KSpaceData b2(draw_complex_gaussian(SeedSpec{11u, 2}, m),
                      op.n_samples, op.n_coils);
  const Complex alpha(0.7, -0.4);
  const KSpaceData b12(b1.data + alpha * b2.data, op.n_samples, op.n_coils);

  const auto x1 = reconstruct_linear(spec, b1);
  const auto x2 = reconstruct_linear(spec, b2);
  const auto x12 = reconstruct_linear(spec, b12);
  const double err =
      (x12.data - (x1.data + alpha * x2.data)).norm() / x12.data.norm();
  CHECK(err < 1e-9);
}

TEST_CASE("reconstruction adjoint is consistent with the reconstruction") {
  const auto op = small_system();
  const auto spec = ReconSpec::linear(op, 0.1, 400, 1e-13);

  const KSpaceData b(draw_complex_gaussian(SeedSpec{13u, 1}, op.kspace_dim()),
                     op.n_samples, op.n_coils);
  ComplexImage v(draw_complex_gaussian(SeedSpec{13u, 2}, op.image_dim()),
                 op.shape);

  const auto rb = reconstruct_linear(spec, b);
  const auto rhv = apply_R_adjoint(spec, v);
  const Complex lhs = v.data.dot(rb.data);   // <v, R b>
  const Complex rhs = rhv.data.dot(b.data);  // <R^H v, b>
  CHECK(std::abs(lhs - rhs) < 1e-9 * std::abs(lhs));
}

TEST_CASE("covariance application is the identity for a unitary encoding") {
  const Shape shape{8, 8};
  const auto coils = synth_coils(shape, 1, std::numeric_limits<double>::infinity());
  const auto pattern = make_pattern_cartesian(shape, 1, 0);
  const auto op = make_operator(coils, pattern);
  const auto spec = ReconSpec::linear(op, 0.0, 200, 1e-13);

  ComplexImage v(draw_complex_gaussian(SeedSpec{17u, 1}, op.image_dim()),
                 op.shape);
  const auto sv = apply_covariance(spec, v);
  CHECK((sv.data - v.data).norm() / v.data.norm() < 1e-10);
}

TEST_CASE("covariance application matches the dense covariance matrix") {
  const auto op = small_system();
  const double lambda = 0.1;
  const auto spec = ReconSpec::linear(op, lambda, 500, 1e-12);
  const Index n = op.image_dim();

  // Sigma = (M + lambda I)^{-1} A^H A (M + lambda I)^{-1}
  const CMat a = materialize_dense(op);
  const CMat l = cholesky(dense_normal(op, lambda));
  const CMat r_dense = cholesky_solve(l, CMat(a.adjoint()));
  const CMat sigma = r_dense * r_dense.adjoint();

  CMat v(n, 2);
  v.col(0) = random_cvec(n, 31);
  v.col(1) = random_cvec(n, 32);
  OpCount count;
  const CMat sv = apply_covariance_batch(spec, v, &count);
  CHECK((sv - sigma * v).norm() / (sigma * v).norm() < 1e-6);
  CHECK(count.singles > 0);
}

TEST_CASE("covariance application is Hermitian positive semidefinite") {
  const auto op = small_system();
  const auto spec = ReconSpec::linear(op, 0.05, 500, 1e-12);
  const Index n = op.image_dim();

  const CVec v = random_cvec(n, 41);
  const CVec w = random_cvec(n, 42);
  const auto sv = apply_covariance(spec, {v, op.shape});
  const auto sw = apply_covariance(spec, {w, op.shape});

  const Complex vsw = v.dot(sw.data);
  const Complex swv = sv.data.dot(w);  // <Sigma v, w> = <v, Sigma w> if Hermitian
  CHECK(std::abs(vsw - swv) < 1e-6 * std::abs(vsw));

  const Complex quad = v.dot(sv.data);
  CHECK(quad.real() > 0.0);
  CHECK(std::abs(quad.imag()) < 1e-8 * quad.real());
}

TEST_CASE("covariance application rejects a nonlinear reconstruction spec") {
  const auto op = small_system();
  const auto spec = ReconSpec::fista_tv(op, 1e-3, 10);
  ComplexImage v(CVec::Ones(op.image_dim()), op.shape);
  CHECK_THROWS_AS((void)apply_covariance(spec, v), NonLinearSpec);
}

TEST_CASE("reconstruction spec factories validate their arguments") {
  const auto op = small_system();
  CHECK_THROWS_AS((void)ReconSpec::linear(op, -1.0), Error);
  CHECK_THROWS_AS((void)ReconSpec::linear(op, 0.0, 0), Error);
  CHECK_THROWS_AS((void)ReconSpec::fista_tv(op, -1e-3), Error);
  CHECK_THROWS_AS((void)ReconSpec::fista_tv(op, 1e-3, 0), Error);
  CHECK_THROWS_AS((void)ReconSpec::fista_tv(op, 1e-3, 10, 0.0), Error);
}
