#include "pico/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "pico/linalg.hpp"
#include "pico/operators.hpp"

namespace pico {

namespace {

// Fixed global probe grid: probe indices are tiled into chunks of 64
// regardless of checkpoint placement or worker count, so every batched
// evaluation sees an identical column set and the results merge bitwise
// identically for any execution order.
constexpr Index kChunk = 64;

struct ChunkSums {
  CVec s;
  RVec s2;
  std::int64_t singles = 0;
};

ChunkSums merge(const ChunkSums& a, const ChunkSums& b) {
  ChunkSums out;
  out.s = a.s.size() ? CVec(a.s + b.s) : CVec();
  out.s2 = a.s2.size() ? RVec(a.s2 + b.s2) : RVec();
  out.singles = a.singles + b.singles;
  return out;
}

Index env_worker_count() {
  const char* raw = std::getenv("PICO_WORKERS");
  if (!raw) return 1;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1) return 1;
  return std::min<long>(v, 256);
}

// Run `work(i)` for i in [0, n_items) on the configured worker pool. The
// items must be independent; the first exception wins and is rethrown.
void run_items(Index n_items, const std::function<void(Index)>& work) {
  const Index workers = std::min<Index>(worker_count(), n_items);
  if (workers <= 1) {
    for (Index i = 0; i < n_items; ++i) work(i);
    return;
  }
  std::atomic<Index> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= n_items) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<Index> validated_counts(Index n, const std::vector<Index>& checkpoints) {
  if (n < 1) throw Error("sample count must be at least 1");
  Index prev = 0;
  for (const Index c : checkpoints) {
    if (c <= prev) throw Error("checkpoints must be strictly increasing");
    if (c > n) throw Error("checkpoint exceeds the total sample count");
    prev = c;
  }
  std::vector<Index> counts = checkpoints;
  if (counts.empty() || counts.back() != n) counts.push_back(n);
  return counts;
}

// Evaluate all needed chunk sums (full grid chunks plus one standalone
// partial prefix chunk per non-aligned count) in parallel, then assemble a
// result per requested count with an ascending binary-counter pairwise merge.
// A fresh run at count c performs the identical decomposition, so every
// assembled result is bitwise independent of the checkpoint list, the worker
// count, and the total N of the run it was embedded in.
std::vector<ChunkSums> run_chunked(
    Index n, const std::vector<Index>& counts,
    const std::function<ChunkSums(Index, Index)>& eval) {
  struct Item {
    Index begin = 0, end = 0;
  };
  std::vector<Item> items;
  const Index full_chunks = n / kChunk;
  for (Index g = 0; g < full_chunks; ++g)
    items.push_back({g * kChunk, (g + 1) * kChunk});
  std::vector<std::size_t> partial_item(counts.size(), SIZE_MAX);
  for (std::size_t ci = 0; ci < counts.size(); ++ci) {
    const Index c = counts[ci];
    if (c % kChunk != 0) {
      partial_item[ci] = items.size();
      items.push_back({c - c % kChunk, c});
    }
  }

  std::vector<ChunkSums> results(items.size());
  run_items(static_cast<Index>(items.size()), [&](Index i) {
    results[static_cast<std::size_t>(i)] =
        eval(items[static_cast<std::size_t>(i)].begin,
             items[static_cast<std::size_t>(i)].end);
  });

  // Binary-counter merge: level l holds the sum of 2^l consecutive chunks.
  std::vector<std::optional<ChunkSums>> levels;
  auto push_chunk = [&](ChunkSums sums) {
    for (std::size_t l = 0;; ++l) {
      if (l == levels.size()) levels.emplace_back();
      if (!levels[l]) {
        levels[l] = std::move(sums);
        return;
      }
      sums = merge(*levels[l], sums);
      levels[l].reset();
    }
  };
  auto fold = [&]() {
    std::optional<ChunkSums> total;
    for (std::size_t l = levels.size(); l-- > 0;) {
      if (!levels[l]) continue;
      total = total ? merge(*total, *levels[l]) : *levels[l];
    }
    return total;
  };

  std::vector<ChunkSums> out(counts.size());
  Index pushed = 0;
  for (std::size_t ci = 0; ci < counts.size(); ++ci) {
    const Index c = counts[ci];
    while (pushed < c / kChunk)
      push_chunk(results[static_cast<std::size_t>(pushed++)]);
    std::optional<ChunkSums> total = fold();
    if (partial_item[ci] != SIZE_MAX) {
      const ChunkSums& partial = results[partial_item[ci]];
      total = total ? merge(*total, partial) : partial;
    }
    out[ci] = std::move(*total);
  }
  return out;
}

VarianceMap finish_map(RVec raw, EstimatorMethod method, ProbeFamily family,
                       Index n_samples, std::uint64_t master_seed,
                       std::int64_t singles, const ReconSpec& spec) {
  VarianceMap map;
  map.method = method;
  map.family = family;
  map.n_samples = n_samples;
  map.seed = SeedSpec{master_seed, 0};
  map.operator_applications = singles;
  map.norm_scale = spec.op.norm_scale;
  map.shape = spec.op.shape;
  for (Index i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0.0) {
      ++map.clamped_voxels;
      map.worst_negative = std::min(map.worst_negative, raw[i]);
      raw[i] = 0.0;
    }
  }
  map.values = std::move(raw);
  return map;
}

}  // namespace

const char* estimator_method_name(EstimatorMethod method) {
  switch (method) {
    case EstimatorMethod::Pico: return "pico";
    case EstimatorMethod::Pmr: return "pmr";
    case EstimatorMethod::AnalyticalSense: return "analytical-sense";
    case EstimatorMethod::Oracle: return "oracle";
  }
  return "unknown";
}

Index worker_count() { return env_worker_count(); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

EstimatorRun pico_linear(const ReconSpec& spec, ProbeFamily family, Index n,
                         std::uint64_t master_seed,
                         const std::vector<Index>& checkpoints) {
  if (!spec.is_linear())
    throw NonLinearSpec("direct covariance probing requires a linear spec");
  const std::vector<Index> counts = validated_counts(n, checkpoints);
  const Index dim = spec.op.image_dim();

  auto eval = [&](Index begin, Index end) {
    const Index width = end - begin;
    CMat v(dim, width);
    for (Index j = 0; j < width; ++j)
      v.col(j) = draw_probe_vec(
          family, SeedSpec{master_seed, static_cast<std::uint64_t>(begin + j)},
          dim);
    OpCount cnt;
    const CMat sv = apply_covariance_batch(spec, v, &cnt);
    ChunkSums sums;
    sums.s = CVec::Zero(dim);
    for (Index j = 0; j < width; ++j)
      sums.s += v.col(j).conjugate().cwiseProduct(sv.col(j));
    sums.singles = cnt.singles;
    return sums;
  };

  const std::vector<ChunkSums> totals = run_chunked(n, counts, eval);
  EstimatorRun run;
  for (std::size_t ci = 0; ci < counts.size(); ++ci) {
    const Index c = counts[ci];
    VarianceMap map = finish_map(
        RVec(totals[ci].s.real() / static_cast<double>(c)),
        EstimatorMethod::Pico, family, c, master_seed, totals[ci].singles, spec);
    if (ci + 1 == counts.size()) {
      run.s = totals[ci].s;
      run.final = map;
      if (!checkpoints.empty() && checkpoints.back() == c)
        run.snapshots.push_back(std::move(map));
    } else {
      run.snapshots.push_back(std::move(map));
    }
  }
  run.probes = n;
  return run;
}

EstimatorRun pico_jacobian(const ReconSpec& spec, const KSpaceData& b,
                           ProbeFamily family, Index n,
                           std::uint64_t master_seed,
                           const std::vector<Index>& checkpoints) {
  const std::vector<Index> counts = validated_counts(n, checkpoints);
  OpCount base_cnt;
  const FistaResult base = fista_tv(spec, b, false, &base_cnt);
  const Index m = spec.op.kspace_dim();
  const Index dim = spec.op.image_dim();

  auto eval = [&](Index begin, Index end) {
    const Index width = end - begin;
    CMat v(m, width);
    for (Index j = 0; j < width; ++j)
      v.col(j) = draw_probe_vec(
          family, SeedSpec{master_seed, static_cast<std::uint64_t>(begin + j)},
          m);
    OpCount cnt;
    const CMat u = fista_jvp_batch(base.trace, spec, v, &cnt);
    ChunkSums sums;
    sums.s2 = RVec::Zero(dim);
    for (Index j = 0; j < width; ++j) sums.s2 += u.col(j).cwiseAbs2();
    sums.singles = cnt.singles;
    return sums;
  };

  const std::vector<ChunkSums> totals = run_chunked(n, counts, eval);
  EstimatorRun run;
  for (std::size_t ci = 0; ci < counts.size(); ++ci) {
    const Index c = counts[ci];
    VarianceMap map = finish_map(
        RVec(totals[ci].s2 / static_cast<double>(c)), EstimatorMethod::Pico,
        family, c, master_seed, base_cnt.singles + totals[ci].singles, spec);
    if (ci + 1 == counts.size()) {
      run.s2 = totals[ci].s2;
      run.final = map;
      if (!checkpoints.empty() && checkpoints.back() == c)
        run.snapshots.push_back(std::move(map));
    } else {
      run.snapshots.push_back(std::move(map));
    }
  }
  run.probes = n;
  return run;
}

EstimatorRun pmr(const ReconSpec& spec, const KSpaceData& b, double sigma_k,
                 Index n, std::uint64_t master_seed,
                 const std::vector<Index>& checkpoints) {
  if (n < 2) throw Error("replica variance needs at least two replicas");
  if (!(sigma_k > 0.0) || !std::isfinite(sigma_k))
    throw Error("replica noise level must be positive and finite");
  if (b.n_samples != spec.op.n_samples || b.n_coils != spec.op.n_coils)
    throw ShapeMismatch("k-space data does not match operator");
  const std::vector<Index> counts = validated_counts(n, checkpoints);
  const Index m = spec.op.kspace_dim();
  const Index dim = spec.op.image_dim();

  OpCount base_cnt;
  CVec y0(dim);
  if (spec.is_linear()) {
    y0 = reconstruct_linear(spec, b, nullptr, &base_cnt).data;
  } else {
    y0 = fista_tv(spec, b, false, &base_cnt).x.data;
  }

  auto eval = [&](Index begin, Index end) {
    const Index width = end - begin;
    CMat data(m, width);
    for (Index j = 0; j < width; ++j)
      data.col(j) =
          b.data + sigma_k * draw_complex_gaussian(
                                 SeedSpec{master_seed,
                                          static_cast<std::uint64_t>(begin + j)},
                                 m);
    OpCount cnt;
    CMat x;
    if (spec.is_linear()) {
      x = reconstruct_linear_batch(spec, data, &cnt);
    } else {
      x.resize(dim, width);
      for (Index j = 0; j < width; ++j) {
        const KSpaceData replica(data.col(j), b.n_samples, b.n_coils);
        x.col(j) = fista_tv(spec, replica, false, &cnt).x.data;
      }
    }
    ChunkSums sums;
    sums.s = CVec::Zero(dim);
    sums.s2 = RVec::Zero(dim);
    for (Index j = 0; j < width; ++j) {
      const CVec d = x.col(j) - y0;
      sums.s += d;
      sums.s2 += d.cwiseAbs2();
    }
    sums.singles = cnt.singles;
    return sums;
  };

  const std::vector<ChunkSums> totals = run_chunked(n, counts, eval);
  EstimatorRun run;
  for (std::size_t ci = 0; ci < counts.size(); ++ci) {
    const Index c = counts[ci];
    if (c < 2) throw Error("checkpoints below two replicas are not defined");
    const double nc = static_cast<double>(c);
    const RVec raw = (totals[ci].s2 - totals[ci].s.cwiseAbs2() / nc) /
                     ((nc - 1.0) * sigma_k * sigma_k);
    VarianceMap map =
        finish_map(raw, EstimatorMethod::Pmr, ProbeFamily::ComplexGaussian, c,
                   master_seed, base_cnt.singles + totals[ci].singles, spec);
    if (ci + 1 == counts.size()) {
      run.s = totals[ci].s;
      run.s2 = totals[ci].s2;
      run.final = map;
      if (!checkpoints.empty() && checkpoints.back() == c)
        run.snapshots.push_back(std::move(map));
    } else {
      run.snapshots.push_back(std::move(map));
    }
  }
  run.probes = n;
  return run;
}

VarianceMap analytical_sense(const CoilSensitivities& coils,
                             const SamplingPattern& pattern,
                             const std::optional<NoiseModel>& noise) {
  if (pattern.kind != PatternKind::Cartesian)
    throw Error("analytical reference requires a Cartesian pattern");
  if (pattern.calib != 0)
    throw Error("analytical reference requires no calibration region");
  const Shape shape = coils.shape();
  if (!(pattern.grid == shape))
    throw ShapeMismatch("pattern grid does not match coil maps");
  const Index r = pattern.R;
  if (shape.rows % r != 0)
    throw Error("analytical reference requires R to divide the row count");
  for (Index row = 0; row < shape.rows; ++row)
    if (pattern.row_mask[row] != (row % r == 0))
      throw Error("analytical reference requires uniform row undersampling");
  if (noise) {
    const Index nc = coils.n_coils();
    if (noise->covariance.m.rows() != nc)
      throw ShapeMismatch("noise covariance does not match coil count");
    if ((noise->covariance.m - CMat::Identity(nc, nc)).cwiseAbs().maxCoeff() > 1e-12)
      throw Error("analytical reference requires identity noise covariance");
  }

  const Index n_coils = coils.n_coils();
  const Index period = shape.rows / r;
  VarianceMap map;
  map.method = EstimatorMethod::AnalyticalSense;
  map.norm_scale = 1.0;
  map.shape = shape;
  map.values.resize(shape.rows * shape.cols);

  CMat s(n_coils, r);
  for (Index col = 0; col < shape.cols; ++col) {
    for (Index m0 = 0; m0 < period; ++m0) {
      for (Index t = 0; t < r; ++t) {
        const Index row = m0 + t * period;
        for (Index ci = 0; ci < n_coils; ++ci)
          s(ci, t) = coils.maps[static_cast<std::size_t>(ci)](row, col);
      }
      const CMat h = s.adjoint() * s;
      CMat inv;
      try {
        inv = cholesky_solve(cholesky(h), CMat(CMat::Identity(r, r)));
      } catch (const NotPositiveDefinite&) {
        throw SingularAliasSet("coil matrix is rank-deficient on an aliasing set");
      }
      for (Index t = 0; t < r; ++t) {
        const Index row = m0 + t * period;
        map.values[col * shape.rows + row] =
            static_cast<double>(r) * inv(t, t).real();
      }
    }
  }
  return map;
}

VarianceMap oracle_diag(const ReconSpec& spec,
                        const std::optional<KSpaceData>& b) {
  const Index dim = spec.op.image_dim();
  if (dim > 1024)
    throw TooLarge("brute-force diagonal is limited to 1024 voxels");
  const Index m = spec.op.kspace_dim();

  VarianceMap map;
  map.method = EstimatorMethod::Oracle;
  map.norm_scale = spec.op.norm_scale;
  map.shape = spec.op.shape;

  if (spec.is_linear()) {
    const CMat a = materialize_dense(spec.op);
    CMat normal = a.adjoint() * a;
    normal += spec.lambda * CMat::Identity(dim, dim);
    const CMat l = cholesky(normal);
    const CMat r_mat = cholesky_solve(l, CMat(a.adjoint()));
    map.values = r_mat.rowwise().squaredNorm();
    map.operator_applications = 0;
    return map;
  }

  if (!b)
    throw NonLinearSpec(
        "the nonlinear brute-force diagonal needs the measured data");
  OpCount cnt;
  const FistaResult base = fista_tv(spec, *b, false, &cnt);
  RVec acc = RVec::Zero(dim);
  // The Jacobian is only real-linear, so probe the real and imaginary basis
  // directions separately: diag(E|J v|^2) for CN(0,1) v equals
  // 0.5 * sum_j (|J e_j|^2 + |J i e_j|^2).
  for (Index start = 0; start < m; start += kChunk) {
    const Index width = std::min<Index>(kChunk, m - start);
    CMat basis = CMat::Zero(m, 2 * width);
    for (Index j = 0; j < width; ++j) {
      basis(start + j, j) = Complex(1.0, 0.0);
      basis(start + j, width + j) = Complex(0.0, 1.0);
    }
    const CMat u = fista_jvp_batch(base.trace, spec, basis, &cnt);
    for (Index j = 0; j < 2 * width; ++j) acc += u.col(j).cwiseAbs2();
  }
  map.values = 0.5 * acc;
  map.operator_applications = cnt.singles;
  return map;
}

RVec sigma_map(const VarianceMap& map) { return map.values.cwiseSqrt(); }

}  // namespace pico
