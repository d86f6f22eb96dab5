#include "phaselab/injectivity.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <numbers>

#include "phaselab/threads.hpp"

namespace phaselab {

namespace {

constexpr std::uint64_t kScanBlock = 4096;

std::vector<int> mask_to_indices(std::uint64_t mask, int N) {
  std::vector<int> out;
  for (int i = 0; i < N; ++i) {
    if (mask & (1ULL << i)) out.push_back(i);
  }
  return out;
}

Eigen::MatrixXcd select_columns(const MeasurementEnsemble& Phi, std::uint64_t mask) {
  const int N = static_cast<int>(Phi.N());
  Eigen::MatrixXcd out(Phi.M(), std::popcount(mask));
  Eigen::Index k = 0;
  for (int i = 0; i < N; ++i) {
    if (mask & (1ULL << i)) out.col(k++) = Phi.columns.col(i);
  }
  return out;
}

bool subset_spans(const MeasurementEnsemble& Phi, std::uint64_t mask, const RankPolicy& policy) {
  const int size = std::popcount(mask);
  if (size < Phi.M()) return false;
  const Eigen::MatrixXcd sub = select_columns(Phi, mask);
  if (Phi.is_real()) return numerical_rank(Eigen::MatrixXd(sub.real()), policy) == Phi.M();
  return numerical_rank(sub, policy) == Phi.M();
}

// Unit vector orthogonal to the selected columns; any unit vector when the
// selection is empty or spans nothing orthogonally constrained. Sign-fixed
// through canonicalize for reproducibility.
Eigen::VectorXcd left_null_vector(const MeasurementEnsemble& Phi, std::uint64_t mask) {
  const Eigen::Index M = Phi.M();
  if (mask == 0) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(M);
    e(0) = 1.0;
    return e;
  }
  const Eigen::MatrixXcd sub = select_columns(Phi, mask);
  if (Phi.is_real()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub.real(), Eigen::ComputeFullU);
    Eigen::VectorXd u = svd.matrixU().col(M - 1);
    return canonicalize(u).cast<cplx>();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sub, Eigen::ComputeFullU);
  Eigen::VectorXcd u = svd.matrixU().col(M - 1);
  return canonicalize(u);
}

SubsetWitness make_subset_witness(const MeasurementEnsemble& Phi, std::uint64_t mask,
                                  const RankPolicy& policy) {
  SubsetWitness w;
  w.mask = mask;
  w.subset = mask_to_indices(mask, static_cast<int>(Phi.N()));
  w.spans_subset = subset_spans(Phi, mask, policy);
  const std::uint64_t full = (Phi.N() >= 64) ? ~0ULL : ((1ULL << Phi.N()) - 1);
  w.spans_complement = subset_spans(Phi, full & ~mask, policy);
  return w;
}

// Witness pair from a rank <= 2 self-adjoint matrix in the operator
// nullspace: opposite-sign eigenvalues give (sqrt|l1| u1, sqrt|l2| u2); a
// (numerically) rank-one or same-sign matrix collides with zero.
WitnessPair spectral_witness(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H);
  const Eigen::Index M = H.rows();
  Eigen::Index ia = 0, ib = 0;
  double best = -1.0, second = -1.0;
  for (Eigen::Index i = 0; i < M; ++i) {
    const double a = std::abs(eig.eigenvalues()(i));
    if (a > best) {
      second = best;
      ib = ia;
      best = a;
      ia = i;
    } else if (a > second) {
      second = a;
      ib = i;
    }
  }
  const double la = eig.eigenvalues()(ia);
  const double lb = eig.eigenvalues()(ib);
  WitnessPair w;
  w.x = canonicalize(Eigen::VectorXcd(std::sqrt(std::abs(la)) * eig.eigenvectors().col(ia)));
  if (std::abs(lb) <= 1e-8 * std::abs(la) || la * lb > 0.0) {
    w.y = Eigen::VectorXcd::Zero(M);
  } else {
    w.y = canonicalize(Eigen::VectorXcd(std::sqrt(std::abs(lb)) * eig.eigenvectors().col(ib)));
  }
  return w;
}

double det_real(const Eigen::MatrixXcd& H) { return H.determinant().real(); }

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Injective:
      return "Injective";
    case Status::NotInjective:
      return "NotInjective";
    default:
      return "Indeterminate";
  }
}

std::pair<bool, std::optional<SubsetWitness>> complement_property(const MeasurementEnsemble& Phi,
                                                                  const CPOptions& opts) {
  const int N = static_cast<int>(Phi.N());
  if (N > opts.max_N) {
    throw budget_error("complement_property: N = " + std::to_string(N) +
                       " exceeds enumeration budget " + std::to_string(opts.max_N));
  }
  // Every complementary pair is visited once by keeping index 0 inside S; the
  // remaining N - 1 membership bits form the scanned mask range.
  const std::uint64_t total = 1ULL << (N - 1);
  const std::uint64_t n_blocks = block_count(total, kScanBlock);
  std::vector<std::uint64_t> block_hit(n_blocks, ~0ULL);
  std::atomic<std::uint64_t> best_block{n_blocks};
  const int threads = resolve_threads(opts.threads);

  for_blocks(total, kScanBlock, threads, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
    if (b > best_block.load(std::memory_order_relaxed)) return;
    for (std::uint64_t m = lo; m < hi; ++m) {
      const std::uint64_t mask = (m << 1) | 1ULL;
      if (subset_spans(Phi, mask, opts.rank)) continue;
      const std::uint64_t full = (1ULL << N) - 1;
      if (subset_spans(Phi, full & ~mask, opts.rank)) continue;
      block_hit[b] = mask;
      std::uint64_t cur = best_block.load(std::memory_order_relaxed);
      while (b < cur && !best_block.compare_exchange_weak(cur, b)) {
      }
      return;
    }
  });

  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    if (block_hit[b] != ~0ULL) {
      return {false, make_subset_witness(Phi, block_hit[b], opts.rank)};
    }
  }
  return {true, std::nullopt};
}

bool full_spark(const MeasurementEnsemble& Phi, const FullSparkOptions& opts) {
  const int N = static_cast<int>(Phi.N());
  const int M = static_cast<int>(Phi.M());
  if (N < M) return false;
  double combos = 1.0;
  for (int i = 0; i < M; ++i) combos *= static_cast<double>(N - i) / static_cast<double>(i + 1);
  if (combos > static_cast<double>(opts.max_subsets)) {
    throw budget_error("full_spark: C(N, M) exceeds enumeration budget");
  }
  std::vector<int> idx(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    std::uint64_t mask = 0;
    for (const int i : idx) mask |= 1ULL << i;
    if (!subset_spans(Phi, mask, opts.rank)) return false;
    int p = M - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == N - M + p) --p;
    if (p < 0) break;
    ++idx[static_cast<std::size_t>(p)];
    for (int q = p + 1; q < M; ++q) {
      idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
  }
  return true;
}

InjectivityVerdict real_injectivity(const MeasurementEnsemble& Phi, const CPOptions& opts) {
  if (!Phi.is_real()) throw input_error("real_injectivity: real ensembles only");
  auto [ok, subset] = complement_property(Phi, opts);
  InjectivityVerdict v;
  v.method = "real_injectivity";
  v.rank_floor = opts.rank.floor;
  if (ok) {
    v.status = Status::Injective;
    return v;
  }
  v.status = Status::NotInjective;
  v.subset = subset;
  const std::uint64_t full = (1ULL << Phi.N()) - 1;
  const Eigen::VectorXcd u = left_null_vector(Phi, subset->mask);
  const Eigen::VectorXcd vv = left_null_vector(Phi, full & ~subset->mask);
  WitnessPair w;
  w.x = u + vv;
  w.y = u - vv;
  v.witness = std::move(w);
  return v;
}

InjectivityVerdict hmw_test(const MeasurementEnsemble& Phi, const HMWOptions& opts) {
  if (Phi.field != Field::Complex) throw input_error("hmw_test: complex ensembles only");
  if (Phi.M() != 3) throw input_error("hmw_test: requires M = 3");
  const SuperAnalysisOperator op = super_analysis_operator(Phi);
  const OperatorNullspace ns = operator_nullspace(op, opts.rank);
  InjectivityVerdict v;
  v.method = "hmw";
  v.nullity = ns.nullity;
  v.rank_floor = opts.rank.floor;
  v.det_tol = opts.det_tol;
  if (ns.nullity == 0) {
    v.status = Status::Injective;
    return v;
  }
  if (ns.nullity == 1) {
    const Eigen::MatrixXcd& H = ns.basis[0];
    const double scale = H.norm();
    if (std::abs(det_real(H)) > opts.det_tol * scale * scale * scale) {
      v.status = Status::Injective;
      return v;
    }
    v.status = Status::NotInjective;
    v.witness = spectral_witness(H);
    return v;
  }
  // Nullity >= 2: det(A cos t + B sin t) changes sign over [0, pi], so some
  // combination in the nullspace is singular, hence of rank 1 or 2.
  const Eigen::MatrixXcd& A = ns.basis[0];
  const Eigen::MatrixXcd& B = ns.basis[1];
  Eigen::MatrixXcd H;
  const double f0 = det_real(A);
  if (std::abs(f0) <= 1e-14) {
    H = A;
  } else {
    double lo = 0.0, hi = std::numbers::pi;
    double flo = f0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-17; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double fm = det_real(A * std::cos(mid) + B * std::sin(mid));
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double t = 0.5 * (lo + hi);
    H = A * std::cos(t) + B * std::sin(t);
  }
  v.status = Status::NotInjective;
  v.witness = spectral_witness(H);
  return v;
}

InjectivityVerdict nullspace_classifier(const MeasurementEnsemble& Phi, const HMWOptions& opts) {
  if (Phi.field != Field::Complex) {
    throw input_error("nullspace_classifier: complex ensembles only");
  }
  const Eigen::Index M = Phi.M();
  const SuperAnalysisOperator op = super_analysis_operator(Phi);
  const OperatorNullspace ns = operator_nullspace(op, opts.rank);
  InjectivityVerdict v;
  v.method = "nullspace_classifier";
  v.nullity = ns.nullity;
  v.rank_floor = opts.rank.floor;
  v.det_tol = opts.det_tol;
  if (ns.nullity == 0) {
    v.status = Status::Injective;
    return v;
  }
  if (ns.nullity == 1) {
    const Eigen::MatrixXcd& H = ns.basis[0];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H);
    const Eigen::VectorXd mags = eig.eigenvalues().cwiseAbs();
    const double top = mags.maxCoeff();
    const double tol = std::max(static_cast<double>(M) *
                                    std::numeric_limits<double>::epsilon() * top,
                                opts.rank.floor);
    const int rank_H = static_cast<int>((mags.array() > tol).count());
    if (rank_H >= 3) {
      // Lifted differences have rank <= 2, so they never land on span{H}.
      v.status = Status::Injective;
      return v;
    }
    v.status = Status::NotInjective;
    v.witness = spectral_witness(H);
    return v;
  }
  if (M == 3) return hmw_test(Phi, opts);
  if (M == 2) {
    // Any nonzero self-adjoint 2 x 2 matrix has rank <= 2.
    v.status = Status::NotInjective;
    v.witness = spectral_witness(ns.basis[0]);
    return v;
  }
  v.status = Status::Indeterminate;
  v.reason = "nullity >= 2 with M > 3: no witness construction available";
  return v;
}

InjectivityVerdict cp_necessity_filter(const MeasurementEnsemble& Phi, const CPOptions& opts) {
  if (Phi.field != Field::Complex) {
    throw input_error("cp_necessity_filter: complex ensembles only");
  }
  auto [ok, subset] = complement_property(Phi, opts);
  InjectivityVerdict v;
  v.method = "cp_necessity";
  v.rank_floor = opts.rank.floor;
  if (ok) {
    v.status = Status::Indeterminate;
    v.reason = "complement property holds; it is only necessary over C";
    return v;
  }
  v.subset = subset;
  const std::uint64_t full = (1ULL << Phi.N()) - 1;
  const Eigen::VectorXcd u = left_null_vector(Phi, subset->mask);
  const Eigen::VectorXcd w = left_null_vector(Phi, full & ~subset->mask);
  const Eigen::VectorXcd x = u + w;
  const Eigen::VectorXcd y = u - w;
  const double max_col = Phi.columns.colwise().norm().maxCoeff();

  const auto intensity_collides = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    const Eigen::VectorXd Aa = intensity_map(a, Phi);
    return (Aa - intensity_map(b, Phi)).norm() <= 1e-8 * (1.0 + Aa.norm());
  };
  const auto torus_separated = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    const double na = a.norm(), nb = b.norm();
    if (std::abs(na - nb) > 1e-6 * std::max(na, nb)) return true;
    return std::abs(a.dot(b)) < (1.0 - 1e-6) * na * nb;
  };

  if (torus_separated(x, y) && intensity_collides(x, y)) {
    v.status = Status::NotInjective;
    v.witness = WitnessPair{x, y};
    return v;
  }
  // x and y can only be torus-equivalent when u is parallel to w, which
  // forces u orthogonal to every column; then (u, 0) is a collision.
  if (intensity_map(u, Phi).norm() <= 1e-10 * std::max(1.0, max_col * max_col)) {
    v.status = Status::NotInjective;
    v.witness = WitnessPair{u, Eigen::VectorXcd::Zero(Phi.M())};
    return v;
  }
  v.status = Status::Indeterminate;
  v.reason = "complement property fails but no verified intensity collision";
  return v;
}

int span_condition(const MeasurementEnsemble& Phi, const Eigen::VectorXcd& u,
                   const RankPolicy& policy) {
  if (Phi.field != Field::Complex) throw input_error("span_condition: complex ensembles only");
  if (u.size() != Phi.M()) throw input_error("span_condition: dimension mismatch");
  if (u.norm() == 0.0) throw input_error("span_condition: u must be nonzero");
  const Eigen::Index M = Phi.M();
  const Eigen::Index N = Phi.N();
  Eigen::MatrixXd W(2 * M, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const Eigen::VectorXcd w = (Phi.columns.col(n).adjoint() * u)(0) * Phi.columns.col(n);
    W.col(n).head(M) = w.real();
    W.col(n).tail(M) = w.imag();
  }
  return numerical_rank(W, policy);
}

std::optional<WitnessPair> span_condition_witness(const MeasurementEnsemble& Phi,
                                                  const Eigen::VectorXcd& u,
                                                  const RankPolicy& policy) {
  const Eigen::Index M = Phi.M();
  if (span_condition(Phi, u, policy) >= 2 * M - 1) return std::nullopt;
  const Eigen::Index N = Phi.N();
  // v must be real-orthogonal to every phi_n phi_n^* u and to iu; a nonzero
  // such v exists exactly when the span dimension drops below 2M - 1.
  Eigen::MatrixXd K(2 * M, N + 1);
  for (Eigen::Index n = 0; n < N; ++n) {
    const Eigen::VectorXcd w = (Phi.columns.col(n).adjoint() * u)(0) * Phi.columns.col(n);
    K.col(n).head(M) = w.real();
    K.col(n).tail(M) = w.imag();
  }
  const Eigen::VectorXcd iu = cplx(0.0, 1.0) * u;
  K.col(N).head(M) = iu.real();
  K.col(N).tail(M) = iu.imag();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeFullU);
  const Eigen::VectorXd vs = svd.matrixU().col(2 * M - 1);
  Eigen::VectorXcd v(M);
  v.real() = vs.head(M);
  v.imag() = vs.tail(M);
  v *= u.norm() / v.norm();
  WitnessPair w;
  w.x = u + v;
  w.y = u - v;
  return w;
}

int hmw_lower_bound(int M) {
  if (M < 1) throw input_error("hmw_lower_bound: M must be positive");
  const int alpha = std::popcount(static_cast<unsigned>(M - 1));
  int bound = 4 * M - 2 * alpha - 3;
  if (M % 2 == 1) {
    if (alpha % 4 == 2) bound = 4 * M - 2 * alpha - 2;
    if (alpha % 4 == 3) bound = 4 * M - 2 * alpha - 1;
  }
  return bound;
}

}  // namespace phaselab
