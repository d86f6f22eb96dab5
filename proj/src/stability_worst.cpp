#include "phaselab/stability_worst.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "phaselab/rng.hpp"
#include "phaselab/threads.hpp"

namespace phaselab {

namespace {

constexpr std::uint64_t kScanBlock = 4096;

// Roundoff guard for eigenvalues of PSD Gram matrices.
double clamp_psd(double lam, double scale) {
  if (lam < 0.0 && lam >= -1e-12 * std::max(1.0, scale)) return 0.0;
  return lam;
}

double gram_lambda_min(const Eigen::MatrixXd& G, int count, int M) {
  if (count == 0 || count < M) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
  return clamp_psd(eig.eigenvalues()(0), G.norm());
}

double gram_lambda_min(const Eigen::MatrixXcd& G, int count, int M) {
  if (count == 0 || count < M) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G, Eigen::EigenvaluesOnly);
  return clamp_psd(eig.eigenvalues()(0), G.norm());
}

std::vector<int> mask_to_indices(std::uint64_t mask, int N) {
  std::vector<int> out;
  for (int i = 0; i < N; ++i) {
    if (mask & (1ULL << i)) out.push_back(i);
  }
  return out;
}

template <class Mat>
void accumulate_grams(const Mat& cols, std::uint64_t mask, Mat& G_S, Mat& G_Sc) {
  const int N = static_cast<int>(cols.cols());
  G_S.setZero();
  G_Sc.setZero();
  for (int n = 0; n < N; ++n) {
    const auto c = cols.col(n);
    if (mask & (1ULL << n)) {
      G_S += c * c.adjoint();
    } else {
      G_Sc += c * c.adjoint();
    }
  }
}

template <class Mat>
double pair_value_impl(const Mat& cols, std::uint64_t mask, double* lam_S, double* lam_Sc) {
  const int M = static_cast<int>(cols.rows());
  const int N = static_cast<int>(cols.cols());
  Mat G_S(M, M), G_Sc(M, M);
  accumulate_grams(cols, mask, G_S, G_Sc);
  const int count_S = std::popcount(mask);
  const double a = gram_lambda_min(G_S, count_S, M);
  const double b = gram_lambda_min(G_Sc, N - count_S, M);
  if (lam_S) *lam_S = a;
  if (lam_Sc) *lam_Sc = b;
  return std::max(a, b);
}

// Gray-code walk over one block of complementary pairs with incremental
// rank-one Gram updates; anything approaching the running minimum is
// re-evaluated from scratch, so reported values are path independent.
template <class Mat>
void scan_block(const Mat& cols, std::uint64_t lo, std::uint64_t hi, double slack,
                double& best_value, std::uint64_t& best_mask) {
  const int M = static_cast<int>(cols.rows());
  const int N = static_cast<int>(cols.cols());
  const auto gray = [](std::uint64_t p) { return p ^ (p >> 1); };
  const auto full_mask = [](std::uint64_t g) { return (g << 1) | 1ULL; };

  Mat G_S(M, M), G_Sc(M, M);
  std::uint64_t g = gray(lo);
  accumulate_grams(cols, full_mask(g), G_S, G_Sc);
  best_value = std::numeric_limits<double>::infinity();
  best_mask = 0;
  for (std::uint64_t p = lo;; ++p) {
    const std::uint64_t mask = full_mask(g);
    const int count_S = std::popcount(mask);
    const double v = std::max(gram_lambda_min(G_S, count_S, M),
                              gram_lambda_min(G_Sc, N - count_S, M));
    if (v < best_value + slack) {
      const double exact = pair_value_impl(cols, mask, nullptr, nullptr);
      if (exact < best_value || (exact == best_value && mask < best_mask)) {
        best_value = exact;
        best_mask = mask;
      }
    }
    if (p + 1 >= hi) break;
    const int flip = std::countr_zero(p + 1);  // bit toggled between gray(p) and gray(p+1)
    const std::uint64_t bit = 1ULL << flip;
    const auto c = cols.col(flip + 1);
    if (g & bit) {
      G_S -= c * c.adjoint();
      G_Sc += c * c.adjoint();
    } else {
      G_S += c * c.adjoint();
      G_Sc -= c * c.adjoint();
    }
    g ^= bit;
  }
}

}  // namespace

double operator_norm(const MeasurementEnsemble& Phi) {
  if (Phi.is_real()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Phi.real());
    return svd.singularValues()(0);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Phi.columns);
  return svd.singularValues()(0);
}

double scp_pair_value(const MeasurementEnsemble& Phi, std::uint64_t mask, double* lambda_S,
                      double* lambda_Sc) {
  if (Phi.is_real()) {
    return pair_value_impl(Eigen::MatrixXd(Phi.real()), mask, lambda_S, lambda_Sc);
  }
  return pair_value_impl(Phi.columns, mask, lambda_S, lambda_Sc);
}

SCPReport scp_sigma(const MeasurementEnsemble& Phi, const SCPOptions& opts) {
  const int N = static_cast<int>(Phi.N());
  if (N > opts.max_N) {
    throw budget_error("scp_sigma: N = " + std::to_string(N) + " exceeds enumeration budget " +
                       std::to_string(opts.max_N));
  }
  const std::uint64_t total = 1ULL << (N - 1);
  const std::uint64_t n_blocks = block_count(total, kScanBlock);
  std::vector<double> block_value(n_blocks);
  std::vector<std::uint64_t> block_mask(n_blocks);
  const double slack = 1e-8 * (1.0 + Phi.columns.squaredNorm());
  const int threads = resolve_threads(opts.threads);

  if (Phi.is_real()) {
    const Eigen::MatrixXd cols = Phi.real();
    for_blocks(total, kScanBlock, threads, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
      scan_block(cols, lo, hi, slack, block_value[b], block_mask[b]);
    });
  } else {
    const Eigen::MatrixXcd& cols = Phi.columns;
    for_blocks(total, kScanBlock, threads, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
      scan_block(cols, lo, hi, slack, block_value[b], block_mask[b]);
    });
  }

  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_mask = 0;
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    if (block_value[b] < best || (block_value[b] == best && block_mask[b] < best_mask)) {
      best = block_value[b];
      best_mask = block_mask[b];
    }
  }
  SCPReport rep;
  rep.sigma_sq = std::max(0.0, best);
  rep.sigma = std::sqrt(rep.sigma_sq);
  rep.witness_mask = best_mask;
  rep.witness_subset = mask_to_indices(best_mask, N);
  scp_pair_value(Phi, best_mask, &rep.lambda_S, &rep.lambda_Sc);
  rep.subsets_examined = total;
  return rep;
}

SCPBound scp_window_bound(const MeasurementEnsemble& Phi) {
  const int N = static_cast<int>(Phi.N());
  SCPBound bound;
  bound.sigma_sq_upper = std::numeric_limits<double>::infinity();
  for (int width = 1; width <= N / 2; ++width) {
    for (int start = 0; start < N; ++start) {
      std::uint64_t mask = 0;
      for (int k = 0; k < width; ++k) mask |= 1ULL << ((start + k) % N);
      double lam_S = 0.0, lam_Sc = 0.0;
      const double v = scp_pair_value(Phi, mask, &lam_S, &lam_Sc);
      ++bound.subsets_examined;
      if (v < bound.sigma_sq_upper ||
          (v == bound.sigma_sq_upper && mask < bound.witness_mask)) {
        bound.sigma_sq_upper = v;
        bound.witness_mask = mask;
        bound.lambda_S = lam_S;
        bound.lambda_Sc = lam_Sc;
      }
    }
  }
  bound.sigma_upper = std::sqrt(std::max(0.0, bound.sigma_sq_upper));
  bound.witness_subset = mask_to_indices(bound.witness_mask, N);
  return bound;
}

std::pair<double, double> alpha_bounds(const SCPReport& report) {
  return {report.sigma, std::numbers::sqrt2 * report.sigma};
}

RatioSampleReport sample_lipschitz_ratios(const MeasurementEnsemble& Phi, std::uint64_t pairs,
                                          std::uint64_t seed, int threads) {
  if (!Phi.is_real()) throw input_error("sample_lipschitz_ratios: real ensembles only");
  const Eigen::MatrixXd cols = Phi.real();
  const Eigen::Index M = Phi.M();

  RatioSampleReport rep;
  rep.pairs_requested = pairs;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
  rep.beta = svd.singularValues()(0);

  const auto draw_pair = [&](std::uint64_t k, Eigen::VectorXd& x, Eigen::VectorXd& y) {
    Rng rng(mix_seed(seed, k));
    x = rng.sphere_times_halfnormal(M);
    y = rng.sphere_times_halfnormal(M);
  };
  const auto ratio_of = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y, double& d) {
    d = projective_distance(x, y);
    if (d < 1e-9) return std::numeric_limits<double>::quiet_NaN();
    return (root_intensity_map(x, Phi) - root_intensity_map(y, Phi)).norm() / d;
  };

  const std::uint64_t n_blocks = block_count(pairs, kScanBlock);
  struct BlockStats {
    double min = std::numeric_limits<double>::infinity();
    std::uint64_t argmin = 0;
    double max = -std::numeric_limits<double>::infinity();
    std::uint64_t used = 0;
    std::uint64_t skipped = 0;
  };
  std::vector<BlockStats> stats(std::max<std::uint64_t>(n_blocks, 1));
  for_blocks(pairs, kScanBlock, resolve_threads(threads),
             [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
               Eigen::VectorXd x, y;
               BlockStats& s = stats[b];
               for (std::uint64_t k = lo; k < hi; ++k) {
                 draw_pair(k, x, y);
                 double d = 0.0;
                 const double r = ratio_of(x, y, d);
                 if (std::isnan(r)) {
                   ++s.skipped;
                   continue;
                 }
                 ++s.used;
                 if (r < s.min) {
                   s.min = r;
                   s.argmin = k;
                 }
                 if (r > s.max) s.max = r;
               }
             });

  double min_ratio = std::numeric_limits<double>::infinity();
  std::uint64_t argmin = 0;
  double max_ratio = -std::numeric_limits<double>::infinity();
  for (const BlockStats& s : stats) {
    rep.pairs_used += s.used;
    rep.pairs_skipped += s.skipped;
    if (s.used > 0 && (s.min < min_ratio || (s.min == min_ratio && s.argmin < argmin))) {
      min_ratio = s.min;
      argmin = s.argmin;
    }
    if (s.used > 0) max_ratio = std::max(max_ratio, s.max);
  }

  // The deterministic pair (top singular direction, 0) attains beta, the
  // global maximum of the ratio.
  const Eigen::VectorXd xstar = svd.matrixU().col(0);
  max_ratio = std::max(max_ratio, rep.beta);
  ++rep.pairs_used;
  if (rep.beta < min_ratio) {
    min_ratio = rep.beta;
    rep.argmin_x = xstar;
    rep.argmin_y = Eigen::VectorXd::Zero(M);
  } else {
    Eigen::VectorXd x, y;
    draw_pair(argmin, x, y);
    rep.argmin_x = x;
    rep.argmin_y = y;
  }
  rep.min_ratio = min_ratio;
  rep.max_ratio = max_ratio;
  return rep;
}

LipschitzReport lipschitz_report(const MeasurementEnsemble& Phi, std::uint64_t samples,
                                 std::uint64_t seed, const SCPOptions& opts) {
  LipschitzReport rep;
  rep.beta = operator_norm(Phi);
  rep.scp = scp_sigma(Phi, opts);
  rep.sigma = rep.scp.sigma;
  const auto [lo, hi] = alpha_bounds(rep.scp);
  rep.alpha_lower = lo;
  rep.alpha_upper = hi;
  rep.stability_finite = rep.sigma > 0.0;
  rep.stability_constant_upper =
      rep.stability_finite ? 2.0 * rep.beta / rep.sigma : std::numeric_limits<double>::infinity();
  if (Phi.is_real() && samples > 0) {
    const RatioSampleReport s = sample_lipschitz_ratios(Phi, samples, seed, opts.threads);
    rep.sampled = true;
    rep.sampled_min_ratio = s.min_ratio;
    rep.sampled_max_ratio = s.max_ratio;
  }
  return rep;
}

std::vector<double> holder_divergence_probe(const MeasurementEnsemble& Phi, int n,
                                            const std::vector<double>& C_values) {
  if (n < 0 || n >= Phi.N()) throw input_error("holder_divergence_probe: index out of range");
  const Eigen::VectorXcd phi = Phi.columns.col(n);
  if (phi.norm() == 0.0) throw input_error("holder_divergence_probe: phi_n must be nonzero");
  std::vector<double> out;
  out.reserve(C_values.size());
  for (const double C : C_values) {
    if (C <= 0.0) throw input_error("holder_divergence_probe: C must be positive");
    const Eigen::VectorXcd x = (C + 1.0) * phi;
    const double d = std::min((x - phi).norm(), (x + phi).norm());
    const double num = (intensity_map(x, Phi) - intensity_map(phi, Phi)).norm();
    out.push_back(num / d);
  }
  return out;
}

MeasurementEnsemble localized_fourier_frame(int M, int N) {
  if (M < 2 || N < 2 || M % 2 != 0 || N % 2 != 0 || N < M) {
    throw input_error("localized_fourier_frame: M, N must be even with N >= M >= 2");
  }
  Eigen::MatrixXd cols(M, N);
  const double scale = std::sqrt(2.0 / static_cast<double>(M));
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M / 2; ++m) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) *
                           static_cast<double>(n) / static_cast<double>(N);
      cols(m, n) = scale * std::cos(angle);
      cols(M / 2 + m, n) = scale * std::sin(angle);
    }
  }
  return make_real_ensemble(cols);
}

MeasurementEnsemble gaussian_ensemble(int M, int N, std::uint64_t seed, Field field) {
  if (M < 1 || N < 1) throw input_error("gaussian_ensemble: M, N must be positive");
  Rng rng(seed);
  if (field == Field::Real) {
    Eigen::MatrixXd cols(M, N);
    for (int n = 0; n < N; ++n) {
      for (int m = 0; m < M; ++m) cols(m, n) = rng.normal();
    }
    return make_real_ensemble(cols);
  }
  Eigen::MatrixXcd cols(M, N);
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) {
      const double re = rng.normal();
      const double im = rng.normal();
      cols(m, n) = cplx(re, im);
    }
  }
  return make_complex_ensemble(cols);
}

double theorem_sigma(int M, int N, double eps, std::string* warning) {
  if (M < 1 || N < 1) throw input_error("theorem_sigma: M, N must be positive");
  if (eps <= 0.0) throw input_error("theorem_sigma: eps must be positive");
  const double R = static_cast<double>(N) / static_cast<double>(M);
  if (R <= 2.0) throw input_error("theorem_sigma: requires N/M > 2");
  if (warning && N % 2 != 0) {
    *warning = "theorem_sigma: bound derived for even N; N = " + std::to_string(N) + " is odd";
  }
  const double exponent = 1.0 + eps / (R - 2.0);
  return (1.0 / (std::numbers::sqrt2 * std::exp(exponent))) *
         (static_cast<double>(N - 2 * M + 2)) /
         (std::pow(2.0, R / (R - 2.0)) * std::sqrt(static_cast<double>(N)));
}

double curve_a(double R, int M) {
  if (R <= 2.0) throw input_error("curve_a: requires R > 2");
  if (M < 1) throw input_error("curve_a: M must be positive");
  const double N = R * static_cast<double>(M);
  return 2.0 * (std::sqrt(N) + std::sqrt(static_cast<double>(M))) * std::numbers::sqrt2 *
         std::numbers::e * std::pow(2.0, R / (R - 2.0)) * std::sqrt(N) /
         (N - 2.0 * static_cast<double>(M) + 2.0);
}

double curve_b(double R) {
  if (R <= 2.0) throw input_error("curve_b: requires R > 2");
  return 2.0 * std::numbers::sqrt2 * std::numbers::e * ((R + std::sqrt(R)) / (R - 2.0)) *
         std::pow(2.0, R / (R - 2.0));
}

GaussianExperimentResult run_gaussian_experiment(const GaussianExperimentConfig& cfg) {
  if (cfg.M < 1) throw input_error("run_gaussian_experiment: M must be positive");
  if (cfg.trials < 1) throw input_error("run_gaussian_experiment: trials must be positive");
  if (cfg.R_values.empty()) throw input_error("run_gaussian_experiment: no R values");

  std::vector<int> Ns;
  for (const double R : cfg.R_values) {
    if (R <= 2.0) throw input_error("run_gaussian_experiment: requires R > 2");
    int N = static_cast<int>(std::llround(R * static_cast<double>(cfg.M)));
    if (N % 2 != 0) ++N;  // rounded up to even
    if (N > cfg.scp.max_N) {
      throw budget_error("run_gaussian_experiment: N = " + std::to_string(N) +
                         " exceeds the enumeration budget");
    }
    Ns.push_back(N);
  }

  GaussianExperimentResult result;
  result.config = cfg;
  const std::size_t n_R = cfg.R_values.size();
  result.points.resize(n_R * static_cast<std::size_t>(cfg.trials));

  SCPOptions inner = cfg.scp;
  inner.threads = 1;  // parallelism lives at the trial level
  const std::uint64_t total = static_cast<std::uint64_t>(result.points.size());
  for_blocks(total, 1, resolve_threads(cfg.threads),
             [&](std::uint64_t job, std::uint64_t, std::uint64_t) {
               const std::size_t ri = static_cast<std::size_t>(job) / cfg.trials;
               const int trial = static_cast<int>(job % cfg.trials);
               const MeasurementEnsemble Phi = gaussian_ensemble(
                   cfg.M, Ns[ri], mix_seed(cfg.base_seed, ri, static_cast<std::uint64_t>(trial)));
               const double beta = operator_norm(Phi);
               const double sigma = scp_sigma(Phi, inner).sigma;
               GaussianPoint& p = result.points[job];
               p.M = cfg.M;
               p.R = cfg.R_values[ri];
               p.N = Ns[ri];
               p.trial = trial;
               p.finite = sigma > 0.0;
               p.log10_value = p.finite ? std::log10(2.0 * beta / sigma)
                                        : std::numeric_limits<double>::infinity();
             });

  for (std::size_t ri = 0; ri < n_R; ++ri) {
    GaussianSummaryRow row;
    row.M = cfg.M;
    row.R = cfg.R_values[ri];
    row.N = Ns[ri];
    double sum = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
      const GaussianPoint& p = result.points[ri * static_cast<std::size_t>(cfg.trials) +
                                             static_cast<std::size_t>(t)];
      if (p.finite) {
        sum += p.log10_value;
        ++row.used;
      } else {
        ++row.excluded;
      }
    }
    row.mean = row.used > 0 ? sum / row.used : std::numeric_limits<double>::quiet_NaN();
    row.curve_a = curve_a(row.R, cfg.M);
    row.curve_b = curve_b(row.R);
    result.summary.push_back(row);
  }
  return result;
}

double grid_infimum_ratio(const MeasurementEnsemble& Phi, int angular_points,
                          const SCPReport& scp) {
  if (!Phi.is_real() || Phi.M() != 2) {
    throw input_error("grid_infimum_ratio: real M = 2 ensembles only");
  }
  if (angular_points < 2) throw input_error("grid_infimum_ratio: need at least two grid points");
  const Eigen::MatrixXd cols = Phi.real();

  const auto ratio_of = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double d = projective_distance(x, y);
    if (d < 1e-9) return std::numeric_limits<double>::infinity();
    return (root_intensity_map(x, Phi) - root_intensity_map(y, Phi)).norm() / d;
  };

  std::vector<Eigen::Vector2d> grid(static_cast<std::size_t>(angular_points));
  for (int i = 0; i < angular_points; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) /
                     static_cast<double>(angular_points);
    grid[static_cast<std::size_t>(i)] = Eigen::Vector2d(std::cos(t), std::sin(t));
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < angular_points; ++i) {
    for (int j = i + 1; j < angular_points; ++j) {
      best = std::min(best, ratio_of(grid[static_cast<std::size_t>(i)],
                                     grid[static_cast<std::size_t>(j)]));
    }
  }

  // Subset-witness pair: with u, v the minimizing eigenvectors on the two
  // sides of the SCP witness split, (u + v, u - v) has ratio <= sqrt(2) sigma.
  const int N = static_cast<int>(Phi.N());
  Eigen::MatrixXd G_S = Eigen::MatrixXd::Zero(2, 2), G_Sc = Eigen::MatrixXd::Zero(2, 2);
  for (int n = 0; n < N; ++n) {
    const Eigen::Vector2d c = cols.col(n);
    if (scp.witness_mask & (1ULL << n)) {
      G_S += c * c.transpose();
    } else {
      G_Sc += c * c.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eS(G_S), eSc(G_Sc);
  const Eigen::VectorXd u = eS.eigenvectors().col(0);
  const Eigen::VectorXd v = eSc.eigenvectors().col(0);
  best = std::min(best, ratio_of(u + v, u - v));
  return best;
}

}  // namespace phaselab
