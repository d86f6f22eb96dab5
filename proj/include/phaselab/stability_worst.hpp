#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phaselab/ensemble.hpp"
#include "phaselab/types.hpp"

namespace phaselab {

// Largest singular value of the synthesis matrix; the global Lipschitz
// constant of the root intensity map.
double operator_norm(const MeasurementEnsemble& Phi);

struct SCPOptions {
  int max_N = 24;
  int threads = 0;
};

// sigma^2 = min over complementary pairs {S, S^c} of
// max(lambda_min(Phi_S Phi_S^*), lambda_min(Phi_Sc Phi_Sc^*)); an empty or
// rank-deficient side contributes lambda_min = 0.
struct SCPReport {
  double sigma = 0.0;
  double sigma_sq = 0.0;
  std::uint64_t witness_mask = 0;
  std::vector<int> witness_subset;
  double lambda_S = 0.0;
  double lambda_Sc = 0.0;
  std::uint64_t subsets_examined = 0;
};

SCPReport scp_sigma(const MeasurementEnsemble& Phi, const SCPOptions& opts = {});

// max(lambda_min(G_S), lambda_min(G_Sc)) for one complementary pair, with the
// Gram matrices accumulated in ascending column order.
double scp_pair_value(const MeasurementEnsemble& Phi, std::uint64_t mask,
                      double* lambda_S = nullptr, double* lambda_Sc = nullptr);

// Certified upper bound on sigma^2 from the family of circular window
// subsets; linear cost, usable beyond the enumeration budget.
struct SCPBound {
  double sigma_upper = 0.0;
  double sigma_sq_upper = 0.0;
  std::uint64_t witness_mask = 0;
  std::vector<int> witness_subset;
  double lambda_S = 0.0;
  double lambda_Sc = 0.0;
  std::uint64_t subsets_examined = 0;
};

SCPBound scp_window_bound(const MeasurementEnsemble& Phi);

// sigma <= alpha <= sqrt(2) sigma for the inverse Lipschitz constant alpha of
// the root intensity map on the sign quotient.
std::pair<double, double> alpha_bounds(const SCPReport& report);

struct RatioSampleReport {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  Eigen::VectorXd argmin_x;
  Eigen::VectorXd argmin_y;
  double beta = 0.0;
  std::uint64_t pairs_requested = 0;
  std::uint64_t pairs_used = 0;
  std::uint64_t pairs_skipped = 0;
};

// Monte Carlo ratios ||rootA(x) - rootA(y)|| / d(x, y) over pairs drawn as
// uniform sphere direction times |N(0,1)| radius, plus the deterministic pair
// (top singular direction, 0) which attains beta exactly. Real ensembles.
RatioSampleReport sample_lipschitz_ratios(const MeasurementEnsemble& Phi, std::uint64_t pairs,
                                          std::uint64_t seed, int threads = 0);

struct LipschitzReport {
  double beta = 0.0;
  double sigma = 0.0;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  bool stability_finite = false;
  double stability_constant_upper = 0.0;  // 2 beta / sigma when finite
  bool sampled = false;
  double sampled_min_ratio = 0.0;
  double sampled_max_ratio = 0.0;
  SCPReport scp;
};

LipschitzReport lipschitz_report(const MeasurementEnsemble& Phi, std::uint64_t samples,
                                 std::uint64_t seed, const SCPOptions& opts = {});

// Direct evaluation of ||A((C+1) phi_n) - A(phi_n)|| / d((C+1) phi_n, phi_n)
// for each C; grows linearly in C, witnessing that the intensity map admits
// no Lipschitz bound and no Holder exponent on unbounded sets.
std::vector<double> holder_divergence_probe(const MeasurementEnsemble& Phi, int n,
                                            const std::vector<double>& C_values);

// Real frame from the first M/2 rows of the N x N DFT: column n stacks the
// real over the imaginary part of (e^{2 pi i m n / N})_{m < M/2}, scaled by
// sqrt(2/M) to unit norm. M and N even.
MeasurementEnsemble localized_fourier_frame(int M, int N);

// i.i.d. standard normal entries (real and imaginary parts for the complex
// field), filled column-major from the seeded generator.
MeasurementEnsemble gaussian_ensemble(int M, int N, std::uint64_t seed,
                                      Field field = Field::Real);

// Lower bound on sigma for a Gaussian ensemble with redundancy R = N/M > 2,
// valid with probability >= 1 - 3 e^{-eps^2 M / 2}. Sets *warning for odd N.
double theorem_sigma(int M, int N, double eps, std::string* warning = nullptr);

// Upper bound curves for the normalized stability constant 2 beta / sigma:
// a(R, M) evaluates the bound at N = R M; b(R) dominates a(R, M) for every M.
double curve_a(double R, int M);
double curve_b(double R);

struct GaussianExperimentConfig {
  int M = 4;
  std::vector<double> R_values;
  int trials = 30;
  std::uint64_t base_seed = 0;
  int threads = 0;
  SCPOptions scp;
};

struct GaussianPoint {
  int M = 0;
  double R = 0.0;
  int N = 0;
  int trial = 0;
  double log10_value = 0.0;
  bool finite = true;
};

struct GaussianSummaryRow {
  int M = 0;
  double R = 0.0;
  int N = 0;
  double mean = 0.0;
  double curve_a = 0.0;
  double curve_b = 0.0;
  int used = 0;
  int excluded = 0;
};

struct GaussianExperimentResult {
  GaussianExperimentConfig config;
  std::vector<GaussianPoint> points;
  std::vector<GaussianSummaryRow> summary;
};

// For each R: N = round(R M) rounded up to even, `trials` seeded draws, and
// log10(2 beta / sigma) per draw. sigma = 0 records +inf, excluded from the
// mean with a count. Deterministic for any worker count.
GaussianExperimentResult run_gaussian_experiment(const GaussianExperimentConfig& cfg);

// Infimum of the sampled ratio over all pairs from an `angular_points`-point
// circle grid (M = 2, real), together with the subset-witness pair
// (u + v, u - v) built from the SCP minimizer's eigenvectors.
double grid_infimum_ratio(const MeasurementEnsemble& Phi, int angular_points,
                          const SCPReport& scp);

}  // namespace phaselab
