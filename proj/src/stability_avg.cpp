#include "phaselab/stability_avg.hpp"

#include <cmath>
#include <limits>

#include "phaselab/rng.hpp"
#include "phaselab/threads.hpp"

namespace phaselab {

namespace {

void check_noise(const NoiseModel& noise) {
  if (!(noise.sigma > 0.0)) throw input_error("noise sigma must be positive");
}

void check_theta_dim(const Eigen::VectorXcd& theta, const MeasurementEnsemble& Phi) {
  if (theta.size() != Phi.M()) throw input_error("theta dimension mismatch");
}

Eigen::VectorXd real_coordinates(const Eigen::VectorXcd& theta, Field field) {
  if (field == Field::Real) return theta.real();
  Eigen::VectorXd out(2 * theta.size());
  out.head(theta.size()) = theta.real();
  out.tail(theta.size()) = theta.imag();
  return out;
}

// Interior of the canonical domain: after canonicalization the last complex
// coordinate must be genuinely real and positive.
Eigen::VectorXcd require_interior(const Eigen::VectorXcd& theta) {
  const Eigen::VectorXcd c = canonicalize(theta);
  const Eigen::Index M = c.size();
  const double scale = c.norm();
  if (!(c(M - 1).real() > 1e-8 * scale) || std::abs(c(M - 1).imag()) > 1e-12 * scale) {
    throw input_error("theta lies outside the interior of the canonical domain");
  }
  return c;
}

}  // namespace

Eigen::MatrixXd psi_matrix(const Eigen::VectorXcd& theta, const MeasurementEnsemble& Phi) {
  check_theta_dim(theta, Phi);
  const Eigen::Index M = Phi.M();
  const Eigen::Index N = Phi.N();
  if (Phi.is_real()) {
    if (theta.imag().cwiseAbs().maxCoeff() != 0.0) {
      throw input_error("psi_matrix: real ensemble expects a real theta");
    }
    const Eigen::VectorXd t = theta.real();
    const Eigen::MatrixXd cols = Phi.real();
    Eigen::MatrixXd Psi(M, N);
    for (Eigen::Index n = 0; n < N; ++n) {
      Psi.col(n) = cols.col(n).dot(t) * cols.col(n);
    }
    return Psi;
  }
  Eigen::MatrixXd Psi(2 * M, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const cplx inner = (Phi.columns.col(n).adjoint() * theta)(0);  // <theta, phi_n>
    const Eigen::VectorXcd w = inner * Phi.columns.col(n);
    Psi.col(n).head(M) = w.real();
    Psi.col(n).tail(M) = w.imag();
  }
  return Psi;
}

Eigen::MatrixXd psi_matrix(const Eigen::VectorXd& theta, const MeasurementEnsemble& Phi) {
  return psi_matrix(Eigen::VectorXcd(theta.cast<cplx>()), Phi);
}

FisherReport fisher_matrix(const Eigen::VectorXcd& theta, const MeasurementEnsemble& Phi,
                           const NoiseModel& noise) {
  check_noise(noise);
  check_theta_dim(theta, Phi);
  FisherReport rep;
  rep.field = Phi.field;
  rep.noise_sigma = noise.sigma;
  Eigen::VectorXcd canon;
  if (Phi.is_real()) {
    if (theta.imag().cwiseAbs().maxCoeff() != 0.0) {
      throw input_error("fisher_matrix: real ensemble expects a real theta");
    }
    canon = canonicalize(Eigen::VectorXd(theta.real())).cast<cplx>();
  } else {
    canon = require_interior(theta);
  }
  rep.theta = real_coordinates(canon, Phi.field);
  const Eigen::MatrixXd Psi = psi_matrix(canon, Phi);
  rep.J = (4.0 / (noise.sigma * noise.sigma)) * (Psi * Psi.transpose());
  const Eigen::MatrixXd* applicable = &rep.J;
  if (!Phi.is_real()) {
    const Eigen::Index n = rep.J.rows();
    rep.J_reduced = rep.J.topLeftCorner(n - 1, n - 1);
    applicable = &rep.J_reduced;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*applicable);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double lam_min = lam(0);
  const double lam_max = lam(lam.size() - 1);
  rep.positive_definite = lam_min > 1e-12 * std::max(lam_max, 0.0);
  rep.condition = rep.positive_definite ? lam_max / lam_min
                                        : std::numeric_limits<double>::infinity();
  rep.reliable = rep.positive_definite && rep.condition <= 1e12;
  if (rep.positive_definite) {
    rep.crlb_trace = lam.cwiseInverse().sum();
  } else {
    rep.reason = "information matrix is numerically singular";
  }
  return rep;
}

FisherReport fisher_matrix(const Eigen::VectorXd& theta, const MeasurementEnsemble& Phi,
                           const NoiseModel& noise) {
  return fisher_matrix(Eigen::VectorXcd(theta.cast<cplx>()), Phi, noise);
}

Eigen::VectorXd score_vector(const Eigen::VectorXd& y, const Eigen::VectorXcd& theta,
                             const MeasurementEnsemble& Phi, const NoiseModel& noise) {
  check_noise(noise);
  check_theta_dim(theta, Phi);
  if (y.size() != Phi.N()) throw input_error("score_vector: observation dimension mismatch");
  const Eigen::MatrixXd Psi = psi_matrix(theta, Phi);
  const Eigen::VectorXd resid = y - intensity_map(theta, Phi);
  return (2.0 / (noise.sigma * noise.sigma)) * (Psi * resid);
}

Eigen::VectorXd score_vector(const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                             const MeasurementEnsemble& Phi, const NoiseModel& noise) {
  return score_vector(y, Eigen::VectorXcd(theta.cast<cplx>()), Phi, noise);
}

Eigen::MatrixXd monte_carlo_fisher(const Eigen::VectorXcd& theta, const MeasurementEnsemble& Phi,
                                   const NoiseModel& noise, std::uint64_t trials,
                                   std::uint64_t seed, int threads) {
  check_noise(noise);
  check_theta_dim(theta, Phi);
  if (trials == 0) throw input_error("monte_carlo_fisher: trials must be positive");
  Eigen::VectorXcd canon;
  if (Phi.is_real()) {
    canon = canonicalize(Eigen::VectorXd(theta.real())).cast<cplx>();
  } else {
    canon = canonicalize(theta);
  }
  const Eigen::VectorXd mean = intensity_map(canon, Phi);
  const Eigen::MatrixXd Psi = psi_matrix(canon, Phi);
  const Eigen::Index dim = Psi.rows();
  const Eigen::Index N = Phi.N();
  const double inv_var2 = 2.0 / (noise.sigma * noise.sigma);

  constexpr std::uint64_t kBlock = 1024;
  const std::uint64_t n_blocks = block_count(trials, kBlock);
  std::vector<Eigen::MatrixXd> partial(n_blocks, Eigen::MatrixXd::Zero(dim, dim));
  for_blocks(trials, kBlock, resolve_threads(threads),
             [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
               Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
               for (std::uint64_t t = lo; t < hi; ++t) {
                 Rng rng(mix_seed(seed, t));
                 Eigen::VectorXd y = mean;
                 for (Eigen::Index n = 0; n < N; ++n) y(n) += noise.sigma * rng.normal();
                 const Eigen::VectorXd s = inv_var2 * (Psi * (y - mean));
                 acc.noalias() += s * s.transpose();
               }
               partial[b] = std::move(acc);
             });
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  for (const Eigen::MatrixXd& p : partial) sum += p;
  return sum / static_cast<double>(trials);
}

Eigen::MatrixXd monte_carlo_fisher(const Eigen::VectorXd& theta, const MeasurementEnsemble& Phi,
                                   const NoiseModel& noise, std::uint64_t trials,
                                   std::uint64_t seed, int threads) {
  return monte_carlo_fisher(Eigen::VectorXcd(theta.cast<cplx>()), Phi, noise, trials, seed,
                            threads);
}

double crlb_trace(const FisherReport& report) {
  if (!report.crlb_trace) {
    throw input_error("crlb_trace: information matrix is singular: " + report.reason);
  }
  return *report.crlb_trace;
}

}  // namespace phaselab
