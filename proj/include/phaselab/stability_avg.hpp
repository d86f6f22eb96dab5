#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "phaselab/ensemble.hpp"
#include "phaselab/types.hpp"

namespace phaselab {

// Additive i.i.d. Gaussian noise on the intensity measurements.
struct NoiseModel {
  double sigma = 1.0;
};

// Column n = <theta, phi_n> phi_n. Real ensembles give the M x N matrix;
// complex ensembles stack real over imaginary parts into 2M x N, matching the
// parameterization (Re theta_1..Re theta_M, Im theta_1..Im theta_M). The
// intensity map's Jacobian is 2 Psi^T. theta is used as given.
Eigen::MatrixXd psi_matrix(const Eigen::VectorXcd& theta, const MeasurementEnsemble& Phi);
Eigen::MatrixXd psi_matrix(const Eigen::VectorXd& theta, const MeasurementEnsemble& Phi);

struct FisherReport {
  Field field = Field::Real;
  Eigen::VectorXd theta;     // canonical real coordinates (length M, or 2M with 0 last)
  Eigen::MatrixXd J;         // (4 / sigma^2) Psi Psi^T
  Eigen::MatrixXd J_reduced; // complex case: J with the Im theta_M row/column deleted
  double noise_sigma = 0.0;
  bool positive_definite = false;
  double condition = 0.0;    // of the applicable matrix (J, or J_reduced)
  bool reliable = false;     // positive definite and condition <= 1e12
  std::optional<double> crlb_trace;
  std::string reason;        // set when crlb_trace is absent
};

// Fisher information of the Gaussian intensity observation model at theta.
// theta is canonicalized first; complex theta must lie in the interior of the
// canonical domain (theta_M real and positive after canonicalization).
FisherReport fisher_matrix(const Eigen::VectorXcd& theta, const MeasurementEnsemble& Phi,
                           const NoiseModel& noise);
FisherReport fisher_matrix(const Eigen::VectorXd& theta, const MeasurementEnsemble& Phi,
                           const NoiseModel& noise);

// Gradient of the log-likelihood at theta for the observation y:
// (2 / sigma^2) Psi (y - A(theta)). theta is used as given, not canonicalized.
Eigen::VectorXd score_vector(const Eigen::VectorXd& y, const Eigen::VectorXcd& theta,
                             const MeasurementEnsemble& Phi, const NoiseModel& noise);
Eigen::VectorXd score_vector(const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                             const MeasurementEnsemble& Phi, const NoiseModel& noise);

// Uncentered mean of score outer products over seeded draws y = A(theta) +
// sigma z. Fixed-block accumulation: byte-identical for any worker count.
Eigen::MatrixXd monte_carlo_fisher(const Eigen::VectorXcd& theta, const MeasurementEnsemble& Phi,
                                   const NoiseModel& noise, std::uint64_t trials,
                                   std::uint64_t seed, int threads = 0);
Eigen::MatrixXd monte_carlo_fisher(const Eigen::VectorXd& theta, const MeasurementEnsemble& Phi,
                                   const NoiseModel& noise, std::uint64_t trials,
                                   std::uint64_t seed, int threads = 0);

// Trace of the inverse of the applicable information matrix; throws when it
// is singular.
double crlb_trace(const FisherReport& report);

}  // namespace phaselab
