#pragma once

// Shared checkers for the property and acceptance suites.

#include <algorithm>
#include <cmath>
#include <string>

#include "phaselab/ensemble.hpp"
#include "phaselab/injectivity.hpp"
#include "phaselab/rng.hpp"

namespace testutil {

using namespace phaselab;

inline MeasurementEnsemble random_real_ensemble(Eigen::Index M, Eigen::Index N,
                                                std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd cols(M, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    cols.col(n) = rng.normal_vector(M);
  }
  return make_real_ensemble(cols);
}

inline MeasurementEnsemble random_complex_ensemble(Eigen::Index M, Eigen::Index N,
                                                   std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXcd cols(M, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    cols.col(n) = rng.complex_normal_vector(M);
  }
  return make_complex_ensemble(cols);
}

// Witness soundness: the pair produces the same intensities and is
// projectively separated (real: distance in the sign quotient; complex:
// torus separation through norms or the inner-product angle).
inline bool witness_sound(const MeasurementEnsemble& Phi, const WitnessPair& w,
                          std::string* why = nullptr) {
  const Eigen::VectorXd Ax = intensity_map(w.x, Phi);
  const Eigen::VectorXd Ay = intensity_map(w.y, Phi);
  if ((Ax - Ay).norm() > 1e-8 * (1.0 + Ax.norm())) {
    if (why) *why = "intensities disagree";
    return false;
  }
  const double nx = w.x.norm();
  const double ny = w.y.norm();
  if (Phi.is_real()) {
    const double d = projective_distance(Eigen::VectorXd(w.x.real()),
                                         Eigen::VectorXd(w.y.real()));
    if (d <= 1e-6 * std::max(nx, ny)) {
      if (why) *why = "pair not separated in the sign quotient";
      return false;
    }
    return true;
  }
  if (std::abs(nx - ny) > 1e-6 * std::max({nx, ny, 1e-300})) return true;
  if (std::abs(w.x.dot(w.y)) < (1.0 - 1e-6) * nx * ny) return true;
  if (why) *why = "pair not separated on the torus quotient";
  return false;
}

// Central finite difference of the Gaussian log-likelihood in the real
// parameterization (Re theta for real ensembles, Re over Im for complex).
inline Eigen::VectorXd fd_score(const Eigen::VectorXd& y, const Eigen::VectorXcd& theta,
                                const MeasurementEnsemble& Phi, double noise_sigma) {
  const auto loglik = [&](const Eigen::VectorXcd& t) {
    const Eigen::VectorXd r = y - intensity_map(t, Phi);
    return -r.squaredNorm() / (2.0 * noise_sigma * noise_sigma);
  };
  const Eigen::Index M = theta.size();
  const Eigen::Index dim = Phi.is_real() ? M : 2 * M;
  const double h = 1e-6;
  Eigen::VectorXd g(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    Eigen::VectorXcd tp = theta, tm = theta;
    const cplx step = k < M ? cplx(h, 0.0) : cplx(0.0, h);
    const Eigen::Index idx = k < M ? k : k - M;
    tp(idx) += step;
    tm(idx) -= step;
    g(k) = (loglik(tp) - loglik(tm)) / (2.0 * h);
  }
  return g;
}

// Lemma consistency for complex witnesses: lift(x) - lift(y) lies in the
// nullspace of the super analysis operator and has rank <= 2.
inline bool lemma_consistent(const MeasurementEnsemble& Phi, const WitnessPair& w,
                             std::string* why = nullptr) {
  const Eigen::MatrixXcd H = lift(w.x) - lift(w.y);
  const SuperAnalysisOperator op = super_analysis_operator(Phi);
  const double scale = std::max(1.0, H.norm());
  if (op.apply(H).norm() > 1e-8 * scale * (1.0 + op.iso_matrix.norm())) {
    if (why) *why = "lift difference not in the nullspace";
    return false;
  }
  if (H.norm() == 0.0) return true;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H);
  const Eigen::VectorXd sv = svd.singularValues();
  for (Eigen::Index k = 2; k < sv.size(); ++k) {
    if (sv(k) > 1e-8 * sv(0)) {
      if (why) *why = "lift difference has rank above 2";
      return false;
    }
  }
  return true;
}

}  // namespace testutil
