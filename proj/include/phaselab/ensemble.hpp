#pragma once

#include <Eigen/Dense>

#include <vector>

#include "phaselab/types.hpp"

namespace phaselab {

// Inner product convention throughout: <x, y> = sum_m x_m * conj(y_m),
// linear in the first argument.

// (A(x))(n) = |<x, phi_n>|^2.
Eigen::VectorXd intensity_map(const Eigen::VectorXcd& x, const MeasurementEnsemble& Phi);
Eigen::VectorXd intensity_map(const Eigen::VectorXd& x, const MeasurementEnsemble& Phi);

// Entrywise square root of the intensity map.
Eigen::VectorXd root_intensity_map(const Eigen::VectorXcd& x, const MeasurementEnsemble& Phi);
Eigen::VectorXd root_intensity_map(const Eigen::VectorXd& x, const MeasurementEnsemble& Phi);

// (B(x))(n) = <x, phi_n>^2, complex ensembles only.
Eigen::VectorXcd b_map(const Eigen::VectorXcd& x, const MeasurementEnsemble& Phi);

// Metric on R^M / {+-1}: min(||x - y||, ||x + y||). The torus quotient for
// complex vectors is unsupported; the complex overload always throws.
double projective_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double projective_distance(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y);

// Canonical representative of the equivalence class: divides by the phase
// (sign, in the real case) of the last nonzero entry. Errors on x = 0.
Eigen::VectorXcd canonicalize(const Eigen::VectorXcd& x);
Eigen::VectorXd canonicalize(const Eigen::VectorXd& x);

// lift(x) = x x^*, the rank-one self-adjoint matrix with (i,j) entry
// x_i * conj(x_j).
Eigen::MatrixXcd lift(const Eigen::VectorXcd& x);

// Isometric real coordinates of a self-adjoint M x M matrix: the M diagonal
// entries, then sqrt(2)*Re and sqrt(2)*Im of each strict upper-triangle entry
// in row-major order. <H, K>_HS = hs_vec(H) . hs_vec(K).
Eigen::VectorXd hs_vec(const Eigen::MatrixXcd& H);
Eigen::MatrixXcd hs_unvec(const Eigen::VectorXd& v, Eigen::Index M);

// Hilbert-Schmidt inner product <H, K>_HS = tr(K^* H), real for self-adjoint
// arguments.
double hs_inner(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& K);

// Basis of the real vector space of self-adjoint M x M matrices: the M
// diagonal patterns sum_{k >= j} E_kk, then for each i < j the pair
// (E_ij + E_ji)/sqrt(2) and (i E_ij - i E_ji)/sqrt(2). Not orthonormal;
// coordinates come from one cached LU factorization.
struct HermitianBasis {
  Eigen::Index M = 0;
  std::vector<Eigen::MatrixXcd> elements;
  Eigen::MatrixXd change_of_basis;  // column k = hs_vec(elements[k])
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;    // factorization of change_of_basis
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_t;  // factorization of its transpose

  // c with sum_k c_k B_k = H.
  Eigen::VectorXd coordinates(const Eigen::MatrixXcd& H) const;
  Eigen::MatrixXcd from_coordinates(const Eigen::VectorXd& c) const;
};

HermitianBasis hermitian_basis(Eigen::Index M);

// N x M^2 real matrix of the operator H -> { <H, phi_n phi_n^*>_HS }_n.
// matrix row n holds the coordinates of phi_n phi_n^* in the basis;
// iso_matrix row n holds hs_vec(phi_n phi_n^*), the representation whose
// singular values are those of the abstract operator. apply() evaluates the
// Hilbert-Schmidt pairings; by the lift identity apply(lift(x)) equals the
// intensity map of x.
struct SuperAnalysisOperator {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd iso_matrix;
  HermitianBasis basis;
  MeasurementEnsemble source;

  Eigen::VectorXd apply(const Eigen::MatrixXcd& H) const;
};

SuperAnalysisOperator super_analysis_operator(const MeasurementEnsemble& Phi,
                                              const HermitianBasis& basis);
SuperAnalysisOperator super_analysis_operator(const MeasurementEnsemble& Phi);

// Orthonormal basis of self-adjoint null-space matrices of the operator,
// together with its singular values (of the isometric representation).
struct OperatorNullspace {
  std::vector<Eigen::MatrixXcd> basis;
  Eigen::VectorXd singular_values;
  int nullity = 0;
};

OperatorNullspace operator_nullspace(const SuperAnalysisOperator& op,
                                     const RankPolicy& policy = {});

// Discrete fractional Fourier transform on C^3: F^alpha = P0 + e^{i alpha pi} P1
// + e^{-i alpha pi / 2} P2 with the spectral projections of the 3 x 3 DFT
// (kernel e^{-2 pi i mn / 3} / sqrt(3)); F^0 = I and F^1 is that DFT.
Eigen::Matrix3cd fractional_dft_3_matrix(double alpha);

// The columns of F^alpha as a complex ensemble (M = N = 3).
MeasurementEnsemble fractional_dft_3(double alpha);

// [I  F^{1/2}  F  F^{3/2}] as a complex ensemble (M = 3, N = 12).
MeasurementEnsemble fractional_dft_3_stack();

}  // namespace phaselab
