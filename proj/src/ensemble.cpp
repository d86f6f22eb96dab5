#include "phaselab/ensemble.hpp"

#include <cmath>
#include <numbers>

namespace phaselab {

namespace {

void check_dim(const char* op, Eigen::Index got, Eigen::Index want) {
  if (got != want) {
    throw input_error(std::string(op) + ": vector has dimension " + std::to_string(got) +
                      ", ensemble expects " + std::to_string(want));
  }
}

void check_real_entries(const char* op, const Eigen::MatrixXcd& A) {
  if (A.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw input_error(std::string(op) + ": real ensemble with nonzero imaginary part");
  }
}

}  // namespace

MeasurementEnsemble make_real_ensemble(const Eigen::MatrixXd& cols) {
  if (cols.rows() == 0 || cols.cols() == 0) throw input_error("ensemble must be nonempty");
  MeasurementEnsemble e;
  e.field = Field::Real;
  e.columns = cols.cast<cplx>();
  return e;
}

MeasurementEnsemble make_complex_ensemble(const Eigen::MatrixXcd& cols) {
  if (cols.rows() == 0 || cols.cols() == 0) throw input_error("ensemble must be nonempty");
  MeasurementEnsemble e;
  e.field = Field::Complex;
  e.columns = cols;
  return e;
}

int numerical_rank(const Eigen::VectorXd& singular_values, Eigen::Index rows,
                   Eigen::Index cols, const RankPolicy& policy) {
  if (singular_values.size() == 0) return 0;
  const double s1 = singular_values(0);
  const double tol = std::max(static_cast<double>(std::max(rows, cols)) *
                                  std::numeric_limits<double>::epsilon() * s1,
                              policy.floor);
  int rank = 0;
  for (Eigen::Index k = 0; k < singular_values.size(); ++k) {
    if (singular_values(k) > tol) ++rank;
  }
  return rank;
}

int numerical_rank(const Eigen::MatrixXd& A, const RankPolicy& policy) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return numerical_rank(svd.singularValues(), A.rows(), A.cols(), policy);
}

int numerical_rank(const Eigen::MatrixXcd& A, const RankPolicy& policy) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  return numerical_rank(svd.singularValues(), A.rows(), A.cols(), policy);
}

Eigen::VectorXd intensity_map(const Eigen::VectorXcd& x, const MeasurementEnsemble& Phi) {
  check_dim("intensity_map", x.size(), Phi.M());
  return (Phi.columns.adjoint() * x).cwiseAbs2();
}

Eigen::VectorXd intensity_map(const Eigen::VectorXd& x, const MeasurementEnsemble& Phi) {
  return intensity_map(Eigen::VectorXcd(x.cast<cplx>()), Phi);
}

Eigen::VectorXd root_intensity_map(const Eigen::VectorXcd& x, const MeasurementEnsemble& Phi) {
  check_dim("root_intensity_map", x.size(), Phi.M());
  return (Phi.columns.adjoint() * x).cwiseAbs();
}

Eigen::VectorXd root_intensity_map(const Eigen::VectorXd& x, const MeasurementEnsemble& Phi) {
  return root_intensity_map(Eigen::VectorXcd(x.cast<cplx>()), Phi);
}

Eigen::VectorXcd b_map(const Eigen::VectorXcd& x, const MeasurementEnsemble& Phi) {
  if (Phi.field != Field::Complex) throw input_error("b_map: complex ensembles only");
  check_dim("b_map", x.size(), Phi.M());
  // <x, phi_n> = (Phi^* x)(n).
  const Eigen::VectorXcd inner = Phi.columns.adjoint() * x;
  return inner.array().square();
}

double projective_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw input_error("projective_distance: dimension mismatch");
  return std::min((x - y).norm(), (x + y).norm());
}

double projective_distance(const Eigen::VectorXcd&, const Eigen::VectorXcd&) {
  throw input_error("projective_distance: torus quotient metric is unsupported");
}

Eigen::VectorXcd canonicalize(const Eigen::VectorXcd& x) {
  Eigen::Index last = -1;
  for (Eigen::Index i = x.size() - 1; i >= 0; --i) {
    if (x(i) != cplx(0.0, 0.0)) {
      last = i;
      break;
    }
  }
  if (last < 0) throw input_error("canonicalize: zero vector");
  const cplx phase = x(last) / std::abs(x(last));
  return x / phase;
}

Eigen::VectorXd canonicalize(const Eigen::VectorXd& x) {
  Eigen::Index last = -1;
  for (Eigen::Index i = x.size() - 1; i >= 0; --i) {
    if (x(i) != 0.0) {
      last = i;
      break;
    }
  }
  if (last < 0) throw input_error("canonicalize: zero vector");
  return x(last) < 0.0 ? Eigen::VectorXd(-x) : x;
}

Eigen::MatrixXcd lift(const Eigen::VectorXcd& x) { return x * x.adjoint(); }

Eigen::VectorXd hs_vec(const Eigen::MatrixXcd& H) {
  const Eigen::Index M = H.rows();
  if (H.cols() != M) throw input_error("hs_vec: square matrix required");
  Eigen::VectorXd v(M * M);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < M; ++j) v(k++) = H(j, j).real();
  const double r2 = std::numbers::sqrt2;
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = i + 1; j < M; ++j) {
      v(k++) = r2 * H(i, j).real();
      v(k++) = r2 * H(i, j).imag();
    }
  }
  return v;
}

Eigen::MatrixXcd hs_unvec(const Eigen::VectorXd& v, Eigen::Index M) {
  if (v.size() != M * M) throw input_error("hs_unvec: length mismatch");
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(M, M);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < M; ++j) H(j, j) = v(k++);
  const double inv_r2 = 1.0 / std::numbers::sqrt2;
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = i + 1; j < M; ++j) {
      const double re = v(k++) * inv_r2;
      const double im = v(k++) * inv_r2;
      H(i, j) = cplx(re, im);
      H(j, i) = cplx(re, -im);
    }
  }
  return H;
}

double hs_inner(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& K) {
  return (K.adjoint() * H).trace().real();
}

Eigen::VectorXd HermitianBasis::coordinates(const Eigen::MatrixXcd& H) const {
  return lu.solve(hs_vec(H));
}

Eigen::MatrixXcd HermitianBasis::from_coordinates(const Eigen::VectorXd& c) const {
  return hs_unvec(change_of_basis * c, M);
}

HermitianBasis hermitian_basis(Eigen::Index M) {
  if (M < 1) throw input_error("hermitian_basis: M must be positive");
  HermitianBasis basis;
  basis.M = M;
  basis.elements.reserve(static_cast<std::size_t>(M * M));
  for (Eigen::Index j = 0; j < M; ++j) {
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(M, M);
    for (Eigen::Index k = j; k < M; ++k) D(k, k) = 1.0;
    basis.elements.push_back(std::move(D));
  }
  const double inv_r2 = 1.0 / std::numbers::sqrt2;
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = i + 1; j < M; ++j) {
      Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(M, M);
      S(i, j) = inv_r2;
      S(j, i) = inv_r2;
      basis.elements.push_back(std::move(S));
      Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(M, M);
      A(i, j) = cplx(0.0, inv_r2);
      A(j, i) = cplx(0.0, -inv_r2);
      basis.elements.push_back(std::move(A));
    }
  }
  basis.change_of_basis.resize(M * M, M * M);
  for (Eigen::Index k = 0; k < M * M; ++k) {
    basis.change_of_basis.col(k) = hs_vec(basis.elements[static_cast<std::size_t>(k)]);
  }
  basis.lu = Eigen::PartialPivLU<Eigen::MatrixXd>(basis.change_of_basis);
  basis.lu_t = Eigen::PartialPivLU<Eigen::MatrixXd>(basis.change_of_basis.transpose());
  return basis;
}

Eigen::VectorXd SuperAnalysisOperator::apply(const Eigen::MatrixXcd& H) const {
  if (H.rows() != basis.M || H.cols() != basis.M) {
    throw input_error("super_analysis_operator: matrix dimension mismatch");
  }
  return iso_matrix * hs_vec(H);
}

SuperAnalysisOperator super_analysis_operator(const MeasurementEnsemble& Phi,
                                              const HermitianBasis& basis) {
  if (basis.M != Phi.M()) throw input_error("super_analysis_operator: basis dimension mismatch");
  SuperAnalysisOperator op;
  op.basis = basis;
  op.source = Phi;
  const Eigen::Index N = Phi.N();
  const Eigen::Index M = Phi.M();
  op.iso_matrix.resize(N, M * M);
  for (Eigen::Index n = 0; n < N; ++n) {
    op.iso_matrix.row(n) = hs_vec(lift(Phi.columns.col(n))).transpose();
  }
  // Row n of `matrix` solves sum_k c_k B_k = phi_n phi_n^*, i.e.
  // change_of_basis * c = hs_vec(phi_n phi_n^*).
  op.matrix.resize(N, M * M);
  for (Eigen::Index n = 0; n < N; ++n) {
    op.matrix.row(n) = basis.lu.solve(op.iso_matrix.row(n).transpose()).transpose();
  }
  return op;
}

SuperAnalysisOperator super_analysis_operator(const MeasurementEnsemble& Phi) {
  return super_analysis_operator(Phi, hermitian_basis(Phi.M()));
}

OperatorNullspace operator_nullspace(const SuperAnalysisOperator& op, const RankPolicy& policy) {
  const Eigen::Index M = op.basis.M;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.iso_matrix, Eigen::ComputeFullV);
  OperatorNullspace ns;
  ns.singular_values = svd.singularValues();
  const int rank = numerical_rank(ns.singular_values, op.iso_matrix.rows(),
                                  op.iso_matrix.cols(), policy);
  ns.nullity = static_cast<int>(M * M) - rank;
  for (Eigen::Index k = rank; k < M * M; ++k) {
    ns.basis.push_back(hs_unvec(svd.matrixV().col(k), M));
  }
  return ns;
}

Eigen::Matrix3cd fractional_dft_3_matrix(double alpha) {
  const double s3 = std::sqrt(3.0);
  Eigen::Matrix3d P0, P1, P2;
  P0 << 3.0 + s3, s3, s3,
        s3, (3.0 - s3) / 2.0, (3.0 - s3) / 2.0,
        s3, (3.0 - s3) / 2.0, (3.0 - s3) / 2.0;
  P0 /= 6.0;
  P1 << 3.0 - s3, -s3, -s3,
        -s3, (3.0 + s3) / 2.0, (3.0 + s3) / 2.0,
        -s3, (3.0 + s3) / 2.0, (3.0 + s3) / 2.0;
  P1 /= 6.0;
  P2 << 0.0, 0.0, 0.0,
        0.0, 0.5, -0.5,
        0.0, -0.5, 0.5;
  // Spectral weights: the even projections carry e^{i alpha pi * k} with k = 0, 1;
  // the odd projection carries the principal fractional power of its eigenvalue -i,
  // e^{-i alpha pi / 2}, so that F^1 is the unitary DFT (kernel e^{-2 pi i mn / 3}).
  const cplx w1 = std::exp(cplx(0.0, alpha * std::numbers::pi));
  const cplx w2 = std::exp(cplx(0.0, -alpha * std::numbers::pi / 2.0));
  return P0.cast<cplx>() + w1 * P1.cast<cplx>() + w2 * P2.cast<cplx>();
}

MeasurementEnsemble fractional_dft_3(double alpha) {
  return make_complex_ensemble(fractional_dft_3_matrix(alpha));
}

MeasurementEnsemble fractional_dft_3_stack() {
  Eigen::MatrixXcd cols(3, 12);
  cols.block<3, 3>(0, 0) = Eigen::Matrix3cd::Identity();
  cols.block<3, 3>(0, 3) = fractional_dft_3_matrix(0.5);
  cols.block<3, 3>(0, 6) = fractional_dft_3_matrix(1.0);
  cols.block<3, 3>(0, 9) = fractional_dft_3_matrix(1.5);
  return make_complex_ensemble(cols);
}

}  // namespace phaselab
