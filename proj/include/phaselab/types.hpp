#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace phaselab {

using cplx = std::complex<double>;

// Malformed input, violated precondition, or unsupported request. Exit code 2.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Requested enumeration exceeds its configured budget. Exit code 3.
struct budget_error : std::runtime_error {
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

enum class Field { Real, Complex };

// Measurement ensemble phi_1..phi_N stored as the columns of an M x N matrix.
// Real ensembles keep zero imaginary parts in the same complex storage.
struct MeasurementEnsemble {
  Field field = Field::Real;
  Eigen::MatrixXcd columns;

  Eigen::Index M() const { return columns.rows(); }
  Eigen::Index N() const { return columns.cols(); }
  bool is_real() const { return field == Field::Real; }
  Eigen::MatrixXd real() const { return columns.real(); }
};

MeasurementEnsemble make_real_ensemble(const Eigen::MatrixXd& cols);
MeasurementEnsemble make_complex_ensemble(const Eigen::MatrixXcd& cols);

// Numerical rank: singular value sigma_k counts as nonzero iff
// sigma_k > max(max(rows, cols) * eps * sigma_1, floor).
struct RankPolicy {
  double floor = 1e-10;
};

int numerical_rank(const Eigen::VectorXd& singular_values, Eigen::Index rows,
                   Eigen::Index cols, const RankPolicy& policy = {});

// Rank of an arbitrary dense matrix through its SVD.
int numerical_rank(const Eigen::MatrixXd& A, const RankPolicy& policy = {});
int numerical_rank(const Eigen::MatrixXcd& A, const RankPolicy& policy = {});

}  // namespace phaselab
