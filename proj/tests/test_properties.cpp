#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "phaselab/ensemble.hpp"
#include "phaselab/injectivity.hpp"
#include "phaselab/rng.hpp"
#include "phaselab/stability_avg.hpp"
#include "phaselab/stability_worst.hpp"
#include "phaselab/types.hpp"

#include "common.hpp"

using namespace phaselab;

namespace {

MeasurementEnsemble wide_three_by_eight() {
  using namespace std::complex_literals;
  Eigen::MatrixXcd cols(3, 8);
  cols << 2.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1i,
          -1.0, 0.0, 0.0, 1.0, 1.0, -1.0, -2.0, 2.0,
          0.0, 1.0, -1.0, 1.0, -1.0, 2i, 1i, -1.0;
  return make_complex_ensemble(cols);
}

MeasurementEnsemble random_ensemble(Field field, Eigen::Index M, Eigen::Index N,
                                    std::uint64_t seed) {
  return field == Field::Real ? testutil::random_real_ensemble(M, N, seed)
                              : testutil::random_complex_ensemble(M, N, seed);
}

// Interior point of the canonical domain: last coordinate pushed onto the
// positive real axis.
Eigen::VectorXcd interior_theta(Eigen::Index M, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXcd t = rng.complex_normal_vector(M);
  t(M - 1) = cplx(0.5 + std::abs(t(M - 1)), 0.0);
  return canonicalize(t);
}

}  // namespace

TEST_CASE("lift identity across random instances") {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 1000; ++seed) {
    const Field field = seed % 2 == 0 ? Field::Real : Field::Complex;
    Rng rng(mix_seed(1000, seed));
    const Eigen::Index M = 1 + static_cast<Eigen::Index>(rng.uniform01() * 6);
    const Eigen::Index N = 1 + static_cast<Eigen::Index>(rng.uniform01() * (2 * M + 3));
    const MeasurementEnsemble Phi = random_ensemble(field, M, N, mix_seed(2000, seed));
    const Eigen::VectorXcd x = field == Field::Real
                                   ? Eigen::VectorXcd(rng.normal_vector(M).cast<cplx>())
                                   : rng.complex_normal_vector(M);
    const SuperAnalysisOperator op = super_analysis_operator(Phi);
    const Eigen::VectorXd via_lift = op.apply(lift(x));
    const Eigen::VectorXd direct = intensity_map(x, Phi);
    for (Eigen::Index n = 0; n < N; ++n) {
      const double tol =
          1e-10 * (1.0 + x.squaredNorm() * Phi.columns.col(n).squaredNorm());
      REQUIRE(std::abs(via_lift(n) - direct(n)) <= tol);
    }
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("gauge invariance of the intensity map") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const MeasurementEnsemble Phi = testutil::random_complex_ensemble(3, 6, seed);
    Rng rng(mix_seed(3000, seed));
    const Eigen::VectorXcd x = rng.complex_normal_vector(3);
    const Eigen::VectorXd base = intensity_map(x, Phi);
    for (int k = 0; k < 4; ++k) {
      const cplx c = std::exp(cplx(0.0, 2.0 * std::numbers::pi * rng.uniform01()));
      const Eigen::VectorXcd cx = c * x;
      REQUIRE((intensity_map(cx, Phi) - base).norm() <= 1e-12 * (1.0 + base.norm()));
    }
  }
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const MeasurementEnsemble Phi = testutil::random_real_ensemble(3, 6, seed);
    Rng rng(mix_seed(3500, seed));
    const Eigen::VectorXd x = rng.normal_vector(3);
    const Eigen::VectorXd nx = -x;
    REQUIRE(intensity_map(x, Phi) == intensity_map(nx, Phi));
  }
}

TEST_CASE("projective distance is a metric on the sign quotient") {
  Rng rng(404);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd x = rng.normal_vector(4);
    const Eigen::VectorXd y = rng.normal_vector(4);
    const Eigen::VectorXd z = rng.normal_vector(4);
    const double dxy = projective_distance(x, y);
    const double dyx = projective_distance(y, x);
    const double dxz = projective_distance(x, z);
    const double dyz = projective_distance(y, z);
    REQUIRE(dxy >= 0.0);
    REQUIRE(dxy == dyx);
    REQUIRE(projective_distance(x, x) == 0.0);
    REQUIRE(projective_distance(x, Eigen::VectorXd(-y)) == dxy);
    REQUIRE(dxz <= dxy + dyz + 1e-12);
  }
}

TEST_CASE("canonicalize is idempotent and gauge invariant") {
  Rng rng(505);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXcd x = rng.complex_normal_vector(3);
    const Eigen::VectorXcd canon = canonicalize(x);
    REQUIRE((canonicalize(canon) - canon).norm() <= 1e-12 * canon.norm());
    const cplx c = std::exp(cplx(0.0, 2.0 * std::numbers::pi * rng.uniform01()));
    const Eigen::VectorXcd cx = c * x;
    REQUIRE((canonicalize(cx) - canon).norm() <= 1e-12 * canon.norm());
  }
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = rng.normal_vector(3);
    const Eigen::VectorXd canon = canonicalize(x);
    REQUIRE(canonicalize(canon) == canon);
    REQUIRE(canonicalize(Eigen::VectorXd(-x)) == canon);
  }
}

TEST_CASE("b map is even") {
  Rng rng(606);
  for (int i = 0; i < 200; ++i) {
    const MeasurementEnsemble Phi =
        testutil::random_complex_ensemble(3, 5, mix_seed(606, static_cast<std::uint64_t>(i)));
    const Eigen::VectorXcd x = rng.complex_normal_vector(3);
    const Eigen::VectorXcd nx = -x;
    const Eigen::VectorXcd bx = b_map(x, Phi);
    REQUIRE((b_map(nx, Phi) - bx).norm() <= 1e-12 * (1.0 + bx.norm()));
  }
}

TEST_CASE("witnesses are sound and lemma consistent") {
  std::string why;
  SUBCASE("real pipeline on deficient ensembles") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const Eigen::Index M = 2 + static_cast<Eigen::Index>(seed % 3);
      const Eigen::Index N = std::max<Eigen::Index>(1, 2 * M - 2 - (seed % 2));
      const MeasurementEnsemble Phi = testutil::random_real_ensemble(M, N, seed);
      const InjectivityVerdict v = real_injectivity(Phi);
      REQUIRE(v.status == Status::NotInjective);
      REQUIRE(v.witness.has_value());
      REQUIRE_MESSAGE(testutil::witness_sound(Phi, *v.witness, &why), why);
    }
  }
  SUBCASE("complex pipeline below the conjectured threshold") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const Eigen::Index M = 2 + static_cast<Eigen::Index>(seed % 2);
      const Eigen::Index N = 4 * M - 5 - static_cast<Eigen::Index>(seed % 2);
      const MeasurementEnsemble Phi = testutil::random_complex_ensemble(M, N, seed);
      const InjectivityVerdict v = nullspace_classifier(Phi);
      REQUIRE(v.status == Status::NotInjective);
      REQUIRE(v.witness.has_value());
      REQUIRE_MESSAGE(testutil::witness_sound(Phi, *v.witness, &why), why);
      REQUIRE_MESSAGE(testutil::lemma_consistent(Phi, *v.witness, &why), why);
    }
  }
}

TEST_CASE("proven cases of the 4M - 4 threshold") {
  SUBCASE("generic ensembles at the threshold are injective") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      CHECK(nullspace_classifier(testutil::random_complex_ensemble(2, 4, seed)).status ==
            Status::Injective);
      CHECK(nullspace_classifier(testutil::random_complex_ensemble(3, 8, seed + 50)).status ==
            Status::Injective);
    }
  }
  SUBCASE("below the threshold nothing is injective") {
    for (Eigen::Index M = 2; M <= 3; ++M) {
      for (Eigen::Index N = 1; N < 4 * M - 4; ++N) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
          const MeasurementEnsemble Phi =
              testutil::random_complex_ensemble(M, N, mix_seed(seed, M, N));
          CHECK(nullspace_classifier(Phi).status == Status::NotInjective);
        }
      }
    }
  }
}

TEST_CASE("b map collision search on the injective wide ensemble") {
  const MeasurementEnsemble Phi = wide_three_by_eight();
  Rng rng(707);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXcd x = rng.complex_normal_vector(3);
    const Eigen::VectorXcd y = rng.complex_normal_vector(3);
    const Eigen::VectorXcd bx = b_map(x, Phi);
    const Eigen::VectorXcd by = b_map(y, Phi);
    const double scale = std::max(bx.norm(), by.norm());
    REQUIRE((bx - by).norm() > 1e-6 * scale);
  }
}

TEST_CASE("real injectivity matches a grid collision search in the plane") {
  const int grid = 360;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Eigen::Index N = 2 + static_cast<Eigen::Index>(seed % 4);
    const MeasurementEnsemble Phi = testutil::random_real_ensemble(2, N, seed);
    const InjectivityVerdict v = real_injectivity(Phi);
    if (v.status != Status::Injective) continue;
    // Directions cover the sign quotient once over [0, pi).
    for (int i = 0; i < grid; ++i) {
      const double a = std::numbers::pi * i / grid;
      const Eigen::VectorXd x = Eigen::Vector2d(std::cos(a), std::sin(a));
      const Eigen::VectorXd Ax = intensity_map(x, Phi);
      for (int j = i + 1; j < grid; ++j) {
        const double b = std::numbers::pi * j / grid;
        const Eigen::VectorXd y = Eigen::Vector2d(std::cos(b), std::sin(b));
        if (projective_distance(x, y) <= 1e-3) continue;
        REQUIRE((intensity_map(y, Phi) - Ax).norm() > 1e-8 * (1.0 + Ax.norm()));
      }
    }
  }
}

TEST_CASE("scp and complement property tell the same degeneracy story") {
  int seen_true = 0, seen_false = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(mix_seed(808, seed));
    const Eigen::Index M = 2 + static_cast<Eigen::Index>(rng.uniform01() * 3);
    const Eigen::Index N =
        std::max<Eigen::Index>(2, 1 + static_cast<Eigen::Index>(rng.uniform01() * 12));
    const MeasurementEnsemble Phi = testutil::random_real_ensemble(M, N, seed);
    const SCPReport r = scp_sigma(Phi);
    const auto [cp, witness] = complement_property(Phi);
    if (r.sigma > 1e-8) REQUIRE(cp);
    if (!cp) {
      REQUIRE(r.sigma <= 1e-8);
      ++seen_false;
    } else {
      ++seen_true;
    }
  }
  CHECK(seen_true > 0);
  CHECK(seen_false > 0);
}

TEST_CASE("scale covariance of the stability quantities") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const MeasurementEnsemble Phi = testutil::random_real_ensemble(3, 7, seed);
    MeasurementEnsemble big = Phi;
    const double c = 0.5 + static_cast<double>(seed);
    big.columns *= c;
    const SCPReport r1 = scp_sigma(Phi);
    const SCPReport r2 = scp_sigma(big);
    const double b1 = operator_norm(Phi);
    const double b2 = operator_norm(big);
    REQUIRE(std::abs(r2.sigma - c * r1.sigma) <= 1e-10 * (1.0 + c * r1.sigma));
    REQUIRE(std::abs(b2 - c * b1) <= 1e-10 * (1.0 + c * b1));
    const double k1 = 2.0 * b1 / r1.sigma;
    const double k2 = 2.0 * b2 / r2.sigma;
    REQUIRE(std::abs(k2 - k1) <= 1e-9 * k1);
  }
}

TEST_CASE("sampled ratios respect the lower sandwich bound") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MeasurementEnsemble Phi = testutil::random_real_ensemble(3, 7, seed);
    const SCPReport r = scp_sigma(Phi);
    REQUIRE(r.sigma > 0.0);
    const RatioSampleReport s = sample_lipschitz_ratios(Phi, 2000, seed);
    REQUIRE(s.min_ratio >= r.sigma - 1e-9);
  }
}

TEST_CASE("planar grid infimum lands in the sandwich") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const MeasurementEnsemble Phi = testutil::random_real_ensemble(2, 4, seed);
    const SCPReport r = scp_sigma(Phi);
    REQUIRE(r.sigma > 0.0);
    const double inf = grid_infimum_ratio(Phi, 720, r);
    REQUIRE(inf >= r.sigma - 1e-6);
    REQUIRE(inf <= std::numbers::sqrt2 * r.sigma + 1e-6);
  }
}

TEST_CASE("the curve gap closes as M grows") {
  const double b = curve_b(3.0);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (const int M : {2, 8, 32, 128}) {
    const double gap = b - curve_a(3.0, M);
    CHECK(gap > 0.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("information matrices are symmetric and positive semidefinite") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Field field = seed % 2 == 0 ? Field::Real : Field::Complex;
    const Eigen::Index M = 2 + static_cast<Eigen::Index>(seed % 3);
    const MeasurementEnsemble Phi = random_ensemble(field, M, 2 * M + 1, seed);
    Eigen::MatrixXd J;
    if (field == Field::Real) {
      Rng rng(mix_seed(909, seed));
      J = fisher_matrix(Eigen::VectorXd(rng.normal_vector(M)), Phi, NoiseModel{1.0}).J;
    } else {
      J = fisher_matrix(interior_theta(M, mix_seed(909, seed)), Phi, NoiseModel{1.0}).J;
    }
    REQUIRE((J - J.transpose()).norm() <= 1e-12 * (1.0 + J.norm()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    REQUIRE(eig.eigenvalues()(0) >=
            -1e-10 * std::max(eig.eigenvalues()(eig.eigenvalues().size() - 1), 0.0));
  }
}

TEST_CASE("injectivity makes the information matrix definite") {
  SUBCASE("wide complex ensemble at interior points") {
    const MeasurementEnsemble Phi = wide_three_by_eight();
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const FisherReport rep =
          fisher_matrix(interior_theta(3, mix_seed(111, seed)), Phi, NoiseModel{1.0});
      REQUIRE(rep.positive_definite);
    }
  }
  SUBCASE("real full-spark ensembles with N = 2M - 1") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const Eigen::Index M = 2 + static_cast<Eigen::Index>(seed % 3);
      const MeasurementEnsemble Phi = testutil::random_real_ensemble(M, 2 * M - 1, seed);
      REQUIRE(full_spark(Phi));
      Rng rng(mix_seed(222, seed));
      const FisherReport rep =
          fisher_matrix(Eigen::VectorXd(rng.normal_vector(M)), Phi, NoiseModel{1.0});
      REQUIRE(rep.positive_definite);
    }
  }
}

TEST_CASE("complement property violations are information degeneracies") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const MeasurementEnsemble Phi = testutil::random_real_ensemble(3, 4, seed);
    const auto [cp, witness] = complement_property(Phi);
    REQUIRE(!cp);
    // theta orthogonal to the complement side kills those Psi columns; the
    // surviving columns live in the deficient S side.
    std::vector<int> comp;
    for (int n = 0; n < 4; ++n) {
      if ((witness->mask >> n & 1ULL) == 0) comp.push_back(n);
    }
    Eigen::MatrixXd sub(3, static_cast<Eigen::Index>(comp.size()));
    for (std::size_t k = 0; k < comp.size(); ++k) sub.col(k) = Phi.real().col(comp[k]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullU);
    const Eigen::VectorXd theta = svd.matrixU().col(2);
    REQUIRE((sub.transpose() * theta).norm() <= 1e-10);
    const FisherReport rep = fisher_matrix(theta, Phi, NoiseModel{1.0});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rep.J);
    const Eigen::VectorXd lam = eig.eigenvalues();
    REQUIRE(lam(0) <= 1e-8 * lam(lam.size() - 1));
    REQUIRE(!rep.positive_definite);
  }
}

TEST_CASE("monte carlo information approaches the closed form") {
  const std::uint64_t trials = 100000;
  {
    Eigen::MatrixXd cols(2, 3);
    cols << 1, 0, 1,
            0, 1, 1;
    const MeasurementEnsemble Phi = make_real_ensemble(cols);
    Eigen::VectorXd theta(2);
    theta << 1, 2;
    const Eigen::MatrixXd J_mc = monte_carlo_fisher(theta, Phi, NoiseModel{1.0}, trials, 1);
    const Eigen::MatrixXd J = fisher_matrix(theta, Phi, NoiseModel{1.0}).J;
    CHECK((J_mc - J).norm() <= 0.05 * J.norm());
  }
  {
    const MeasurementEnsemble Phi = wide_three_by_eight();
    const Eigen::VectorXcd theta = interior_theta(3, 77);
    const Eigen::MatrixXd J_mc = monte_carlo_fisher(theta, Phi, NoiseModel{1.0}, trials, 2);
    const Eigen::MatrixXd J = fisher_matrix(theta, Phi, NoiseModel{1.0}).J;
    CHECK((J_mc - J).norm() <= 0.05 * J.norm());
  }
  {
    const MeasurementEnsemble Phi = testutil::random_real_ensemble(3, 6, 99);
    Rng rng(100);
    const Eigen::VectorXd theta = rng.normal_vector(3);
    const Eigen::MatrixXd J_mc = monte_carlo_fisher(theta, Phi, NoiseModel{1.0}, trials, 3);
    const Eigen::MatrixXd J = fisher_matrix(theta, Phi, NoiseModel{1.0}).J;
    CHECK((J_mc - J).norm() <= 0.05 * J.norm());
  }
}

TEST_CASE("the score matches finite differences everywhere") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Field field = seed % 2 == 0 ? Field::Real : Field::Complex;
    Rng rng(mix_seed(313, seed));
    const Eigen::Index M = 2 + static_cast<Eigen::Index>(seed % 3);
    const Eigen::Index N = M + 1 + static_cast<Eigen::Index>(seed % 4);
    const MeasurementEnsemble Phi = random_ensemble(field, M, N, seed);
    const Eigen::VectorXcd theta = field == Field::Real
                                       ? Eigen::VectorXcd(rng.normal_vector(M).cast<cplx>())
                                       : rng.complex_normal_vector(M);
    const Eigen::VectorXd y =
        intensity_map(theta, Phi) + Eigen::VectorXd(rng.normal_vector(N));
    const double sigma = 0.5 + rng.uniform01();
    const Eigen::VectorXd s = score_vector(y, theta, Phi, NoiseModel{sigma});
    const Eigen::VectorXd g = testutil::fd_score(y, theta, Phi, sigma);
    REQUIRE((s - g).norm() <= 1e-6 * (1.0 + s.norm()));
  }
}
