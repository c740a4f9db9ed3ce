#include <Eigen/LU>
#include <random>

#include "doctest.h"
#include "htc/banded.hpp"

namespace {

template <typename Scalar>
htc::BandedMatrix<Scalar> random_banded(Eigen::Index n, Eigen::Index kl, Eigen::Index ku, std::mt19937& rng,
                                        bool dominant) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  htc::BandedMatrix<Scalar> a(n, kl, ku);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - kl); j <= std::min(n - 1, i + ku); ++j)
      a(i, j) = static_cast<Scalar>(u(rng));
  if (dominant)
    for (Eigen::Index i = 0; i < n; ++i) a(i, i) += static_cast<Scalar>(kl + ku + 1);
  return a;
}

}  // namespace

TEST_SUITE("banded") {
  TEST_CASE("matches dense LU on random pentadiagonal systems") {
    std::mt19937 rng(7);
    for (Eigen::Index n : {1, 2, 3, 5, 17, 64}) {
      auto a = random_banded<double>(n, 2, 2, rng, false);
      const Eigen::MatrixXd dense = a.toDense();
      const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
      const htc::BandedLU<double> lu(a);
      REQUIRE_FALSE(lu.singular_column());
      const Eigen::VectorXd x = lu.solve(b);
      const Eigen::VectorXd ref = dense.fullPivLu().solve(b);
      CHECK((x - ref).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + ref.cwiseAbs().maxCoeff()));
      CHECK((dense * x - b).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + b.cwiseAbs().maxCoeff()));
    }
  }

  TEST_CASE("pivoting handles a zero leading diagonal") {
    htc::BandedMatrix<double> a(3, 2, 2);
    a(0, 0) = 0.0;
    a(0, 1) = 1.0;
    a(1, 0) = 1.0;
    a(1, 1) = 0.0;
    a(1, 2) = 2.0;
    a(2, 0) = 3.0;
    a(2, 2) = 1.0;
    const Eigen::Vector3d b(1.0, 2.0, 3.0);
    const Eigen::VectorXd x = htc::BandedLU<double>(a).solve(b);
    CHECK((a.toDense() * x - b).norm() < 1e-14);
  }

  TEST_CASE("product agrees with dense product") {
    std::mt19937 rng(3);
    auto a = random_banded<double>(12, 1, 3, rng, false);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(12, 0.0, 1.0);
    CHECK((a * x - a.toDense() * x).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("singular matrix is reported") {
    htc::BandedMatrix<double> a(4, 2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) a(i, i) = 1.0;
    a(2, 2) = 0.0;
    a(2, 1) = 0.0;
    CHECK(htc::BandedLU<double>(a).singular_column().has_value());
  }

  TEST_CASE_TEMPLATE("scalar types", Scalar, float, double, long double) {
    std::mt19937 rng(11);
    auto a = random_banded<Scalar>(20, 2, 2, rng, true);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(20);
    const auto x = htc::BandedLU<Scalar>(a).solve(b);
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    CHECK(static_cast<double>((a.toDense() * x - b).cwiseAbs().maxCoeff()) <= static_cast<double>(100 * eps));
  }
}
