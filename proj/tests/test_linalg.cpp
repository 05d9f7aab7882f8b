#include <doctest.h>

#include "greenlearn/error.hpp"
#include "greenlearn/linalg.hpp"
#include "greenlearn/rng.hpp"

#include <cmath>

using namespace greenlearn;
using namespace greenlearn::linalg;

TEST_SUITE("linalg") {

TEST_CASE("trapezoid weights on small grids") {
  const std::vector<double> three{0.0, 0.5, 1.0};
  const auto w = trapezoid_weights(three);
  CHECK(w == std::vector<double>{0.25, 0.5, 0.25});
  const std::vector<double> two{0.0, 1.0};
  CHECK(trapezoid_weights(two) == std::vector<double>{0.5, 0.5});
  const std::vector<double> bad{0.0, 0.0};
  CHECK_THROWS_AS(trapezoid_weights(bad), UsageError);
}

TEST_CASE("trapezoid integrates x^2 on 101 points") {
  const auto x = linspace(0.0, 1.0, 101);
  const auto w = trapezoid_weights(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i] * x[i];
  CHECK(std::abs(s - 1.0 / 3.0) <= 1e-4);
}

TEST_CASE("trapezoid error falls like h^2") {
  double previous = 0.0;
  for (std::size_t n : {9, 17, 33, 65}) {
    const auto x = linspace(0.0, 2.0, n);
    const auto w = trapezoid_weights(x);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * std::cos(x[i]);
    const double err = std::abs(s - std::sin(2.0));
    if (previous > 0.0) {
      CHECK(previous / err >= 3.5);
      CHECK(previous / err <= 4.5);
    }
    previous = err;
  }
}

TEST_CASE("Monte Carlo weights are uniform") {
  const std::vector<double> four{0.1, 0.2, 0.3, 0.9};
  for (double v : montecarlo_weights(four, 1.0)) CHECK(v == doctest::Approx(0.25));
  const auto ten = linspace(-1.0, 1.0, 10);
  for (double v : montecarlo_weights(ten, 2.0)) CHECK(v == doctest::Approx(0.2));
}

TEST_CASE("Monte Carlo rule integrates x over random points") {
  Rng rng(3);
  std::vector<double> x(100000);
  for (double& v : x) v = rng.uniform();
  const auto w = montecarlo_weights(x, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
  CHECK(std::abs(s - 0.5) <= 1e-2);
}

TEST_CASE("Cholesky factors") {
  const auto id = cholesky_jittered(Matrix::Identity(3, 3));
  CHECK(id.jitter == 0.0);
  CHECK((id.lower - Matrix::Identity(3, 3)).norm() == 0.0);

  Matrix a(2, 2);
  a << 4, 2, 2, 5;
  const auto f = cholesky_jittered(a);
  Matrix expected(2, 2);
  expected << 2, 0, 1, 2;
  CHECK((f.lower - expected).norm() <= 1e-14);
  CHECK(f.jitter == 0.0);
}

TEST_CASE("Cholesky of a squared-exponential matrix needs at most small jitter") {
  const auto x = linspace(0.0, 1.0, 100);
  Matrix k(100, 100);
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) k(i, j) = std::exp(-0.5 * std::pow((x[i] - x[j]) / 0.06, 2));
  const auto f = cholesky_jittered(k);
  CHECK(f.jitter <= 1e-8 * k.diagonal().mean());
  CHECK((f.lower * f.lower.transpose() - k).norm() / k.norm() <= 1e-6);
}

TEST_CASE("Cholesky rejects matrices that stay indefinite") {
  Matrix a(2, 2);
  a << 1, 0, 0, -1;
  CHECK_THROWS_AS(cholesky_jittered(a), NumericError);
}

TEST_CASE("symmetric eigendecomposition") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 1.0, 2.0;
  const auto e = sym_eig(d);
  CHECK(e.values(0) == doctest::Approx(2.0));
  CHECK(e.values(1) == doctest::Approx(1.0));

  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  const auto s = sym_eig(swap);
  CHECK(s.values(0) == doctest::Approx(1.0));
  CHECK(s.values(1) == doctest::Approx(-1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(s.vectors(0, 0)) - r) <= 1e-12);
  CHECK(std::abs(s.vectors(0, 0) - s.vectors(1, 0)) <= 1e-12);  // (1, 1) / sqrt 2
  CHECK(std::abs(s.vectors(0, 1) + s.vectors(1, 1)) <= 1e-12);  // (1, -1) / sqrt 2
}

TEST_CASE("eigendecomposition reconstructs a random symmetric matrix") {
  Rng rng(17);
  Matrix a(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) a(i, j) = rng.normal();
  a = (a + a.transpose()).eval();
  const auto e = sym_eig(a);
  const Matrix back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  CHECK((back - a).norm() / a.norm() <= 1e-10);
  for (int k = 1; k < 50; ++k) CHECK(std::abs(e.values(k - 1)) >= std::abs(e.values(k)));
}

TEST_CASE("singular values") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2.0, 3.0;
  const auto s = svd(d);
  CHECK(s.sigma(0) == doctest::Approx(3.0));
  CHECK(s.sigma(1) == doctest::Approx(2.0));

  Vector u(4), v(3);
  u << 1, -2, 0.5, 3;
  v << 2, 1, -1;
  const auto r1 = svd(u * v.transpose());
  CHECK(r1.sigma(0) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
  CHECK(r1.sigma(1) <= 1e-12 * r1.sigma(0));
}

TEST_CASE("Frobenius norm equals the root sum of squared singular values") {
  Rng rng(4);
  Matrix a(40, 60);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = rng.normal();
  const auto s = svd(a);
  CHECK(frobenius(a) * frobenius(a) == doctest::Approx(s.sigma.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("linspace keeps both ends exact") {
  const auto x = linspace(-1.0, 1.0, 7);
  CHECK(x.front() == -1.0);
  CHECK(x.back() == 1.0);
  CHECK(x[3] == 0.0);
}

}  // TEST_SUITE
