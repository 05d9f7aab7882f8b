#include <doctest.h>

#include "greenlearn/catalog.hpp"
#include "greenlearn/error.hpp"
#include "greenlearn/gp.hpp"
#include "greenlearn/rng.hpp"

#include <cmath>

using namespace greenlearn;
using namespace greenlearn::gp;
using linalg::Matrix;

namespace {

linalg::Grid uniform_grid(double a, double b, std::size_t n) {
  const auto x = linalg::linspace(a, b, n);
  return linalg::make_grid(x, linalg::QuadratureRule::trapezoid, b - a);
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("kernel values") {
  const auto se = KernelSpec::squared_exponential(0.1, 0.0, 1.0);
  CHECK(kernel_eval(se, 0.3, 0.3) == 1.0);
  CHECK(kernel_eval(se, 0.2, 0.3) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(kernel_eval(se, 0.2, 0.3) == doctest::Approx(0.606531).epsilon(1e-6));

  const auto per = KernelSpec::periodic(0.5, 0.0, 1.0);
  CHECK(kernel_eval(per, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kernel_eval(per, 0.2, 1.2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kernel_eval(per, 0.1, 0.4) < 1.0);
}

TEST_CASE("length scale is relative to the interval") {
  const auto se = KernelSpec::squared_exponential(0.03, -1.0, 1.0);
  CHECK(se.length_scale == doctest::Approx(0.06));
  CHECK(se.normalized_length_scale(-1.0, 1.0) == doctest::Approx(0.03));
}

TEST_CASE("sampling is deterministic under a fixed seed") {
  const auto grid = uniform_grid(0.0, 1.0, 50);
  const auto spec = KernelSpec::squared_exponential(0.1, 0.0, 1.0);
  const auto a = sample_gp(spec, grid, 1, 42, 0.0, 1.0);
  const auto b = sample_gp(spec, grid, 1, 42, 0.0, 1.0);
  CHECK(a.values == b.values);
  const auto c = sample_gp(spec, grid, 1, 43, 0.0, 1.0);
  CHECK(a.values != c.values);
}

TEST_CASE("empirical covariance at two points matches the kernel") {
  const auto grid = uniform_grid(0.0, 1.0, 30);
  const auto spec = KernelSpec::squared_exponential(0.15, 0.0, 1.0);
  const auto s = sample_gp(spec, grid, 10000, 9, 0.0, 1.0);
  const int i = 10, j = 14;
  const double cov = s.values.col(i).dot(s.values.col(j)) / 10000.0;
  const double k = kernel_eval(spec, grid.points(i, 0), grid.points(j, 0));
  CHECK(std::abs(cov - k) / k <= 0.05);
  const double var = s.values.col(i).squaredNorm() / 10000.0;
  CHECK(std::abs(var - 1.0) <= 0.05);
}

TEST_CASE("the interpolant reproduces the grid values and is smooth between nodes") {
  const auto grid = uniform_grid(0.0, 1.0, 40);
  const auto spec = KernelSpec::squared_exponential(0.1, 0.0, 1.0);
  const auto s = sample_gp(spec, grid, 3, 5, 0.0, 1.0);
  const Matrix at_nodes = s.evaluate(grid.points);
  CHECK((at_nodes - s.values).cwiseAbs().maxCoeff() <= 1e-6 * s.values.cwiseAbs().maxCoeff());
}

TEST_CASE("resolution bound") {
  const auto grid = uniform_grid(-1.0, 1.0, 200);
  const auto ok = KernelSpec::squared_exponential(0.03, -1.0, 1.0);
  CHECK_FALSE(sample_gp(ok, grid, 1, 1, -1.0, 1.0).below_resolution);

  const auto fine = KernelSpec::squared_exponential(0.003, -1.0, 1.0);
  CHECK(sample_gp(fine, grid, 1, 1, -1.0, 1.0, {false}).below_resolution);
  CHECK_THROWS_AS(sample_gp(fine, grid, 1, 1, -1.0, 1.0, {true}), UsageError);
}

TEST_CASE("disk draws have unit variance") {
  const auto grid = catalog::disk_grid(6);
  KernelSpec spec;
  spec.length_scale = 0.4;
  const auto s = sample_gp_disk(spec, grid, 10000, 3);
  const Matrix k = kernel_matrix(spec, grid.points);
  for (Eigen::Index i = 0; i < k.rows(); ++i) CHECK(k(i, i) == 1.0);
  const double var = s.values.col(7).squaredNorm() / 10000.0;
  CHECK(std::abs(var - 1.0) <= 0.05);
  const auto again = sample_gp_disk(spec, grid, 2, 3);
  CHECK(again.values == sample_gp_disk(spec, grid, 2, 3).values);
}

TEST_CASE("normal variates have unit variance and derived seeds differ") {
  Rng rng(8);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) <= 0.01);
  CHECK(std::abs(s2 / n - 1.0) <= 0.01);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

}  // TEST_SUITE
