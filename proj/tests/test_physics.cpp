#include <doctest.h>

#include "greenlearn/bvp.hpp"
#include "greenlearn/rng.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace greenlearn;
using namespace greenlearn::bvp;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

struct Chain {
  double h;
  std::vector<double> v;
  std::vector<cplx> psi;
};

Chain harmonic_chain(std::size_t m, std::uint64_t seed) {
  Chain c{6.0 / static_cast<double>(m + 1), std::vector<double>(m), std::vector<cplx>(m)};
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = -3.0 + c.h * static_cast<double>(i + 1);
    c.v[i] = x * x;
    c.psi[i] = cplx(rng.normal(), rng.normal()) * std::exp(-x * x);
  }
  return c;
}

double distance(const std::vector<cplx>& a, const std::vector<cplx>& b, double h) {
  std::vector<cplx> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return discrete_l2_norm(d, h);
}

}  // namespace

TEST_SUITE("physics") {

TEST_CASE("Crank-Nicolson keeps zero at zero") {
  const auto c = harmonic_chain(50, 1);
  const std::vector<cplx> zero(50);
  for (const auto& z : crank_nicolson_step(c.v, c.h, 0.02, zero)) CHECK(z == cplx(0.0, 0.0));
}

TEST_CASE("Crank-Nicolson preserves the norm of a random state") {
  const auto c = harmonic_chain(400, 7);
  const auto next = crank_nicolson_step(c.v, c.h, 0.02, c.psi);
  const double ratio = discrete_l2_norm(next, c.h) / discrete_l2_norm(c.psi, c.h);
  CHECK(std::abs(ratio - 1.0) <= 1e-10);
}

TEST_CASE("two half steps agree with one full step to third order") {
  // The Cayley map matches exp(-i dt H) through dt^2, so the local
  // difference between one step and two half steps shrinks like dt^3.
  auto c = harmonic_chain(300, 3);
  for (std::size_t i = 0; i < c.psi.size(); ++i) {
    const double x = -3.0 + c.h * static_cast<double>(i + 1);
    c.psi[i] = std::exp(-4.0 * x * x) * std::polar(1.0, x);  // negligible at the walls
  }
  auto gap = [&](double dt) {
    const auto full = crank_nicolson_step(c.v, c.h, dt, c.psi);
    const auto half = crank_nicolson_step(c.v, c.h, dt / 2, crank_nicolson_step(c.v, c.h, dt / 2, c.psi));
    return distance(full, half, c.h);
  };
  const double ratio = gap(0.004) / gap(0.002);
  CHECK(ratio >= 7.0);
  CHECK(ratio <= 9.0);
}

TEST_CASE("disk Poisson with zero and constant forcing") {
  const PolarGrid grid;
  const auto nodes = grid.nodes();
  REQUIRE(static_cast<std::size_t>(nodes.rows()) == grid.unknowns());

  const std::vector<double> zero(grid.unknowns(), 0.0);
  const auto u0 = solve_poisson_disk(grid, zero);
  for (double v : u0.values) CHECK(v == 0.0);

  // laplacian(1 - r^2) = -4 with zero boundary values.
  const std::vector<double> four(grid.unknowns(), -4.0);
  const auto u = solve_poisson_disk(grid, four);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
    const double r2 = nodes.row(i).squaredNorm();
    worst = std::max(worst, std::abs(u.values[static_cast<std::size_t>(i)] - (1.0 - r2)));
  }
  CHECK(worst <= 1e-10);
  CHECK(u(0.3, -0.4) == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(std::abs(u(0.0, 1.0)) <= 1e-12);
}

TEST_CASE("disk Poisson matches quadrature of the closed-form kernel") {
  const auto f = [](double x, double y) { return std::exp(-8.0 * ((x - 0.2) * (x - 0.2) + (y + 0.1) * (y + 0.1))); };
  const PolarGrid grid;
  const auto nodes = grid.nodes();
  std::vector<double> values(grid.unknowns());
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) values[static_cast<std::size_t>(i)] = f(nodes(i, 0), nodes(i, 1));
  const auto u = solve_poisson_disk(grid, values);

  // Midpoint polar quadrature; the logarithmic singularity is integrable and
  // the evaluation points never coincide with quadrature nodes.
  const auto exact = exact_green("poisson_disk");
  const int nr = 400, nt = 400;
  auto quad = [&](double x, double y) {
    double s = 0.0;
    for (int i = 0; i < nr; ++i) {
      const double r = (i + 0.5) / nr;
      for (int j = 0; j < nt; ++j) {
        const double t = 2 * kPi * (j + 0.37) / nt;
        const double xt = r * std::cos(t), yt = r * std::sin(t);
        s += exact.green_disk(x, y, xt, yt) * f(xt, yt) * r;
      }
    }
    return s * (1.0 / nr) * (2 * kPi / nt);
  };
  double worst = 0.0, scale = 0.0;
  for (auto [x, y] : {std::pair{0.0, 0.0}, {0.3, 0.1}, {-0.5, 0.4}, {0.1, -0.7}}) {
    const double q = quad(x, y);
    worst = std::max(worst, std::abs(q - u(x, y)));
    scale = std::max(scale, std::abs(q));
  }
  CHECK(worst <= 0.01 * scale);
}

}  // TEST_SUITE
