#include <doctest.h>

#include "greenlearn/bvp.hpp"
#include "greenlearn/catalog.hpp"
#include "greenlearn/error.hpp"
#include "greenlearn/rng.hpp"

#include <cmath>
#include <numbers>

using namespace greenlearn;
using namespace greenlearn::bvp;

namespace {

constexpr double kPi = std::numbers::pi;

OperatorSpec constant_operator(double a, double b, double c2, double c1, double c0, std::vector<Constraint> cons) {
  OperatorSpec op;
  op.a = a;
  op.b = b;
  op.a2 = [c2](double) { return c2; };
  op.a1 = [c1](double) { return c1; };
  op.a0 = [c0](double) { return c0; };
  op.constraints = std::move(cons);
  return op;
}

double max_deviation(const Solution& u, const std::function<double(double)>& f, double a, double b, int n = 401) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * i / (n - 1.0);
    worst = std::max(worst, std::abs(u(x) - f(x)));
  }
  return worst;
}

}  // namespace

TEST_SUITE("bvp") {

TEST_CASE("sine solution of the Laplacian") {
  const auto op = constant_operator(0, 1, -1, 0, 0, {Constraint::dirichlet(0, 0), Constraint::dirichlet(1, 0)});
  const auto r = solve_linear_bvp(op, [](double x) { return kPi * kPi * std::sin(kPi * x); });
  CHECK(std::abs(r.solution(0.5) - 1.0) <= 1e-6);
  CHECK(max_deviation(r.solution, [](double x) { return std::sin(kPi * x); }, 0, 1) <= 1e-6);
}

TEST_CASE("linear interpolant and zero solution") {
  const auto op = constant_operator(0, 1, 1, 0, 0, {Constraint::dirichlet(0, 1), Constraint::dirichlet(1, -1)});
  const auto r = solve_homogeneous(op);
  // Exact up to rounding; the 512-node second-derivative collocation matrix
  // has a condition number near 1e10, so allow a few hundred ulps of growth.
  CHECK(max_deviation(r.solution, [](double x) { return 1.0 - 2.0 * x; }, 0, 1) <= 1e-10);

  const auto zero = constant_operator(0, 1, 1, 0, 0, {Constraint::dirichlet(0, 0), Constraint::dirichlet(1, 0)});
  CHECK(max_deviation(solve_homogeneous(zero).solution, [](double) { return 0.0; }, 0, 1) == 0.0);
}

TEST_CASE("integral constraint") {
  const auto r = solve_homogeneous(catalog::scalar_operator("integral_constraint"));
  CHECK(std::abs(r.solution.integral() - 2.0) <= 1e-8);
  CHECK(std::abs(r.solution(-1.0) - 1.0) <= 1e-10);
}

TEST_CASE("advection-diffusion homogeneous solution matches the characteristic roots") {
  // u''/4 + u' + u = 0 has the double root -2, so u = (1 + B x) e^{-2x}.
  const auto r = solve_homogeneous(catalog::scalar_operator("advection_diffusion"));
  const auto exact = exact_green("advection_diffusion");
  CHECK(max_deviation(r.solution, exact.homogeneous, 0, 1) <= 1e-6);
}

TEST_CASE("viscous shock is odd") {
  const auto r = solve_homogeneous(catalog::scalar_operator("viscous_shock"));
  CHECK(std::abs(r.solution(0.0)) <= 1e-8);
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = i / 200.0;
    worst = std::max(worst, std::abs(r.solution(x) + r.solution(-x)));
  }
  CHECK(worst <= 1e-8);
  CHECK(r.solution(0.5) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("viscous shock agrees with a solve at twice the resolution") {
  const auto op = catalog::scalar_operator("viscous_shock");
  const auto coarse = solve_homogeneous(op, {256});
  const auto fine = solve_homogeneous(op, {512});
  CHECK(max_deviation(coarse.solution, [&](double x) { return fine.solution(x); }, -1, 1) <= 1e-6);
}

TEST_CASE("jump conditions are imposed on both sides") {
  const auto r = solve_homogeneous(catalog::scalar_operator("jump"));
  CHECK(std::abs(r.solution(0.7 - 1e-12) - 2.0) <= 1e-8);
  CHECK(std::abs(r.solution(0.7) - 1.0) <= 1e-8);
  CHECK(std::abs(r.solution(0.0)) <= 1e-10);
  CHECK(std::abs(r.solution(1.0)) <= 1e-10);
}

TEST_CASE("solver output matches quadrature of the closed-form kernels") {
  const auto f = [](double y) { return std::exp(-20.0 * (y - 0.4) * (y - 0.4)) + y; };
  for (const char* id : {"helmholtz_K15", "laplace", "helmholtz_periodic", "advection_diffusion"}) {
    CAPTURE(id);
    const auto exact = exact_green(id);
    const auto r = solve_linear_bvp(catalog::scalar_operator(id), f);
    const int n = 4001;
    const auto y = linalg::linspace(0.0, 1.0, n);
    const auto w = linalg::trapezoid_weights(y);
    double worst = 0.0, scale = 0.0;
    for (double x : {0.1, 0.37, 0.5, 0.81}) {
      double u = exact.homogeneous(x);
      for (int k = 0; k < n; ++k) u += w[k] * exact.green(x, y[k]) * f(y[k]);
      worst = std::max(worst, std::abs(u - r.solution(x)));
      scale = std::max(scale, std::abs(u));
    }
    CHECK(worst <= 1e-5 * scale);
  }
}

TEST_CASE("periodic problem") {
  const auto op = catalog::scalar_operator("helmholtz_periodic");
  const auto r = solve_linear_bvp(op, [](double x) { return std::exp(std::sin(2 * kPi * x)) + x; });
  CHECK(std::abs(r.solution(0.0) - r.solution(1.0)) <= 1e-8);
}

TEST_CASE("factored solver reuses one factorization for many forcings") {
  const auto op = catalog::scalar_operator("helmholtz_K15");
  const LinearBvpSolver solver(op);
  const auto& x = solver.nodes();
  linalg::Matrix f(static_cast<Eigen::Index>(x.size()), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    f(static_cast<Eigen::Index>(i), 0) = std::cos(3 * x[i]);
    f(static_cast<Eigen::Index>(i), 1) = x[i] * x[i];
  }
  const auto many = solver.solve_many(f);
  REQUIRE(many.size() == 2);
  const auto one = solver.solve([](double t) { return t * t; });
  CHECK(max_deviation(many[1].solution, [&](double t) { return one.solution(t); }, 0, 1) <= 1e-12);
  CHECK(many[0].residual <= 1e-8);
}

TEST_CASE("invalid operators are rejected") {
  auto op = constant_operator(0, 1, 1, 0, 0, {Constraint::dirichlet(0, 0)});
  CHECK_THROWS_AS(solve_homogeneous(op), UsageError);
  op.constraints = {Constraint::dirichlet(0, 0), Constraint::dirichlet(0.5, 0)};
  CHECK_THROWS_AS(solve_homogeneous(op), UsageError);
  op.a = 1;
  CHECK_THROWS_AS(solve_homogeneous(op), UsageError);
}

TEST_CASE("nonlinear solver with zero cubic term equals the linear solve") {
  auto op = catalog::scalar_operator("cubic_helmholtz");
  op.epsilon = 0.0;
  const auto f = [](double x) { return std::sin(x) + 0.3 * std::cos(3 * x); };
  const auto lin = solve_linear_bvp(op, f);
  const auto non = solve_nonlinear_bvp(op, f);
  CHECK(max_deviation(non.solution, [&](double x) { return lin.solution(x); }, 0, 2 * kPi) <= 1e-12);
}

TEST_CASE("nonlinear residuals") {
  const auto f = [](double x) { return 0.8 * std::sin(x) + 0.2 * std::cos(2 * x) - 0.2; };
  for (const char* id : {"cubic_helmholtz", "sturm_liouville"}) {
    CAPTURE(id);
    const auto r = solve_nonlinear_bvp(catalog::scalar_operator(id), f);
    CHECK(r.residual <= 1e-8);
    CHECK(r.constraint_residual <= 1e-8);
    CHECK(r.newton_iterations >= 1);
  }
}

TEST_CASE("nonlinear solution satisfies the equation between nodes") {
  // u'' - u + 0.4 u^3 = f checked with second differences of the interpolant.
  const auto f = [](double x) { return std::sin(x); };
  const auto r = solve_nonlinear_bvp(catalog::scalar_operator("cubic_helmholtz"), f);
  const double h = 1e-3;
  double worst = 0.0;
  for (double x : {0.7, 1.9, 3.3, 5.1}) {
    const auto& u = r.solution;
    const double upp = (u(x + h) - 2 * u(x) + u(x - h)) / (h * h);
    worst = std::max(worst, std::abs(upp - u(x) + 0.4 * std::pow(u(x), 3) - f(x)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("decoupled system equals independent scalar solves") {
  SystemOperatorSpec sys;
  sys.a = -1;
  sys.b = 1;
  sys.a2.resize(4);
  sys.a1.resize(4);
  sys.a0.resize(4);
  sys.block(sys.a2, 0, 0) = [](double) { return 1.0; };
  sys.block(sys.a0, 0, 0) = [](double x) { return x; };
  sys.block(sys.a2, 1, 1) = [](double) { return -2.0; };
  sys.block(sys.a1, 1, 1) = [](double) { return 1.0; };
  sys.constraints = {{Constraint::dirichlet(-1, 0.5), Constraint::dirichlet(1, 0)},
                     {Constraint::dirichlet(-1, 0), Constraint::dirichlet(1, -1)}};
  const std::vector<Function> f = {[](double x) { return std::cos(x); }, [](double x) { return x * x; }};
  const auto both = solve_system_bvp(sys, f);

  OperatorSpec first;
  first.a = -1;
  first.b = 1;
  first.a2 = [](double) { return 1.0; };
  first.a0 = [](double x) { return x; };
  first.constraints = sys.constraints[0];
  OperatorSpec second = constant_operator(-1, 1, -2, 1, 0, sys.constraints[1]);
  const auto u = solve_linear_bvp(first, f[0]);
  const auto v = solve_linear_bvp(second, f[1]);
  CHECK(max_deviation(both[0].solution, [&](double x) { return u.solution(x); }, -1, 1) <= 1e-10);
  CHECK(max_deviation(both[1].solution, [&](double x) { return v.solution(x); }, -1, 1) <= 1e-10);
}

TEST_CASE("coupled system converges under refinement") {
  const auto op = catalog::system_operator("ode_system");
  const std::vector<Function> zero = {[](double) { return 0.0; }, [](double) { return 0.0; }};
  const auto coarse = solve_system_bvp(op, zero, {128});
  const auto fine = solve_system_bvp(op, zero, {256});
  for (int c = 0; c < 2; ++c) {
    CHECK(max_deviation(coarse[c].solution, [&](double x) { return fine[c].solution(x); }, -1, 1) <= 1e-6);
    CHECK(coarse[c].residual <= 1e-6);
  }
  CHECK(std::abs(coarse[0].solution(-1.0) - 1.0) <= 1e-10);
  CHECK(std::abs(coarse[1].solution(1.0) + 2.0) <= 1e-10);
  // u'' - v = 0 between the nodes.
  const double h = 1e-3, x = 0.3;
  const auto& u = fine[0].solution;
  const double upp = (u(x + h) - 2 * u(x) + u(x - h)) / (h * h);
  CHECK(std::abs(upp - fine[1].solution(x)) <= 1e-4);
}

TEST_CASE("closed-form kernels") {
  const auto lap = exact_green("laplace");
  CHECK(lap.green(0.5, 0.5) == doctest::Approx(0.25));
  for (double y : {0.1, 0.5, 0.9}) {
    CHECK(lap.green(0.0, y) == 0.0);
    CHECK(lap.green(1.0, y) == 0.0);
  }
  const auto helm = exact_green("helmholtz_K15");
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(), y = rng.uniform();
    CHECK(helm.green(x, y) == helm.green(y, x));
  }
  const auto per = exact_green("helmholtz_periodic");
  for (double y : {0.2, 0.6}) CHECK(per.green(0.0, y) == doctest::Approx(per.green(1.0, y)).epsilon(1e-12));
  CHECK_THROWS_AS(exact_green("jump"), UsageError);
  CHECK(has_exact_green("poisson_disk"));
}

}  // TEST_SUITE
