#include "greenlearn/catalog.hpp"

#include "greenlearn/error.hpp"
#include "greenlearn/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace greenlearn::catalog {

using linalg::Grid;
using linalg::Matrix;
using linalg::Vector;
using Constraint = bvp::Constraint;

namespace {

constexpr double kPi = std::numbers::pi;

Entry make(std::string id, std::string description, double a, double b, std::vector<Constraint> constraints,
           bool normalize) {
  Entry e;
  e.id = std::move(id);
  e.description = std::move(description);
  e.a = a;
  e.b = b;
  e.constraints = std::move(constraints);
  e.normalize = normalize;
  return e;
}

std::vector<Entry> build_entries() {
  std::vector<Entry> out;
  out.push_back(make("helmholtz_K15", "u'' + 225 u = f on [0,1], u(0) = u(1) = 0", 0.0, 1.0,
                     {Constraint::dirichlet(0.0, 0.0), Constraint::dirichlet(1.0, 0.0)}, true));
  {
    Entry e = make("helmholtz_periodic", "u'' + 225 u = f on [0,1] with periodic conditions", 0.0, 1.0,
                   {Constraint::periodic()}, true);
    e.kernel = gp::KernelFamily::periodic;
    e.length_scale = 0.2;
    out.push_back(e);
  }
  out.push_back(make("laplace", "-u'' = f on [0,1], u(0) = u(1) = 0", 0.0, 1.0,
                     {Constraint::dirichlet(0.0, 0.0), Constraint::dirichlet(1.0, 0.0)}, true));
  out.push_back(make("advection_diffusion", "u''/4 + u' + u = f on [0,1], u(0) = 1, u(1) = -2", 0.0, 1.0,
                     {Constraint::dirichlet(0.0, 1.0), Constraint::dirichlet(1.0, -2.0)}, false));
  out.push_back(make("integral_constraint", "u'' + x^2 u = f on [-1,1], u(-1) = 1, int u = 2", -1.0, 1.0,
                     {Constraint::dirichlet(-1.0, 1.0), Constraint::integral(2.0)}, false));
  out.push_back(make("jump", "u''/5 + u' = f on [0,1], u(0) = u(1) = 0, u(0.7-) = 2, u(0.7+) = 1", 0.0, 1.0,
                     {Constraint::dirichlet(0.0, 0.0), Constraint::dirichlet(1.0, 0.0), Constraint::jump(0.7, 2.0, 1.0)},
                     false));
  out.push_back(make("boundary_layer", "-u''/100 - u' = f on [0,1], u(0) = u(1) = 0", 0.0, 1.0,
                     {Constraint::dirichlet(0.0, 0.0), Constraint::dirichlet(1.0, 0.0)}, true));
  out.push_back(make("double_well", "-h^2 u'' + V u = f on [-3,3], V = x^2 + 1.5 exp(-(4x)^4), h = 0.1", -3.0, 3.0,
                     {Constraint::dirichlet(-3.0, 0.0), Constraint::dirichlet(3.0, 0.0)}, true));
  out.push_back(make("viscous_shock", "u''/1000 + 2x u' = f on [-1,1], u(-1) = -1, u(1) = 1", -1.0, 1.0,
                     {Constraint::dirichlet(-1.0, -1.0), Constraint::dirichlet(1.0, 1.0)}, false));
  out.push_back(make("advection_right", "u''/10 + 1[x >= 0] u' = f on [-1,1], u(-1) = 2, u(1) = -1", -1.0, 1.0,
                     {Constraint::dirichlet(-1.0, 2.0), Constraint::dirichlet(1.0, -1.0)}, false));
  out.push_back(make("cubic_helmholtz", "u'' - u + 0.4 u^3 = f on [0,2pi], u(0) = u(2pi) = 0", 0.0, 2.0 * kPi,
                     {Constraint::dirichlet(0.0, 0.0), Constraint::dirichlet(2.0 * kPi, 0.0)}, true));
  out.push_back(make("sturm_liouville", "-(p u')' + q (u + 0.4 u^3) = f on [0,2pi], p = 0.4 sin x - 3, q = 0.6 sin x - 2",
                     0.0, 2.0 * kPi, {Constraint::dirichlet(0.0, 0.0), Constraint::dirichlet(2.0 * kPi, 0.0)}, true));
  {
    Entry e = make("ode_system", "u'' - v = f1, -v'' + x u = f2 on [-1,1], u(-1) = 1, u(1) = -1, v(+-1) = -2", -1.0,
                   1.0, {}, false);
    e.components = 2;
    out.push_back(e);
  }
  {
    Entry e = make("schrodinger_propagator",
                   "one Crank-Nicolson step (dt = 0.02) of i psi_t = -psi''/2 + x^2 psi on [-3,3], real and imaginary parts",
                   -3.0, 3.0, {Constraint::dirichlet(-3.0, 0.0), Constraint::dirichlet(3.0, 0.0)}, false);
    e.components = 2;
    e.kernel = gp::KernelFamily::periodic;
    e.length_scale = 0.5;
    out.push_back(e);
  }
  {
    Entry e = make("poisson_disk", "laplacian(u) = f on the unit disk, u = 0 on the circle", -1.0, 1.0, {}, true);
    e.dim = 2;
    e.length_scale = 0.2;
    out.push_back(e);
  }
  return out;
}

Grid response_grid_for(const GenerateOptions& o, double a, double b) {
  std::vector<double> xs;
  if (o.sampling == "uniform") {
    xs = linalg::linspace(a, b, o.response_points);
  } else if (o.sampling == "random") {
    Rng rng(derive_seed(o.seed, 200));
    xs.resize(o.response_points);
    for (auto& x : xs) x = rng.uniform(a, b);
    std::sort(xs.begin(), xs.end());
    if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) throw NumericError("random response locations collide");
  } else {
    throw UsageError("unknown sampling '" + o.sampling + "' (uniform | random)");
  }
  linalg::QuadratureRule rule;
  if (o.quadrature == "trapezoid")
    rule = linalg::QuadratureRule::trapezoid;
  else if (o.quadrature == "montecarlo")
    rule = linalg::QuadratureRule::montecarlo;
  else
    throw UsageError("unknown quadrature '" + o.quadrature + "' (trapezoid | montecarlo)");
  return linalg::make_grid(xs, rule, b - a);
}

Matrix column(std::span<const double> xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = xs[i];
  return m;
}

gp::KernelSpec kernel_for(const Entry& e, const GenerateOptions& o) {
  const double lambda = o.length_scale.value_or(e.length_scale);
  if (e.kernel == gp::KernelFamily::periodic) return gp::KernelSpec::periodic(lambda, e.a, e.b);
  return gp::KernelSpec::squared_exponential(lambda, e.a, e.b);
}

train::Dataset skeleton(const Entry& e, const GenerateOptions& o) {
  if (o.samples == 0) throw UsageError("generate: at least one sample is required");
  if (o.forcing_points < 2 || o.response_points < 2) throw UsageError("generate: grids need at least two points");
  train::Dataset d;
  d.operator_id = e.id;
  d.a = e.a;
  d.b = e.b;
  d.seed = o.seed;
  d.sampling = o.sampling;
  d.quadrature = o.quadrature;
  return d;
}

std::vector<gp::ForcingSample> draw_forcings(const Entry& e, const GenerateOptions& o, const Grid& grid,
                                             const gp::KernelSpec& kernel) {
  std::vector<gp::ForcingSample> out;
  for (int c = 0; c < e.components; ++c)
    out.push_back(gp::sample_gp(kernel, grid, o.samples, derive_seed(o.seed, 100 + static_cast<std::uint64_t>(c)),
                                e.a, e.b, {o.strict_resolution}));
  return out;
}

Matrix sample_solutions(const std::vector<bvp::SolveResult>& results, std::span<const double> xs) {
  Matrix u(static_cast<Eigen::Index>(results.size()), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < results.size(); ++j) {
    const auto v = results[j].solution(xs);
    for (std::size_t i = 0; i < xs.size(); ++i) u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v[i];
  }
  return u;
}

// Periodic problems sample forcings on [a, b) with equal weights. Keeping both
// endpoints would duplicate f(a) = f(b), and the data could then only fix the
// sum G(x, a) + G(x, b), leaving the split between the two columns to chance.
Grid forcing_grid_for(const Entry& e, const GenerateOptions& o) {
  const bool periodic = std::any_of(e.constraints.begin(), e.constraints.end(),
                                    [](const bvp::Constraint& c) { return c.kind == bvp::ConstraintKind::periodic; });
  if (!periodic)
    return linalg::make_grid(linalg::linspace(e.a, e.b, o.forcing_points), linalg::QuadratureRule::trapezoid, e.b - e.a);
  const auto n = static_cast<Eigen::Index>(o.forcing_points);
  const double h = (e.b - e.a) / static_cast<double>(n);
  Grid g;
  g.points.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) g.points(i, 0) = e.a + h * static_cast<double>(i);
  g.weights = Vector::Constant(n, h);
  return g;
}

train::Dataset generate_scalar(const Entry& e, const GenerateOptions& o) {
  train::Dataset d = skeleton(e, o);
  const auto kernel = kernel_for(e, o);
  d.kernel = kernel;
  d.forcing_grid = forcing_grid_for(e, o);
  d.response_grid = response_grid_for(o, e.a, e.b);
  const auto samples = draw_forcings(e, o, d.forcing_grid, kernel);
  const auto& sample = samples.front();
  if (sample.below_resolution) d.notes = "length scale below the forcing grid resolution";

  const bvp::OperatorSpec op = scalar_operator(e.id);
  const bvp::SolverOptions solver{o.nodes_per_piece};
  const auto nodes = bvp::collocation_nodes(op, solver);
  const Matrix rhs = sample.evaluate(column(nodes)).transpose();
  std::vector<bvp::SolveResult> results;
  if (op.epsilon > 0.0)
    results = bvp::solve_nonlinear_many(op, rhs, solver);
  else
    results = bvp::LinearBvpSolver(op, solver).solve_many(rhs);

  d.forcing = {sample.values};
  d.response = {sample_solutions(results, d.response_grid.coordinates())};
  return d;
}

train::Dataset generate_system(const Entry& e, const GenerateOptions& o) {
  train::Dataset d = skeleton(e, o);
  const auto kernel = kernel_for(e, o);
  d.kernel = kernel;
  d.forcing_grid = linalg::make_grid(linalg::linspace(e.a, e.b, o.forcing_points), linalg::QuadratureRule::trapezoid,
                                     e.b - e.a);
  d.response_grid = response_grid_for(o, e.a, e.b);
  const auto samples = draw_forcings(e, o, d.forcing_grid, kernel);

  const bvp::SystemBvpSolver solver(system_operator(e.id), {o.nodes_per_piece});
  const Matrix nodes = column(solver.nodes());
  std::vector<Matrix> rhs;
  for (const auto& s : samples) rhs.push_back(s.evaluate(nodes).transpose());
  const auto results = solver.solve_many(rhs);

  const auto xs = d.response_grid.coordinates();
  for (int c = 0; c < e.components; ++c) {
    std::vector<bvp::SolveResult> column_results;
    for (const auto& r : results) column_results.push_back(r[static_cast<std::size_t>(c)]);
    d.forcing.push_back(samples[static_cast<std::size_t>(c)].values);
    d.response.push_back(sample_solutions(column_results, xs));
  }
  return d;
}

// Fine uniform grid for the propagator: a common refinement of both sample
// grids when it is small enough, so that samples land on nodes exactly.
std::size_t propagator_intervals(std::size_t n_forcing, std::size_t n_response) {
  const std::size_t l = std::lcm(n_forcing - 1, n_response - 1);
  if (l > 200000) return 20000;
  return l * ((2000 + l - 1) / l);
}

double interpolate_uniform(const std::vector<double>& values, double a, double h, double x) {
  const double t = (x - a) / h;
  const double r = std::round(t);
  if (std::abs(t - r) < 1e-9) return values[static_cast<std::size_t>(std::clamp<double>(r, 0, static_cast<double>(values.size() - 1)))];
  const auto i = static_cast<std::size_t>(std::clamp<double>(std::floor(t), 0, static_cast<double>(values.size() - 2)));
  const double w = t - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

train::Dataset generate_propagator(const Entry& e, const GenerateOptions& o) {
  train::Dataset d = skeleton(e, o);
  const PropagatorSetup setup;
  const auto kernel = kernel_for(e, o);
  d.kernel = kernel;
  d.forcing_grid = linalg::make_grid(linalg::linspace(e.a, e.b, o.forcing_points), linalg::QuadratureRule::trapezoid,
                                     e.b - e.a);
  d.response_grid = response_grid_for(o, e.a, e.b);
  const auto samples = draw_forcings(e, o, d.forcing_grid, kernel);

  const std::size_t m = propagator_intervals(o.forcing_points, o.response_points);
  const double h = (e.b - e.a) / static_cast<double>(m);
  std::vector<double> interior(m - 1);
  for (std::size_t i = 0; i < interior.size(); ++i) interior[i] = e.a + h * static_cast<double>(i + 1);
  std::vector<double> potential(interior.size());
  std::vector<double> damping(interior.size());
  for (std::size_t i = 0; i < interior.size(); ++i) {
    potential[i] = setup.potential(interior[i]);
    damping[i] = setup.damping(interior[i]);
  }
  const Matrix re = samples[0].evaluate(column(interior));
  const Matrix im = samples[1].evaluate(column(interior));

  const auto xs = d.response_grid.coordinates();
  const auto ys = d.forcing_grid.coordinates();
  const auto n = static_cast<Eigen::Index>(o.samples);
  Matrix f_re(n, static_cast<Eigen::Index>(ys.size()));
  Matrix f_im(n, static_cast<Eigen::Index>(ys.size()));
  for (Eigen::Index k = 0; k < f_re.cols(); ++k) {
    const double w = setup.damping(ys[static_cast<std::size_t>(k)]);
    f_re.col(k) = samples[0].values.col(k) * w;
    f_im.col(k) = samples[1].values.col(k) * w;
  }
  Matrix u_re(n, static_cast<Eigen::Index>(xs.size()));
  Matrix u_im(n, static_cast<Eigen::Index>(xs.size()));
  bvp::ComplexVector psi(interior.size());
  std::vector<double> full_re(m + 1), full_im(m + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      psi[i] = {re(j, c) * damping[i], im(j, c) * damping[i]};
    }
    const auto next = bvp::crank_nicolson_step(potential, h, setup.dt, psi);
    full_re.front() = full_re.back() = full_im.front() = full_im.back() = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      full_re[i + 1] = next[i].real();
      full_im[i + 1] = next[i].imag();
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      u_re(j, static_cast<Eigen::Index>(i)) = interpolate_uniform(full_re, e.a, h, xs[i]);
      u_im(j, static_cast<Eigen::Index>(i)) = interpolate_uniform(full_im, e.a, h, xs[i]);
    }
  }
  d.forcing = {f_re, f_im};
  d.response = {u_re, u_im};
  std::ostringstream notes;
  notes << "forcing is the initial state times exp(-x^6/20); response after one step dt=" << setup.dt
        << " on " << m << " intervals";
  d.notes = notes.str();
  return d;
}

train::Dataset generate_disk(const Entry& e, const GenerateOptions& o) {
  train::Dataset d = skeleton(e, o);
  if (o.sampling != "uniform" || o.quadrature != "trapezoid")
    throw UsageError("poisson_disk uses its fixed ring quadrature");
  gp::KernelSpec kernel;
  kernel.family = gp::KernelFamily::squared_exponential;
  kernel.length_scale = o.length_scale.value_or(e.length_scale);
  d.kernel = kernel;
  d.forcing_grid = disk_grid();
  d.response_grid = d.forcing_grid;
  const auto sample = gp::sample_gp_disk(kernel, d.forcing_grid, o.samples, derive_seed(o.seed, 100));

  const bvp::PolarGrid polar;
  const Matrix rhs = sample.evaluate(polar.nodes());
  Matrix u(static_cast<Eigen::Index>(o.samples), static_cast<Eigen::Index>(d.response_grid.size()));
  std::vector<double> f(static_cast<std::size_t>(rhs.cols()));
  for (Eigen::Index j = 0; j < rhs.rows(); ++j) {
    for (Eigen::Index i = 0; i < rhs.cols(); ++i) f[static_cast<std::size_t>(i)] = rhs(j, i);
    const auto sol = bvp::solve_poisson_disk(polar, f);
    for (Eigen::Index i = 0; i < u.cols(); ++i) u(j, i) = sol(d.response_grid.points(i, 0), d.response_grid.points(i, 1));
  }
  d.forcing = {sample.values};
  d.response = {u};
  d.notes = "forcing: squared-exponential GP on the ring nodes (stands in for a random-function generator)";
  return d;
}

}  // namespace

const std::vector<Entry>& entries() {
  static const std::vector<Entry> all = build_entries();
  return all;
}

bool known(const std::string& id) {
  return std::any_of(entries().begin(), entries().end(), [&](const Entry& e) { return e.id == id; });
}

const Entry& entry(const std::string& id) {
  for (const auto& e : entries())
    if (e.id == id) return e;
  throw UsageError("unknown operator '" + id + "'");
}

bvp::OperatorSpec scalar_operator(const std::string& id) {
  const Entry& e = entry(id);
  if (e.components != 1 || e.dim != 1 || id == "schrodinger_propagator")
    throw UsageError("'" + id + "' is not a scalar boundary-value problem");
  bvp::OperatorSpec op;
  op.a = e.a;
  op.b = e.b;
  op.constraints = e.constraints;
  auto constant = [](double c) { return [c](double) { return c; }; };
  if (id == "helmholtz_K15" || id == "helmholtz_periodic") {
    op.a2 = constant(1.0);
    op.a1 = constant(0.0);
    op.a0 = constant(225.0);
  } else if (id == "laplace") {
    op.a2 = constant(-1.0);
    op.a1 = constant(0.0);
    op.a0 = constant(0.0);
  } else if (id == "advection_diffusion") {
    op.a2 = constant(0.25);
    op.a1 = constant(1.0);
    op.a0 = constant(1.0);
  } else if (id == "integral_constraint") {
    op.a2 = constant(1.0);
    op.a1 = constant(0.0);
    op.a0 = [](double x) { return x * x; };
  } else if (id == "jump") {
    op.a2 = constant(0.2);
    op.a1 = constant(1.0);
    op.a0 = constant(0.0);
  } else if (id == "boundary_layer") {
    op.a2 = constant(-1e-2);
    op.a1 = constant(-1.0);
    op.a0 = constant(0.0);
  } else if (id == "double_well") {
    op.a2 = constant(-1e-2);
    op.a1 = constant(0.0);
    op.a0 = [](double x) { return x * x + 1.5 * std::exp(-std::pow(4.0 * x, 4)); };
  } else if (id == "viscous_shock") {
    op.a2 = constant(1e-3);
    op.a1 = [](double x) { return 2.0 * x; };
    op.a0 = constant(0.0);
    // A joint at the shock clusters collocation nodes where the layer sits.
    op.breakpoints = {0.0};
  } else if (id == "advection_right") {
    op.a2 = constant(0.1);
    op.a1 = [](double x) { return x >= 0.0 ? 1.0 : 0.0; };
    op.a0 = constant(0.0);
    op.breakpoints = {0.0};
  } else if (id == "cubic_helmholtz") {
    op.a2 = constant(1.0);
    op.a1 = constant(0.0);
    op.a0 = constant(-1.0);
    op.epsilon = 0.4;
    op.cubic = constant(1.0);
  } else if (id == "sturm_liouville") {
    op = bvp::OperatorSpec::sturm_liouville(
        e.a, e.b, [](double x) { return 0.4 * std::sin(x) - 3.0; }, [](double x) { return 0.4 * std::cos(x); },
        [](double x) { return 0.6 * std::sin(x) - 2.0; }, 0.4, e.constraints);
  } else {
    throw UsageError("no scalar operator for '" + id + "'");
  }
  op.validate();
  return op;
}

bvp::SystemOperatorSpec system_operator(const std::string& id) {
  if (id != "ode_system") throw UsageError("'" + id + "' is not a system of equations");
  bvp::SystemOperatorSpec op;
  op.a = -1.0;
  op.b = 1.0;
  op.components = 2;
  op.a2.resize(4);
  op.a1.resize(4);
  op.a0.resize(4);
  op.block(op.a2, 0, 0) = [](double) { return 1.0; };
  op.block(op.a0, 0, 1) = [](double) { return -1.0; };
  op.block(op.a2, 1, 1) = [](double) { return -1.0; };
  op.block(op.a0, 1, 0) = [](double x) { return x; };
  op.constraints = {{Constraint::dirichlet(-1.0, 1.0), Constraint::dirichlet(1.0, -1.0)},
                    {Constraint::dirichlet(-1.0, -2.0), Constraint::dirichlet(1.0, -2.0)}};
  op.validate();
  return op;
}

Grid disk_grid(int rings) {
  if (rings < 1) throw UsageError("disk_grid: at least one ring is required");
  const double dr = 1.0 / rings;
  std::vector<std::array<double, 2>> pts{{0.0, 0.0}};
  std::vector<double> w{kPi * (dr / 2) * (dr / 2)};
  for (int k = 1; k <= rings; ++k) {
    const double r = k * dr;
    const int n = static_cast<int>(std::lround(2.0 * kPi * k));
    const double inner = (k - 0.5) * dr;
    const double outer = k == rings ? 1.0 : (k + 0.5) * dr;
    const double area = kPi * (outer * outer - inner * inner);
    for (int j = 0; j < n; ++j) {
      const double t = 2.0 * kPi * j / n;
      pts.push_back({r * std::cos(t), r * std::sin(t)});
      w.push_back(area / n);
    }
  }
  Grid g;
  g.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
  g.weights.resize(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    g.points(static_cast<Eigen::Index>(i), 0) = pts[i][0];
    g.points(static_cast<Eigen::Index>(i), 1) = pts[i][1];
    g.weights(static_cast<Eigen::Index>(i)) = w[i];
  }
  return g;
}

double PropagatorSetup::damping(double x) const { return std::exp(-std::pow(x, 6) / 20.0); }
double PropagatorSetup::potential(double x) const { return x * x; }

train::Dataset generate(const std::string& id, const GenerateOptions& options) {
  const Entry& e = entry(id);
  train::Dataset d;
  if (id == "schrodinger_propagator")
    d = generate_propagator(e, options);
  else if (id == "poisson_disk")
    d = generate_disk(e, options);
  else if (e.components > 1)
    d = generate_system(e, options);
  else
    d = generate_scalar(e, options);
  if (e.normalize) d = train::normalize_dataset(d);
  d.validate();
  return d;
}

}  // namespace greenlearn::catalog
