#include "oracle_checks.hpp"

#include "greenlearn/bvp.hpp"
#include "greenlearn/catalog.hpp"
#include "greenlearn/dataset_io.hpp"
#include "greenlearn/features.hpp"
#include "greenlearn/gp.hpp"
#include "greenlearn/linalg.hpp"
#include "greenlearn/rational_net.hpp"
#include "greenlearn/rng.hpp"
#include "greenlearn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace greenlearn::oracle {

namespace fs = std::filesystem;
using linalg::Matrix;
using linalg::Vector;

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Check make(std::string name, bool ok, double value, std::string detail) {
  return Check{std::move(name), ok, value, std::move(detail)};
}

// Worst relative deviation between analytic and central-difference gradients,
// per parameter class, over every network of one row.
std::map<nn::ParameterClass, double> loss_gradient_errors(const train::Dataset& d, train::RowModel model) {
  const train::LossProblem problem(d, 0);
  std::vector<double> grad;
  problem.evaluate(model, &grad);
  auto params = problem.pack(model);

  // Class of every packed parameter, in pack() order.
  std::vector<nn::ParameterClass> cls;
  for (const auto& net : model.green)
    for (std::size_t i = 0; i < net.parameter_count(); ++i) cls.push_back(net.parameter_class(i));
  for (std::size_t i = 0; i < model.homogeneous.parameter_count(); ++i)
    cls.push_back(model.homogeneous.parameter_class(i));

  std::map<nn::ParameterClass, double> diff, scale;
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    problem.unpack(params, model);
    const double up = problem.evaluate(model, nullptr);
    params[i] = keep - h;
    problem.unpack(params, model);
    const double down = problem.evaluate(model, nullptr);
    params[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    diff[cls[i]] = std::max(diff[cls[i]], std::abs(fd - grad[i]));
    scale[cls[i]] = std::max(scale[cls[i]], std::abs(grad[i]));
  }
  problem.unpack(params, model);
  std::map<nn::ParameterClass, double> out;
  for (const auto& [c, dv] : diff) out[c] = dv / std::max(scale[c], 1e-300);
  return out;
}

std::vector<std::string> files_below(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

// Number of files that differ between two trees (missing counts as differing).
std::size_t tree_differences(const fs::path& a, const fs::path& b) {
  const auto fa = files_below(a);
  const auto fb = files_below(b);
  if (fa != fb) return std::max(fa.size(), fb.size());
  std::size_t bad = 0;
  for (const auto& f : fa)
    if (io::read_text(a / f) != io::read_text(b / f)) ++bad;
  return bad;
}

}  // namespace

Check exact_kernel_loss_laplace() {
  const auto d = catalog::generate("laplace");
  const auto exact = bvp::exact_green("laplace");
  Matrix g(static_cast<Eigen::Index>(d.response_grid.size()), static_cast<Eigen::Index>(d.forcing_grid.size()));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index k = 0; k < g.cols(); ++k)
      g(i, k) = exact.green(d.response_grid.points(i, 0), d.forcing_grid.points(k, 0));
  const double loss = train::kernel_loss(d, 0, {g}, Vector());
  return make("exact_kernel_loss_laplace", loss <= 1e-4, loss, "loss " + fmt(loss) + " (bound 1e-4)");
}

Check gradient_checks() {
  catalog::GenerateOptions opt;
  opt.samples = 3;
  opt.forcing_points = 14;
  opt.response_points = 9;
  opt.length_scale = 0.1;
  opt.nodes_per_piece = 64;
  const auto d = catalog::generate("advection_diffusion", opt);

  double worst = 0.0;
  std::ostringstream detail;
  for (const auto act : {nn::Activation::rational, nn::Activation::relu, nn::Activation::tanh}) {
    train::TrainConfig cfg;
    cfg.activation = act;
    cfg.hidden = {6, 5};
    cfg.seed = 11;
    auto model = train::init_model(d, cfg).rows.front();
    // Zero biases put ReLU kinks exactly on the grid end points, where the
    // difference quotient sees one-sided slopes; random biases avoid that.
    // Rational coefficients are moved off their shared starting point so that
    // every coefficient gets a distinct gradient.
    Rng rng(5);
    auto nudge = [&](nn::Mlp& net) {
      auto params = net.parameters();
      for (std::size_t i = 0; i < params.size(); ++i)
        if (net.parameter_class(i) == nn::ParameterClass::bias) params[i] = 0.1 * rng.normal();
      if (act != nn::Activation::rational) return;
      for (std::size_t l = 0; l < net.hidden().size(); ++l) {
        auto c = net.coefficients(l);
        for (double& p : c.p) p += 0.05 * rng.normal();
        for (double& q : c.q) q += 0.05 * rng.normal();
        net.set_coefficients(l, c);
      }
    };
    for (auto& net : model.green) nudge(net);
    nudge(model.homogeneous);
    for (const auto& [c, err] : loss_gradient_errors(d, model)) {
      worst = std::max(worst, err);
      detail << nn::to_string(act) << "/" << nn::to_string(c) << " " << fmt(err) << "; ";
    }
  }
  detail << "bound 1e-5";
  return make("gradient_checks", worst <= 1e-5, worst, detail.str());
}

Check trapezoid_convergence() {
  const double exact = std::numbers::e - 1.0;
  std::vector<double> errors;
  for (std::size_t n : {11, 21, 41, 81, 161}) {
    const auto x = linalg::linspace(0.0, 1.0, n);
    const auto w = linalg::trapezoid_weights(x);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * std::exp(x[i]);
    errors.push_back(std::abs(s - exact));
  }
  bool ok = true;
  double worst = 0.0;
  std::ostringstream detail;
  detail << "ratios";
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double r = errors[i - 1] / errors[i];
    ok = ok && r >= 3.5 && r <= 4.5;
    worst = std::max(worst, std::abs(r - 4.0));
    detail << " " << fmt(r);
  }
  detail << " (bounds 3.5..4.5)";
  return make("trapezoid_convergence", ok, worst, detail.str());
}

Check gp_covariance() {
  const auto x = linalg::linspace(0.0, 1.0, 12);
  const auto grid = linalg::make_grid(x, linalg::QuadratureRule::trapezoid, 1.0);
  const auto spec = gp::KernelSpec::squared_exponential(0.1, 0.0, 1.0);
  const std::size_t draws = 10000;
  const auto s = gp::sample_gp(spec, grid, draws, 7, 0.0, 1.0);
  const Matrix empirical = s.values.transpose() * s.values / static_cast<double>(draws);
  const Matrix k = gp::kernel_matrix(spec, grid.points);
  const double dev = (empirical - k).cwiseAbs().maxCoeff();
  return make("gp_covariance", dev <= 0.05, dev,
              "max |C_emp - K| " + fmt(dev) + " at 1e4 draws (bound 0.05 of unit variance)");
}

Check crank_nicolson_norm() {
  const std::size_t m = 599;
  const double h = 6.0 / static_cast<double>(m + 1);
  std::vector<double> v(m);
  std::vector<std::complex<double>> psi(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = -3.0 + h * static_cast<double>(i + 1);
    v[i] = x * x;
    psi[i] = std::exp(-2.0 * (x - 0.5) * (x - 0.5)) * std::polar(1.0, 3.0 * x);
  }
  const double before = bvp::discrete_l2_norm(psi, h);
  double worst = 0.0;
  for (int step = 0; step < 10; ++step) {
    const double n0 = bvp::discrete_l2_norm(psi, h);
    psi = bvp::crank_nicolson_step(v, h, 0.02, psi);
    worst = std::max(worst, std::abs(bvp::discrete_l2_norm(psi, h) - n0) / before);
  }
  return make("crank_nicolson_norm", worst <= 1e-10, worst, "relative drift per step " + fmt(worst) + " (bound 1e-10)");
}

Check round_trips(const fs::path& scratch) {
  fs::remove_all(scratch);
  catalog::GenerateOptions opt;
  opt.samples = 5;
  opt.forcing_points = 40;
  opt.response_points = 15;
  opt.nodes_per_piece = 96;
  const auto d = catalog::generate("helmholtz_K15", opt);
  io::write_dataset(d, scratch / "dataset_a");
  const auto back = io::read_dataset(scratch / "dataset_a");
  io::write_dataset(back, scratch / "dataset_b");
  const bool same_values = back.forcing.front() == d.forcing.front() && back.response.front() == d.response.front() &&
                           back.forcing_grid.weights == d.forcing_grid.weights;

  train::TrainConfig cfg;
  cfg.hidden = {5, 5};
  cfg.adam_epochs = 3;
  cfg.lbfgs_max_iters = 2;
  const auto model = train::train(d, cfg);
  io::write_checkpoint(model, scratch / "checkpoint_a");
  io::write_checkpoint(io::read_checkpoint(scratch / "checkpoint_a"), scratch / "checkpoint_b");

  const auto dd = tree_differences(scratch / "dataset_a", scratch / "dataset_b");
  const auto cd = tree_differences(scratch / "checkpoint_a", scratch / "checkpoint_b");
  const bool ok = same_values && dd == 0 && cd == 0;
  return make("round_trips", ok, static_cast<double>(dd + cd),
              "differing files: dataset " + std::to_string(dd) + ", checkpoint " + std::to_string(cd) +
                  (same_values ? "" : "; values changed on read"));
}

Check exact_helmholtz_symmetry() {
  const auto exact = bvp::exact_green("helmholtz_K15");
  const auto grid = features::sample_kernel(exact.green, exact.a, exact.b, 500);
  const double s = features::symmetry_score(grid);
  return make("exact_helmholtz_symmetry", s <= 1e-12, s, "symmetry score " + fmt(s) + " (bound 1e-12)");
}

Check pole_of_shifted_reciprocal() {
  const features::Window w{0.0, 1.0, -0.6, 0.6};
  const std::size_t res = 512;
  const auto f = features::pointwise([](std::complex<double> z) { return 1.0 / (z - 0.7); });
  const auto report = features::detect_poles(f, w, res);
  const double cell = (w.re_max - w.re_min) / static_cast<double>(res - 1);
  double dist = std::numeric_limits<double>::infinity();
  if (report.poles.size() == 1) dist = std::abs(report.poles.front().location - std::complex<double>(0.7, 0.0));
  return make("pole_of_shifted_reciprocal", dist <= cell, dist,
              std::to_string(report.poles.size()) + " pole(s), distance " + fmt(dist) + " (cell " + fmt(cell) + ")");
}

std::vector<Named> all_checks(const fs::path& scratch) {
  return {
      {"exact_kernel_loss_laplace", exact_kernel_loss_laplace},
      {"gradient_checks", gradient_checks},
      {"trapezoid_convergence", trapezoid_convergence},
      {"gp_covariance", gp_covariance},
      {"crank_nicolson_norm", crank_nicolson_norm},
      {"round_trips", [scratch] { return round_trips(scratch); }},
      {"exact_helmholtz_symmetry", exact_helmholtz_symmetry},
      {"pole_of_shifted_reciprocal", pole_of_shifted_reciprocal},
  };
}

}  // namespace greenlearn::oracle
