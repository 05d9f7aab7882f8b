#include "greenlearn/pipeline.hpp"

#include "greenlearn/bvp.hpp"
#include "greenlearn/catalog.hpp"
#include "greenlearn/error.hpp"
#include "greenlearn/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

namespace greenlearn::pipeline {

using linalg::Matrix;
using linalg::Vector;
namespace fs = std::filesystem;

train::Dataset apply_transforms(const train::Dataset& d, const io::ExperimentConfig& config) {
  train::Dataset out = d;
  if (config.noise > 0.0) out = train::add_noise(out, config.noise, config.noise_seed.value_or(derive_seed(d.seed, 300)));
  if (config.mask) out = train::mask_measurements(out, config.mask->first, config.mask->second);
  return out;
}

train::Dataset make_dataset(const io::ExperimentConfig& config) {
  return apply_transforms(catalog::generate(config.operator_id, config.generate), config);
}

double kernel_error(const train::TrainedModel& model, std::size_t n) {
  if (model.dim != 1 || model.response_components() != 1 || model.forcing_components() != 1)
    throw UsageError("kernel_error needs a scalar 1-D model");
  if (!bvp::has_exact_green(model.operator_id))
    throw UsageError("no closed-form kernel for '" + model.operator_id + "'");
  const auto exact = bvp::exact_green(model.operator_id);
  const auto learned = features::sample_kernel(model.green(0, 0), exact.a, exact.b, n);
  return features::relative_l2_error(learned, exact.green);
}

double prediction_error(const train::TrainedModel& model, const train::Dataset& d) {
  if (model.response_components() != d.response_components() || model.forcing_components() != d.forcing_components())
    throw UsageError("prediction_error: model and dataset shapes differ");
  const auto n = static_cast<Eigen::Index>(d.samples());
  Vector num = Vector::Zero(n);
  Vector den = Vector::Zero(n);
  const Vector& w = d.response_grid.weights;
  for (int r = 0; r < model.response_components(); ++r) {
    const train::LossProblem problem(d, r);
    const Matrix pred = problem.predict(model.rows[static_cast<std::size_t>(r)]);
    const Matrix& u = d.response[static_cast<std::size_t>(r)];
    num += (pred - u).array().square().matrix() * w;
    den += u.array().square().matrix() * w;
  }
  return (num.array() / den.array()).sqrt().mean();
}

features::FeatureReport extract(const train::TrainedModel& model, const io::ExperimentConfig& config, const fs::path& out) {
  features::FeatureReport report;
  report.operator_id = model.operator_id;
  const std::size_t n = config.grid_points;
  const bool scalar = model.response_components() == 1 && model.forcing_components() == 1;

  if (model.dim == 2) {
    const auto grid = catalog::disk_grid();
    io::write_matrix(out / "x.csv", grid.points);
    const Matrix g = train::evaluate_green(model.green(0, 0), grid.points, grid.points);
    io::write_matrix(out / "kernel.csv", g);
    io::write_matrix(out / "homogeneous.csv", Matrix(train::evaluate_homogeneous(model.rows[0].homogeneous, grid.points)));
    report.symmetry = features::symmetry_score(g);
    report.notes.push_back("planar kernel exported on the ring quadrature nodes only");
    io::write_text(out / "report.txt", report.to_text());
    return report;
  }

  const auto axis = linalg::linspace(model.a, model.b, n);
  Matrix x(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), 0) = axis[i];
  io::write_matrix(out / "x.csv", x);

  std::vector<bvp::Constraint> constraints;
  if (catalog::known(model.operator_id)) constraints = catalog::entry(model.operator_id).constraints;

  for (int r = 0; r < model.response_components(); ++r) {
    const auto& row = model.rows[static_cast<std::size_t>(r)];
    const Vector hom = train::evaluate_homogeneous(row.homogeneous, x);
    io::write_matrix(out / (scalar ? std::string("homogeneous.csv") : "homogeneous_" + std::to_string(r) + ".csv"),
                     Matrix(hom));
    for (int c = 0; c < model.forcing_components(); ++c) {
      const auto grid = features::sample_kernel(model.green(r, c), model.a, model.b, n);
      const std::string suffix = scalar ? "" : "_" + std::to_string(r) + "_" + std::to_string(c);
      io::write_matrix(out / ("kernel" + suffix + ".csv"), grid.values);
      if (grid.nonfinite) report.notes.push_back(std::to_string(grid.nonfinite) + " kernel samples hit a pole" + suffix);
      if (!scalar) continue;

      if (bvp::has_exact_green(model.operator_id)) {
        const auto exact = bvp::exact_green(model.operator_id);
        report.relative_error = features::relative_l2_error(grid, exact.green);
      }
      report.symmetry = features::symmetry_score(grid);
      for (const auto& con : constraints) {
        const std::string name = bvp::to_string(con.kind) + (con.kind == bvp::ConstraintKind::periodic ? "" : "@" + io::format_double(con.point));
        report.constraint_residuals.emplace_back("kernel." + name, features::constraint_residual(grid, con));
        report.constraint_residuals.emplace_back("homogeneous." + name, features::constraint_residual(grid.x, hom, con));
      }
      report.constraint_residuals.emplace_back("kernel.max_abs", grid.values.cwiseAbs().maxCoeff());

      const auto eig = features::integral_operator_eig(grid, config.eigen_count);
      report.eigenvalues = eig.values;
      io::write_matrix(out / "eigenvalues.csv", Matrix(eig.values));
      io::write_matrix(out / "eigenfunctions.csv", eig.functions.leftCols(std::min<Eigen::Index>(5, eig.functions.cols())));
      const auto svd = features::integral_operator_svd(grid, config.eigen_count);
      report.singular_values = svd.values;
      io::write_matrix(out / "singular_values.csv", Matrix(svd.values));
      const auto k = std::min<Eigen::Index>(5, svd.left.cols());
      io::write_matrix(out / "left_singular.csv", svd.left.leftCols(k));
      io::write_matrix(out / "right_singular.csv", svd.right.leftCols(k));
    }
  }

  if (model.activation == nn::Activation::rational) {
    const features::Window window{model.a, model.b, -0.6, 0.6};
    const auto& hom_net = model.rows[0].homogeneous;
    const auto portrait = features::phase_portrait(hom_net, window, config.pole_resolution);
    Matrix arg = portrait.argument;
    for (Eigen::Index i = 0; i < arg.size(); ++i)
      if (std::isnan(arg.data()[i])) arg.data()[i] = 0.0;
    io::write_matrix(out / "phase_portrait.csv", arg);
    report.poles = features::detect_poles(hom_net, window, config.pole_resolution);
    Matrix poles(static_cast<Eigen::Index>(report.poles.poles.size()), 3);
    for (std::size_t i = 0; i < report.poles.poles.size(); ++i) {
      const auto& p = report.poles.poles[i];
      poles.row(static_cast<Eigen::Index>(i)) << p.location.real(), p.location.imag(), p.multiplicity;
    }
    io::write_matrix(out / "poles.csv", poles);
    if (portrait.failed) report.notes.push_back(std::to_string(portrait.failed) + " phase-portrait nodes hit a pole");
  }
  io::write_text(out / "report.txt", report.to_text());
  return report;
}

const std::vector<std::string>& benchmark_suites() {
  static const std::vector<std::string> s{"pairs_sweep",        "points_sweep",       "noise_sweep",
                                          "activation_compare", "quadrature_compare", "gap_study"};
  return s;
}

namespace {

train::Dataset first_samples(const train::Dataset& d, std::size_t n) {
  train::Dataset out = d;
  const auto rows = static_cast<Eigen::Index>(std::min(n, d.samples()));
  for (auto& f : out.forcing) f = Matrix(f.topRows(rows));
  for (auto& u : out.response) u = Matrix(u.topRows(rows));
  return out;
}

std::string label(double v) { return io::format_double(v); }

}  // namespace

std::vector<BenchmarkRow> run_benchmark(const io::ExperimentConfig& config, const BenchmarkProgress& progress) {
  const std::string& suite = config.suite;
  if (std::find(benchmark_suites().begin(), benchmark_suites().end(), suite) == benchmark_suites().end())
    throw UsageError("unknown benchmark suite '" + suite + "'");
  if (!bvp::has_exact_green(config.operator_id))
    throw UsageError("benchmarks need an operator with a closed-form kernel");
  std::vector<std::uint64_t> seeds = config.seeds;
  if (seeds.empty()) seeds.push_back(config.train.seed);

  // Each cell: a label, the swept value, and how to build its dataset and training config.
  struct Cell {
    std::string name;
    double value = 0.0;
    std::function<train::Dataset()> data;
    train::TrainConfig train;
  };
  std::vector<Cell> cells;
  std::vector<double> values = config.values;

  if (suite == "pairs_sweep") {
    if (values.empty()) values = {1, 2, 3, 5, 8, 12, 20, 35, 60, 100};
    io::ExperimentConfig c = config;
    c.generate.samples = static_cast<std::size_t>(*std::max_element(values.begin(), values.end()));
    auto full = std::make_shared<train::Dataset>();
    for (double v : values)
      cells.push_back({"N=" + label(v), v,
                       [c, full, v] {
                         if (full->forcing.empty()) *full = make_dataset(c);
                         return first_samples(*full, static_cast<std::size_t>(v));
                       },
                       config.train});
  } else if (suite == "points_sweep") {
    if (values.empty()) values = {3, 5, 8, 12, 20, 35, 60, 100};
    for (double v : values) {
      io::ExperimentConfig c = config;
      c.generate.response_points = static_cast<std::size_t>(v);
      cells.push_back({"N_u=" + label(v), v, [c] { return make_dataset(c); }, config.train});
    }
  } else if (suite == "noise_sweep") {
    if (values.empty()) values = {0.0, 0.05, 0.1, 0.2, 0.35, 0.5};
    for (double v : values) {
      io::ExperimentConfig c = config;
      c.noise = v;
      cells.push_back({"noise=" + label(v), v, [c] { return make_dataset(c); }, config.train});
    }
  } else if (suite == "activation_compare") {
    for (auto act : {nn::Activation::rational, nn::Activation::relu, nn::Activation::tanh}) {
      train::TrainConfig t = config.train;
      t.activation = act;
      cells.push_back({nn::to_string(act), 0.0, [config] { return make_dataset(config); }, t});
    }
  } else if (suite == "quadrature_compare") {
    for (const char* q : {"trapezoid", "montecarlo"})
      for (const char* s : {"uniform", "random"}) {
        io::ExperimentConfig c = config;
        c.generate.quadrature = q;
        c.generate.sampling = s;
        cells.push_back({std::string(q) + "/" + s, 0.0, [c] { return make_dataset(c); }, config.train});
      }
  } else if (suite == "gap_study") {
    io::ExperimentConfig full = config;
    full.mask.reset();
    io::ExperimentConfig gap = config;
    if (!gap.mask) gap.mask = std::make_pair(0.5, 0.7);
    cells.push_back({"no_gap", 0.0, [full] { return make_dataset(full); }, config.train});
    cells.push_back({"gap=" + label(gap.mask->first) + ":" + label(gap.mask->second), 0.0,
                     [gap] { return make_dataset(gap); }, config.train});
  }

  std::vector<BenchmarkRow> rows;
  for (auto& cell : cells)
    for (std::uint64_t seed : seeds) {
      BenchmarkRow row;
      row.suite = suite;
      row.cell = cell.name;
      row.value = cell.value;
      row.seed = seed;
      const auto start = std::chrono::steady_clock::now();
      try {
        const train::Dataset d = cell.data();
        train::TrainConfig t = cell.train;
        t.seed = seed;
        const auto model = train::train(d, t);
        row.final_loss = model.rows[0].final_loss;
        row.relative_error = kernel_error(model, config.grid_points);
      } catch (const std::exception& e) {
        row.relative_error = std::numeric_limits<double>::quiet_NaN();
        row.status = std::string("failed: ") + e.what();
      }
      row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (progress) progress(row);
      rows.push_back(row);
    }
  return rows;
}

std::string format_benchmark(const std::vector<BenchmarkRow>& rows) {
  std::string out = "suite,cell,value,seed,relative_error_percent,final_loss,runtime_seconds,status\n";
  auto num = [](double v) { return std::isfinite(v) ? io::format_double(v) : std::string("nan"); };
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += r.suite + "," + r.cell + "," + num(r.value) + "," + std::to_string(r.seed) + "," + num(r.relative_error) +
           "," + num(r.final_loss) + "," + num(r.runtime) + "," + status + "\n";
  }
  return out;
}

}  // namespace greenlearn::pipeline
