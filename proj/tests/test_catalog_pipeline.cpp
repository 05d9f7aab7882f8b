#include <doctest.h>

#include "greenlearn/bvp.hpp"
#include "greenlearn/catalog.hpp"
#include "greenlearn/dataset_io.hpp"
#include "greenlearn/error.hpp"
#include "greenlearn/pipeline.hpp"

#include <cmath>
#include <filesystem>

using namespace greenlearn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("greenlearn_test_" + name);
  fs::remove_all(p);
  return p;
}

io::ExperimentConfig quick(const std::string& id) {
  io::ExperimentConfig c;
  c.operator_id = id;
  c.generate.samples = 4;
  c.generate.forcing_points = 25;
  c.generate.response_points = 12;
  c.generate.nodes_per_piece = 96;
  c.train.hidden = {6, 6};
  c.train.adam_epochs = 10;
  c.train.lbfgs_max_iters = 5;
  c.grid_points = 120;
  c.eigen_count = 10;
  c.pole_resolution = 64;
  return c;
}

}  // namespace

TEST_SUITE("catalog_pipeline") {

TEST_CASE("default sizes") {
  const catalog::GenerateOptions o;
  CHECK(o.samples == 100);
  CHECK(o.forcing_points == 200);
  CHECK(o.response_points == 100);
  const train::TrainConfig t;
  CHECK(t.adam_epochs == 1000);
  CHECK(t.lbfgs_max_iters == 10000);
  CHECK(t.hidden == std::vector<int>{50, 50, 50, 50});
}

TEST_CASE("catalog lookup") {
  CHECK(catalog::entries().size() == 15);
  CHECK(catalog::known("laplace"));
  CHECK_FALSE(catalog::known("wave"));
  CHECK_THROWS_AS(catalog::entry("wave"), UsageError);
  CHECK(catalog::entry("ode_system").components == 2);
  CHECK(catalog::entry("poisson_disk").dim == 2);
  for (const auto& e : catalog::entries()) {
    CAPTURE(e.id);
    CHECK_FALSE(e.description.empty());
    CHECK(e.a < e.b);
  }
}

TEST_CASE("propagator setup") {
  const catalog::PropagatorSetup s;
  CHECK(s.a == -3.0);
  CHECK(s.b == 3.0);
  CHECK(s.dt == 0.02);
  CHECK(s.potential(1.5) == 2.25);
  CHECK(s.damping(0.0) == 1.0);
  CHECK(s.damping(2.0) == doctest::Approx(std::exp(-64.0 / 20.0)));
  CHECK(s.damping(-2.0) == s.damping(2.0));
}

TEST_CASE("every catalog entry generates finite data") {
  for (const auto& e : catalog::entries()) {
    CAPTURE(e.id);
    auto c = quick(e.id);
    const auto d = pipeline::make_dataset(c);
    CHECK(d.operator_id == e.id);
    CHECK(d.samples() == 4);
    CHECK(d.forcing_components() == e.components);
    CHECK(d.response_components() == e.components);
    for (const auto& m : d.response) CHECK(m.allFinite());
    for (const auto& m : d.forcing) CHECK(m.allFinite());
    CHECK_NOTHROW(d.validate());
  }
}

TEST_CASE("periodic forcing grid covers one period once") {
  catalog::GenerateOptions o;
  o.samples = 10;
  const auto d = catalog::generate("helmholtz_periodic", o);
  REQUIRE(d.forcing_grid.size() == 200);
  CHECK(d.forcing_grid.points(0, 0) == 0.0);
  CHECK(d.forcing_grid.points(199, 0) == doctest::Approx(0.995));
  CHECK(d.forcing_grid.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.forcing_grid.weights.minCoeff() == d.forcing_grid.weights.maxCoeff());
  // Responses still include both ends, where periodicity makes them equal.
  CHECK((d.response[0].col(0) - d.response[0].col(99)).cwiseAbs().maxCoeff() <=
        1e-8 * d.response[0].cwiseAbs().maxCoeff());

  // The closed-form kernel explains the data to quadrature accuracy.
  const auto exact = bvp::exact_green("helmholtz_periodic");
  linalg::Matrix g(100, 200);
  for (Eigen::Index i = 0; i < 100; ++i)
    for (Eigen::Index k = 0; k < 200; ++k) g(i, k) = exact.green(d.response_grid.points(i, 0), d.forcing_grid.points(k, 0));
  CHECK(train::kernel_loss(d, 0, {g}, linalg::Vector()) <= 1e-4);
}

TEST_CASE("disk grid") {
  const auto g = catalog::disk_grid(14);
  CHECK(g.points.cols() == 2);
  CHECK(g.points.row(0).norm() == 0.0);
  CHECK(g.points.rowwise().norm().maxCoeff() == doctest::Approx(1.0));
  CHECK(g.weights.sum() == doctest::Approx(M_PI).epsilon(0.02));
}

TEST_CASE("configured transforms") {
  auto c = quick("helmholtz_K15");
  c.generate.response_points = 100;
  c.mask = std::make_pair(0.5, 0.7);
  const auto d = pipeline::make_dataset(c);
  CHECK(d.response_grid.size() == 80);
  CHECK(d.mask != "none");

  auto n = quick("helmholtz_K15");
  const auto clean = pipeline::make_dataset(n);
  n.noise = 0.1;
  const auto noisy = pipeline::make_dataset(n);
  CHECK(noisy.forcing[0] == clean.forcing[0]);
  CHECK(noisy.response[0] != clean.response[0]);
}

TEST_CASE("extract writes a consistent report") {
  const auto c = quick("laplace");
  const auto d = pipeline::make_dataset(c);
  const auto model = train::train(d, c.train);
  const auto dir = scratch("extract");
  const auto report = pipeline::extract(model, c, dir);
  CHECK(report.relative_error == doctest::Approx(pipeline::kernel_error(model, c.grid_points)).epsilon(1e-12));
  CHECK(report.eigenvalues.size() == 10);
  for (const char* f : {"report.txt", "x.csv", "kernel.csv", "homogeneous.csv", "eigenvalues.csv", "eigenfunctions.csv",
                        "singular_values.csv", "left_singular.csv", "right_singular.csv", "phase_portrait.csv",
                        "poles.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }
  const auto kernel = io::read_matrix(dir / "kernel.csv");
  CHECK(kernel.rows() == 120);
  CHECK(kernel.cols() == 120);
  CHECK(io::read_text(dir / "report.txt") == report.to_text());
}

TEST_CASE("prediction error of a trained model") {
  auto c = quick("laplace");
  c.train.adam_epochs = 50;
  c.train.lbfgs_max_iters = 200;
  const auto d = pipeline::make_dataset(c);
  const auto model = train::train(d, c.train);
  const double e = pipeline::prediction_error(model, d);
  CHECK(e >= 0.0);
  CHECK(e < 0.5);
  CHECK_THROWS_AS(pipeline::kernel_error(train::train(pipeline::make_dataset(quick("ode_system")), c.train)),
                  UsageError);
}

TEST_CASE("benchmark records failed cells and continues") {
  auto c = quick("helmholtz_K15");
  c.suite = "points_sweep";
  c.values = {0, 8};
  c.train.adam_epochs = 3;
  c.train.lbfgs_max_iters = 2;
  std::size_t seen = 0;
  const auto rows = pipeline::run_benchmark(c, [&](const pipeline::BenchmarkRow&) { ++seen; });
  REQUIRE(rows.size() == 2);
  CHECK(seen == 2);
  CHECK(rows[0].status.rfind("failed", 0) == 0);
  CHECK(std::isnan(rows[0].relative_error));
  CHECK(rows[1].status == "ok");
  CHECK(std::isfinite(rows[1].relative_error));
  const auto csv = pipeline::format_benchmark(rows);
  CHECK(csv.find("points_sweep,N_u=8,") != std::string::npos);
  CHECK(csv.find(",nan,") != std::string::npos);

  c.suite = "nonsense";
  CHECK_THROWS_AS(pipeline::run_benchmark(c), UsageError);
  c.suite = "noise_sweep";
  c.operator_id = "cubic_helmholtz";
  CHECK_THROWS_AS(pipeline::run_benchmark(c), UsageError);
}

}  // TEST_SUITE
