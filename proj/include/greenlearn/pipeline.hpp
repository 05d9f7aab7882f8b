#pragma once

#include "greenlearn/dataset_io.hpp"
#include "greenlearn/features.hpp"
#include "greenlearn/trainer.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace greenlearn::pipeline {

/// Generates the configured dataset and applies the configured noise and mask.
train::Dataset make_dataset(const io::ExperimentConfig& config);
train::Dataset apply_transforms(const train::Dataset& d, const io::ExperimentConfig& config);

/// Relative L2 error (percent) of a scalar 1-D model against the catalog's
/// closed-form kernel on an n x n grid.
double kernel_error(const train::TrainedModel& model, std::size_t n = 1000);

/// Mean over samples of ||prediction - u_j|| / ||u_j||, all response
/// components together, with the dataset's response quadrature.
double prediction_error(const train::TrainedModel& model, const train::Dataset& d);

/// Computes the feature report and writes it with the exported grids into
/// `out`: report.txt, x.csv, kernel[_r_c].csv, homogeneous.csv, and for 1-D
/// scalar models eigenvalues.csv, eigenfunctions.csv, singular_values.csv,
/// left_singular.csv, right_singular.csv, and with rational activations
/// phase_portrait.csv and poles.csv.
features::FeatureReport extract(const train::TrainedModel& model, const io::ExperimentConfig& config,
                                const std::filesystem::path& out);

struct BenchmarkRow {
  std::string suite;
  std::string cell;
  double value = 0.0;
  std::uint64_t seed = 0;
  double relative_error = 0.0;  // percent; NaN when the cell failed
  double final_loss = 0.0;
  double runtime = 0.0;  // seconds
  std::string status = "ok";
};

using BenchmarkProgress = std::function<void(const BenchmarkRow&)>;

/// Runs one suite (pairs_sweep, points_sweep, noise_sweep, activation_compare,
/// quadrature_compare, gap_study). Failed cells are recorded and the suite continues.
std::vector<BenchmarkRow> run_benchmark(const io::ExperimentConfig& config, const BenchmarkProgress& progress = {});
std::string format_benchmark(const std::vector<BenchmarkRow>& rows);

const std::vector<std::string>& benchmark_suites();

}  // namespace greenlearn::pipeline
