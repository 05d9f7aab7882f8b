#pragma once

#include "greenlearn/catalog.hpp"
#include "greenlearn/linalg.hpp"
#include "greenlearn/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace greenlearn::io {

namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

// Matrix files: first line "rows,cols", then one row per line with
// comma-separated values in 17 significant digits.
std::string format_matrix(const linalg::Matrix& m);
linalg::Matrix parse_matrix(std::string_view text, const std::string& origin = "matrix");
void write_matrix(const fs::path& path, const linalg::Matrix& m);
linalg::Matrix read_matrix(const fs::path& path);

std::string format_double(double v);
double parse_double(std::string_view text, const std::string& origin);

std::uint32_t crc32(std::string_view bytes);

struct FileRecord {
  std::string name;  // relative to the directory, '/' separated
  std::uint32_t crc = 0;
  std::size_t bytes = 0;
};

/// Contents of manifest.txt: metadata sections plus the file inventory.
struct Manifest {
  int version = kFormatVersion;
  std::string kind;  // dataset | checkpoint
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::vector<FileRecord> files;

  const std::string& get(const std::string& section, const std::string& key) const;
  std::optional<std::string> find(const std::string& section, const std::string& key) const;
  std::string to_text() const;
  static Manifest parse(const std::string& text);
};

Manifest read_manifest(const fs::path& dir);
/// Recomputes every inventory checksum; throws IoError on the first mismatch.
void verify_inventory(const fs::path& dir, const Manifest& m);

/// Directory layout: manifest.txt, forcing_grid.csv, response_grid.csv,
/// weights_forcing.csv, weights_response.csv, F.csv and U.csv (first
/// component), and components/F_k.csv, U_k.csv for multi-component datasets.
Manifest write_dataset(const train::Dataset& d, const fs::path& dir);
train::Dataset read_dataset(const fs::path& dir);

/// Reads a dataset produced outside this library: the manifest must declare
/// the component counts and every component file must be present.
train::Dataset import_external_dataset(const fs::path& dir);

/// Network parameters, rational coefficients, loss history and Adam state.
Manifest write_checkpoint(const train::TrainedModel& model, const fs::path& dir);
train::TrainedModel read_checkpoint(const fs::path& dir);

/// iteration,phase,loss,gradient_norm,wall_time
std::string format_log(const std::vector<train::LogEntry>& log);
std::vector<train::LogEntry> parse_log(std::string_view text, const std::string& origin = "log");

/// Experiment configuration read from INI files. Unknown sections or keys are errors.
struct ExperimentConfig {
  std::string operator_id = "helmholtz_K15";
  catalog::GenerateOptions generate;
  train::TrainConfig train;
  double noise = 0.0;  // fraction
  std::optional<std::uint64_t> noise_seed;
  std::optional<std::pair<double, double>> mask;  // excluded response interval

  // Benchmark suites.
  std::string suite;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;

  // Extraction.
  std::size_t grid_points = 1000;
  std::size_t eigen_count = 100;
  std::size_t pole_resolution = 512;
};

/// Applies one key of one section; throws UsageError for unknown keys.
void apply_setting(ExperimentConfig& c, const std::string& section, const std::string& key, const std::string& value,
                   const std::string& origin = "override");
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig load_config(const fs::path& path);

/// Writes text to a file, creating parent directories; throws IoError.
void write_text(const fs::path& path, std::string_view text);
std::string read_text(const fs::path& path);

}  // namespace greenlearn::io
