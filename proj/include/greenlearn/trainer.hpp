#pragma once

#include "greenlearn/gp.hpp"
#include "greenlearn/linalg.hpp"
#include "greenlearn/rational_net.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace greenlearn::train {

/// Excitation/response pairs on fixed grids. Scalar problems have one forcing
/// and one response component; systems carry n_f and n_u components sharing
/// the two grids.
struct Dataset {
  std::string operator_id;
  double a = 0.0;  // domain bounds (1-D); the disk uses [-1, 1]
  double b = 1.0;
  linalg::Grid forcing_grid;
  linalg::Grid response_grid;
  std::vector<linalg::Matrix> forcing;   // per component, N x N_f
  std::vector<linalg::Matrix> response;  // per component, N x N_u

  std::optional<gp::KernelSpec> kernel;
  std::uint64_t seed = 0;
  double noise = 0.0;  // relative noise level as a fraction (0.2 is 20%)
  std::string mask = "none";
  double normalization = 1.0;  // product of all scale factors applied to U and F
  std::string quadrature = "trapezoid";
  std::string sampling = "uniform";
  std::string notes;

  int dim() const { return forcing_grid.dim(); }
  std::size_t samples() const { return forcing.empty() ? 0 : static_cast<std::size_t>(forcing.front().rows()); }
  int forcing_components() const { return static_cast<int>(forcing.size()); }
  int response_components() const { return static_cast<int>(response.size()); }
  /// ||u_j||^2 by the response quadrature, one entry per sample.
  linalg::Vector response_norms(int component) const;
  void validate() const;
};

/// U and F scaled by 1 / max_j ||u_j||_inf (over all response components).
Dataset normalize_dataset(const Dataset& d);
/// u(x_i) (1 + delta c_ij) with i.i.d. standard normal c_ij; delta is a fraction.
Dataset add_noise(const Dataset& d, double delta, std::uint64_t seed);
/// Drops response points in [lo, hi] and rebuilds the response quadrature on
/// the retained points with the dataset's rule.
Dataset mask_measurements(const Dataset& d, double lo, double hi);
/// Keeps the listed response indices (ascending).
Dataset mask_measurements(const Dataset& d, std::span<const std::size_t> kept);

struct TrainConfig {
  int adam_epochs = 1000;
  double adam_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int lbfgs_max_iters = 10000;
  int lbfgs_memory = 10;
  double gradient_tolerance = 1e-9;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  std::uint64_t seed = 1;
  nn::Activation activation = nn::Activation::rational;
  std::vector<int> hidden = {50, 50, 50, 50};

  void validate() const;
};

struct LogEntry {
  std::size_t iteration = 0;
  std::string phase;  // init, adam, lbfgs
  double loss = 0.0;
  double gradient_norm = 0.0;
  double wall_time = 0.0;  // seconds since the start of training this row
};

/// Networks for one response component: n_f Green's function networks and
/// one homogeneous-solution network, trained jointly.
struct RowModel {
  std::vector<nn::Mlp> green;
  nn::Mlp homogeneous;
  std::vector<LogEntry> log;
  std::size_t phase_boundary = 0;  // index into `log` of the last Adam entry
  double final_loss = 0.0;
  double wall_time = 0.0;

  // Optimizer state for resuming inside the Adam phase.
  int adam_steps = 0;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  bool finished = false;
};

struct TrainedModel {
  std::string operator_id;
  double a = 0.0;
  double b = 1.0;
  int dim = 1;
  std::uint64_t seed = 0;
  nn::Activation activation = nn::Activation::rational;
  std::vector<RowModel> rows;  // one per response component

  int response_components() const { return static_cast<int>(rows.size()); }
  int forcing_components() const { return rows.empty() ? 0 : static_cast<int>(rows.front().green.size()); }
  const nn::Mlp& green(int row, int column) const { return rows[static_cast<std::size_t>(row)].green[static_cast<std::size_t>(column)]; }
};

/// Fresh networks for every row, seeded from config.seed.
TrainedModel init_model(const Dataset& d, const TrainConfig& config);

/// Discretized mean relative squared error of one response row.
class LossProblem {
 public:
  LossProblem(const Dataset& d, int row);

  std::size_t parameter_count(const RowModel& model) const;
  std::vector<double> pack(const RowModel& model) const;
  void unpack(std::span<const double> params, RowModel& model) const;

  /// Loss at the model's current parameters; fills `grad` (same packing as
  /// pack()) when non-null. Non-finite losses are returned as +infinity.
  double evaluate(const RowModel& model, std::vector<double>* grad) const;

  /// Predicted responses (N x N_u) of the row for the dataset's forcings.
  linalg::Matrix predict(const RowModel& model) const;

  /// Input matrix of the product grid (2d x N_u N_f), point index i + N_u k.
  const linalg::Matrix& product_inputs() const { return product_; }

 private:
  const Dataset* data_;
  int row_;
  linalg::Matrix product_;
  linalg::Matrix response_inputs_;  // d x N_u
  linalg::Vector norms_;
  mutable std::vector<nn::ForwardCache> caches_;
  mutable nn::ForwardCache hom_cache_;
};

/// The same loss for explicit kernel matrices G_k(x_i, y_l) (N_u x N_f each)
/// and homogeneous values at the response points (empty means zero).
double kernel_loss(const Dataset& d, int row, const std::vector<linalg::Matrix>& green,
                   const linalg::Vector& homogeneous);

struct Progress {
  int row = 0;
  const LogEntry* entry = nullptr;
};

/// Called after each logged iteration; returning false stops training and
/// leaves the model resumable (only inside the Adam phase or at its end).
using ProgressCallback = std::function<bool(const Progress&)>;

/// Adam for adam_epochs steps, then L-BFGS with a strong Wolfe line search.
/// When `resume` is given, training continues from its parameters and Adam state.
TrainedModel train(const Dataset& d, const TrainConfig& config, const TrainedModel* resume = nullptr,
                   const ProgressCallback& progress = {});

/// Green's function network evaluated on a kernel grid: values(i, k) = N(x_i, y_k).
/// x and y are n x d point matrices.
linalg::Matrix evaluate_green(const nn::Mlp& net, const linalg::Matrix& x, const linalg::Matrix& y);
linalg::Vector evaluate_homogeneous(const nn::Mlp& net, const linalg::Matrix& x);

}  // namespace greenlearn::train
