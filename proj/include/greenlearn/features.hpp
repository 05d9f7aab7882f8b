#pragma once

#include "greenlearn/bvp.hpp"
#include "greenlearn/linalg.hpp"
#include "greenlearn/rational_net.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace greenlearn::features {

using Kernel = std::function<double(double, double)>;

/// Kernel values on a tensor grid: values(i, k) = G(x_i, y_k).
struct KernelGrid {
  linalg::Grid x;
  linalg::Grid y;
  linalg::Matrix values;
  std::size_t nonfinite = 0;  // entries that hit a pole (stored as 0)

  bool square() const;
};

/// n trapezoid points per axis over [a, b] x [a, b].
KernelGrid sample_kernel(const nn::Mlp& net, double a, double b, std::size_t n = 1000);
KernelGrid sample_kernel(const Kernel& g, double a, double b, std::size_t n = 1000);

/// 100 ||G_exact - G|| / ||G_exact|| with the tensor trapezoid rule of the grid.
double relative_l2_error(const KernelGrid& learned, const KernelGrid& exact);
double relative_l2_error(const KernelGrid& learned, const Kernel& exact);

/// ||G - G^T||_F / ||G||_F; requires identical axes.
double symmetry_score(const KernelGrid& grid);
double symmetry_score(const linalg::Matrix& values);

/// Residual of the homogeneous form of a constraint applied to G(., y),
/// maximized over y. Dirichlet: |G(x0, y)|; integral: |sum_i w_i G(x_i, y)|;
/// periodic: |G(a, y) - G(b, y)|; jump: largest one-sided value at the jump.
double constraint_residual(const KernelGrid& grid, const bvp::Constraint& c);
/// Residual of the full constraint for a homogeneous solution sampled on `grid`.
double constraint_residual(const linalg::Grid& grid, const linalg::Vector& u, const bvp::Constraint& c);

struct EigenPairs {
  linalg::Vector values;     // descending magnitude
  linalg::Matrix functions;  // n x k, L2-normalized, first significant entry positive
};

/// Nystrom eigenpairs of the integral operator, from the symmetrized
/// W^(1/2) G W^(1/2).
EigenPairs integral_operator_eig(const KernelGrid& grid, std::size_t k = 100);

struct SingularTriples {
  linalg::Vector values;
  linalg::Matrix left;   // n_x x k
  linalg::Matrix right;  // n_y x k
};

SingularTriples integral_operator_svd(const KernelGrid& grid, std::size_t k = 100);

// Complex-plane diagnostics.

struct Window {
  double re_min = 0.0;
  double re_max = 1.0;
  double im_min = -0.6;
  double im_max = 0.6;
};

/// Batched complex function; the flag reports points where evaluation failed.
using ComplexBatch =
    std::function<std::vector<std::complex<double>>(std::span<const std::complex<double>>, std::vector<bool>& failed)>;

ComplexBatch network_function(const nn::Mlp& net);
ComplexBatch pointwise(std::function<std::complex<double>(std::complex<double>)> f);

/// arg f(z) on resolution x resolution nodes covering the window (both ends
/// included); row index is the imaginary part.
struct PhasePortrait {
  Window window;
  std::size_t resolution = 0;
  linalg::Matrix argument;  // NaN where evaluation failed
  std::size_t failed = 0;
};

PhasePortrait phase_portrait(const ComplexBatch& f, const Window& window, std::size_t resolution = 512);
PhasePortrait phase_portrait(const nn::Mlp& net, const Window& window, std::size_t resolution = 512);

struct Pole {
  std::complex<double> location;
  int multiplicity = 1;
  double cell_width = 0.0;  // width of the refined cell containing the pole
};

struct PoleReport {
  std::vector<Pole> poles;
  bool overlapping = false;  // a cell winding could not be split into isolated poles
  bool saturated = false;    // some cells touch failed evaluations
};

/// Cells whose boundary phase winds by -2 pi m; each is refined by two
/// bisection passes to localize the pole.
PoleReport detect_poles(const ComplexBatch& f, const Window& window, std::size_t resolution = 512);
PoleReport detect_poles(const nn::Mlp& net, const Window& window, std::size_t resolution = 512);

struct FeatureReport {
  std::string operator_id;
  std::optional<double> relative_error;  // percent
  double symmetry = 0.0;
  std::vector<std::pair<std::string, double>> constraint_residuals;
  linalg::Vector eigenvalues;
  linalg::Vector singular_values;
  PoleReport poles;
  std::vector<std::string> notes;

  std::string to_text() const;
};

}  // namespace greenlearn::features
