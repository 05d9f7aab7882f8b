#pragma once

#include "greenlearn/linalg.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace greenlearn::gp {

enum class KernelFamily { squared_exponential, periodic };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Covariance kernel. `length_scale` is in the units of x. For the periodic
/// family distances are measured in units of `period`, so with period 1 the
/// kernel reads exp(-2 sin^2(pi |x - y|) / l^2) and l is dimensionless.
struct KernelSpec {
  KernelFamily family = KernelFamily::squared_exponential;
  double length_scale = 0.03;
  double period = 1.0;

  /// Squared-exponential kernel with l = lambda (b - a).
  static KernelSpec squared_exponential(double normalized_length_scale, double a, double b);
  /// Periodic kernel whose period is the interval length; lambda is used as is.
  static KernelSpec periodic(double normalized_length_scale, double a, double b);

  /// lambda = l / (b - a) for the SE family, l itself for the periodic family.
  double normalized_length_scale(double a, double b) const;
};

double kernel_eval(const KernelSpec& spec, double x, double y);

/// K(p_i, p_j) for 1-D points, or Euclidean distance for planar points (SE only).
linalg::Matrix kernel_matrix(const KernelSpec& spec, const linalg::Matrix& points);
/// Cross-covariance K(p_i, q_j), rows indexed by `left`.
linalg::Matrix kernel_matrix(const KernelSpec& spec, const linalg::Matrix& left, const linalg::Matrix& right);

/// A batch of GP draws. Each draw is represented by its kernel interpolant
/// f_j(x) = sum_k coefficients(j, k) K(x, grid_k), which is smooth and can be
/// evaluated anywhere; `values` holds that interpolant on the grid.
struct ForcingSample {
  KernelSpec kernel;
  linalg::Grid grid;
  linalg::Matrix values;        // n x N_f, one draw per row
  linalg::Matrix coefficients;  // n x N_f
  std::uint64_t seed = 0;
  double jitter = 0.0;
  bool below_resolution = false;  // lambda < 1/N_f was accepted (non-strict mode)

  std::size_t count() const { return static_cast<std::size_t>(values.rows()); }
  /// Draws evaluated at arbitrary points (m x d); returns n x m.
  linalg::Matrix evaluate(const linalg::Matrix& points) const;
};

struct SampleOptions {
  /// Reject (rather than accept) a length scale below the grid resolution bound.
  bool strict_resolution = false;
};

/// n zero-mean draws with covariance K(grid, grid): z is standard normal from
/// Rng(seed), L the jittered Cholesky factor of K, and the interpolant
/// coefficients solve L^T c = z so that K c reproduces L z up to the jitter.
/// The resolution bound lambda >= 1/N_f is checked against [a, b].
ForcingSample sample_gp(const KernelSpec& spec, const linalg::Grid& grid, std::size_t n, std::uint64_t seed,
                        double a, double b, const SampleOptions& options = {});

/// Same construction on planar points inside the closed unit disk.
ForcingSample sample_gp_disk(const KernelSpec& spec, const linalg::Grid& grid, std::size_t n, std::uint64_t seed);

}  // namespace greenlearn::gp
