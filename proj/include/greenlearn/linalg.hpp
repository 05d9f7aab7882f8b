#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace greenlearn::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class QuadratureRule { trapezoid, montecarlo };

/// Sample locations with their quadrature weights. `points` is n x d (one row
/// per location) so the same type serves intervals and planar domains.
struct Grid {
  Matrix points;
  Vector weights;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  /// First coordinate of every point (1-D grids).
  std::vector<double> coordinates() const;
};

std::vector<double> trapezoid_weights(std::span<const double> points);
std::vector<double> montecarlo_weights(std::span<const double> points, double domain_measure);

/// 1-D grid on the given (strictly increasing) points with the chosen rule.
/// The Monte-Carlo rule spreads `domain_measure` evenly.
Grid make_grid(std::span<const double> points, QuadratureRule rule, double domain_measure);

/// n equispaced points covering [a, b] including both ends.
std::vector<double> linspace(double a, double b, std::size_t n);

struct CholeskyResult {
  Matrix lower;
  double jitter = 0.0;  // absolute amount added to the diagonal
};

/// Cholesky factorization retried along the ladder
/// {0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4} x mean(diag A).
CholeskyResult cholesky_jittered(const Matrix& a);

struct EigenDecomposition {
  Vector values;   // sorted by descending magnitude
  Matrix vectors;  // matching columns, orthonormal
};

/// Symmetric eigendecomposition of (A + A^T)/2; ties in magnitude put the
/// positive value first.
EigenDecomposition sym_eig(const Matrix& a);

struct Svd {
  Matrix u;
  Vector sigma;  // nonnegative, descending
  Matrix v;
};

Svd svd(const Matrix& a);

double frobenius(const Matrix& a);

}  // namespace greenlearn::linalg
