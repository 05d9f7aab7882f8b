#include "greenlearn/gp.hpp"

#include "greenlearn/error.hpp"
#include "greenlearn/rng.hpp"

#include <cmath>
#include <numbers>

namespace greenlearn::gp {

std::string to_string(KernelFamily family) {
  return family == KernelFamily::squared_exponential ? "squared_exponential" : "periodic";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "squared_exponential" || name == "se") return KernelFamily::squared_exponential;
  if (name == "periodic") return KernelFamily::periodic;
  throw UsageError("unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::squared_exponential(double normalized_length_scale, double a, double b) {
  return {KernelFamily::squared_exponential, normalized_length_scale * (b - a), 1.0};
}

KernelSpec KernelSpec::periodic(double normalized_length_scale, double a, double b) {
  return {KernelFamily::periodic, normalized_length_scale, b - a};
}

double KernelSpec::normalized_length_scale(double a, double b) const {
  return family == KernelFamily::squared_exponential ? length_scale / (b - a) : length_scale;
}

namespace {

void check_spec(const KernelSpec& spec) {
  if (!(spec.length_scale > 0.0)) throw UsageError("kernel length scale must be positive");
  if (!(spec.period > 0.0)) throw UsageError("kernel period must be positive");
}

double kernel_of_distance(const KernelSpec& spec, double distance) {
  if (spec.family == KernelFamily::squared_exponential) {
    return std::exp(-distance * distance / (2.0 * spec.length_scale * spec.length_scale));
  }
  const double s = std::sin(std::numbers::pi * distance / spec.period);
  return std::exp(-2.0 * s * s / (spec.length_scale * spec.length_scale));
}

ForcingSample draw(const KernelSpec& spec, const linalg::Matrix& covariance, const linalg::Grid& grid, std::size_t n,
                   std::uint64_t seed) {
  auto chol = linalg::cholesky_jittered(covariance);
  const Eigen::Index m = covariance.rows();
  linalg::Matrix z(m, static_cast<Eigen::Index>(n));
  Rng rng(seed);
  // Column-by-column fill keeps draw j independent of how many draws follow it.
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < m; ++i) z(i, j) = rng.normal();
  const linalg::Matrix coeffs = chol.lower.transpose().triangularView<Eigen::Upper>().solve(z);
  ForcingSample out;
  out.kernel = spec;
  out.grid = grid;
  out.coefficients = coeffs.transpose();
  out.values = (covariance * coeffs).transpose();
  out.seed = seed;
  out.jitter = chol.jitter;
  return out;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, double x, double y) {
  check_spec(spec);
  return kernel_of_distance(spec, std::abs(x - y));
}

linalg::Matrix kernel_matrix(const KernelSpec& spec, const linalg::Matrix& left, const linalg::Matrix& right) {
  check_spec(spec);
  if (left.cols() != right.cols()) throw UsageError("kernel_matrix: dimension mismatch");
  linalg::Matrix k(left.rows(), right.rows());
  for (Eigen::Index j = 0; j < right.rows(); ++j)
    for (Eigen::Index i = 0; i < left.rows(); ++i)
      k(i, j) = kernel_of_distance(spec, (left.row(i) - right.row(j)).norm());
  return k;
}

linalg::Matrix ForcingSample::evaluate(const linalg::Matrix& points) const {
  return coefficients * kernel_matrix(kernel, grid.points, points);
}

linalg::Matrix kernel_matrix(const KernelSpec& spec, const linalg::Matrix& points) {
  check_spec(spec);
  const Eigen::Index n = points.rows();
  linalg::Matrix k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d = (points.row(i) - points.row(j)).norm();
      k(i, j) = k(j, i) = kernel_of_distance(spec, d);
    }
  }
  return k;
}

ForcingSample sample_gp(const KernelSpec& spec, const linalg::Grid& grid, std::size_t n, std::uint64_t seed,
                        double a, double b, const SampleOptions& options) {
  check_spec(spec);
  if (grid.dim() != 1) throw UsageError("sample_gp: grid must be one-dimensional");
  const double lambda = spec.normalized_length_scale(a, b);
  const double bound = 1.0 / static_cast<double>(grid.size());
  bool below = false;
  if (lambda < bound) {
    if (options.strict_resolution) {
      throw UsageError("sample_gp: normalized length scale " + std::to_string(lambda) +
                       " is below the grid resolution 1/N_f = " + std::to_string(bound));
    }
    below = true;
  }
  auto out = draw(spec, kernel_matrix(spec, grid.points), grid, n, seed);
  out.below_resolution = below;
  return out;
}

ForcingSample sample_gp_disk(const KernelSpec& spec, const linalg::Grid& grid, std::size_t n, std::uint64_t seed) {
  check_spec(spec);
  if (grid.dim() != 2) throw UsageError("sample_gp_disk: grid must be planar");
  if (spec.family != KernelFamily::squared_exponential)
    throw UsageError("sample_gp_disk: only the squared-exponential kernel is supported");
  for (Eigen::Index i = 0; i < grid.points.rows(); ++i) {
    if (grid.points.row(i).squaredNorm() > 1.0 + 1e-12)
      throw UsageError("sample_gp_disk: point outside the closed unit disk");
  }
  return draw(spec, kernel_matrix(spec, grid.points), grid, n, seed);
}

}  // namespace greenlearn::gp
