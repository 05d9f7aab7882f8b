#include "greenlearn/linalg.hpp"

#include "greenlearn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace greenlearn::linalg {

std::vector<double> Grid::coordinates() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = points(static_cast<Eigen::Index>(i), 0);
  return out;
}

std::vector<double> trapezoid_weights(std::span<const double> points) {
  const std::size_t n = points.size();
  if (n < 2) throw UsageError("trapezoid_weights: need at least 2 points");
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double delta = points[i] - points[i - 1];
    if (!(delta > 0.0)) throw UsageError("trapezoid_weights: points must be strictly increasing");
    w[i - 1] += 0.5 * delta;
    w[i] += 0.5 * delta;
  }
  return w;
}

std::vector<double> montecarlo_weights(std::span<const double> points, double domain_measure) {
  if (points.empty()) throw UsageError("montecarlo_weights: empty point set");
  if (!(domain_measure > 0.0)) throw UsageError("montecarlo_weights: domain measure must be positive");
  return std::vector<double>(points.size(), domain_measure / static_cast<double>(points.size()));
}

Grid make_grid(std::span<const double> points, QuadratureRule rule, double domain_measure) {
  const auto w = rule == QuadratureRule::trapezoid ? trapezoid_weights(points)
                                                   : montecarlo_weights(points, domain_measure);
  Grid g;
  g.points.resize(static_cast<Eigen::Index>(points.size()), 1);
  g.weights.resize(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    g.points(static_cast<Eigen::Index>(i), 0) = points[i];
    g.weights(static_cast<Eigen::Index>(i)) = w[i];
  }
  return g;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> x(n);
  if (n == 1) {
    x[0] = a;
    return x;
  }
  for (std::size_t i = 0; i < n; ++i) {
    // Endpoints exact; interior by affine map to avoid accumulated drift.
    x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  x[n - 1] = b;
  return x;
}

CholeskyResult cholesky_jittered(const Matrix& a) {
  if (a.rows() != a.cols()) throw UsageError("cholesky_jittered: matrix must be square");
  const double mean_diag = a.rows() > 0 ? a.diagonal().mean() : 0.0;
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
  static constexpr double ladder[] = {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4};
  Matrix shifted = a;
  for (double rung : ladder) {
    const double jitter = rung * scale;
    shifted.diagonal() = a.diagonal().array() + jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Matrix l = llt.matrixL();
    if (!l.allFinite()) continue;
    return {std::move(l), jitter};
  }
  throw NumericError("cholesky_jittered: matrix is not positive semi-definite within jitter 1e-4 x mean diagonal");
}

EigenDecomposition sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw UsageError("sym_eig: matrix must be square");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("sym_eig: eigensolver did not converge");
  const Eigen::Index n = sym.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Vector& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     // equal magnitudes: positive value first
                     if (std::abs(ev(i)) != std::abs(ev(j))) return std::abs(ev(i)) > std::abs(ev(j));
                     return ev(i) > ev(j);
                   });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = ev(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

Svd svd(const Matrix& a) {
  if (!a.allFinite()) throw UsageError("svd: matrix has non-finite entries");
  Eigen::BDCSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) throw NumericError("svd: did not converge");
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

double frobenius(const Matrix& a) { return a.norm(); }

}  // namespace greenlearn::linalg
