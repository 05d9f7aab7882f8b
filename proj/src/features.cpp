#include "greenlearn/features.hpp"

#include "greenlearn/error.hpp"
#include "greenlearn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace greenlearn::features {

using linalg::Grid;
using linalg::Matrix;
using linalg::Vector;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

Grid axis(double a, double b, std::size_t n) {
  if (n < 2) throw UsageError("kernel grid needs at least two points per axis");
  if (!(b > a)) throw UsageError("kernel grid needs a < b");
  return linalg::make_grid(linalg::linspace(a, b, n), linalg::QuadratureRule::trapezoid, b - a);
}

void same_axes(const KernelGrid& l, const KernelGrid& r) {
  if (l.values.rows() != r.values.rows() || l.values.cols() != r.values.cols() || l.x.points != r.x.points ||
      l.y.points != r.y.points)
    throw UsageError("kernel grids are sampled on different axes");
}

std::size_t scrub(Matrix& m) {
  std::size_t bad = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data()[i])) {
      m.data()[i] = 0.0;
      ++bad;
    }
  return bad;
}

// Flip each column so its first significant entry is positive.
void fix_signs(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double scale = m.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (std::abs(m(r, c)) > 1e-8 * scale) {
        if (m(r, c) < 0.0) m.col(c) *= -1.0;
        break;
      }
  }
}

// Row of G at x0 by linear interpolation along x.
Vector row_at(const KernelGrid& g, double x0) {
  const auto xs = g.x.coordinates();
  if (x0 < xs.front() - 1e-12 || x0 > xs.back() + 1e-12) throw UsageError("constraint point lies outside the grid");
  auto it = std::lower_bound(xs.begin(), xs.end(), x0);
  if (it == xs.end()) --it;
  const auto i = static_cast<Eigen::Index>(it - xs.begin());
  if (std::abs(*it - x0) < 1e-12 || i == 0) return g.values.row(i).transpose();
  const double t = (x0 - xs[static_cast<std::size_t>(i - 1)]) / (*it - xs[static_cast<std::size_t>(i - 1)]);
  return ((1.0 - t) * g.values.row(i - 1) + t * g.values.row(i)).transpose();
}

double value_at(const Grid& grid, const Vector& u, double x0) {
  const auto xs = grid.coordinates();
  auto it = std::lower_bound(xs.begin(), xs.end(), x0);
  if (it == xs.end()) --it;
  const auto i = static_cast<std::size_t>(it - xs.begin());
  if (std::abs(*it - x0) < 1e-12 || i == 0) return u(static_cast<Eigen::Index>(i));
  const double t = (x0 - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return (1.0 - t) * u(static_cast<Eigen::Index>(i - 1)) + t * u(static_cast<Eigen::Index>(i));
}

double wrap(double d) {
  while (d > kPi) d -= 2.0 * kPi;
  while (d <= -kPi) d += 2.0 * kPi;
  return d;
}

// Winding number of arg f around a closed polygon given by its arguments.
int winding(std::span<const double> args) {
  double total = 0.0;
  for (std::size_t i = 0; i < args.size(); ++i) total += wrap(args[(i + 1) % args.size()] - args[i]);
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

struct Cell {
  double re0, im0, hx, hy;
};

// Winding number of f around the cell boundary. Each edge is sampled more
// densely until no phase step exceeds pi / 2, so fast rotations near a pole
// of higher order are not aliased.
std::optional<int> cell_winding(const ComplexBatch& f, const Cell& c, bool& saturated) {
  const cplx corner[5] = {{c.re0, c.im0}, {c.re0 + c.hx, c.im0}, {c.re0 + c.hx, c.im0 + c.hy}, {c.re0, c.im0 + c.hy},
                          {c.re0, c.im0}};
  std::vector<cplx> z;
  std::vector<bool> failed;
  for (int m = 4; m <= 512; m *= 2) {
    z.clear();
    for (int e = 0; e < 4; ++e)
      for (int j = 0; j < m; ++j) z.push_back(corner[e] + (corner[e + 1] - corner[e]) * (static_cast<double>(j) / m));
    const auto v = f(z, failed);
    std::vector<double> a(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (failed[i] || !std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) {
        saturated = true;
        return std::nullopt;
      }
      a[i] = std::arg(v[i]);
    }
    double total = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = wrap(a[(i + 1) % a.size()] - a[i]);
      total += d;
      worst = std::max(worst, std::abs(d));
    }
    if (worst < 0.5 * kPi) return static_cast<int>(std::lround(total / (2.0 * kPi)));
  }
  saturated = true;
  return std::nullopt;
}

// Splits a cell into 2 x 2 and returns the sub-cell carrying the whole winding
// (when exactly one does). The split is off-centre so that a pole sitting at
// the centre of a grid cell does not land on the new edges.
std::optional<Cell> bisect(const ComplexBatch& f, const Cell& c, int target, bool& overlapping, bool& saturated) {
  constexpr double split = 0.4637;
  const double wx[2] = {split * c.hx, (1.0 - split) * c.hx};
  const double wy[2] = {split * c.hy, (1.0 - split) * c.hy};
  std::optional<Cell> hit;
  int count = 0;
  for (int r = 0; r < 2; ++r)
    for (int k = 0; k < 2; ++k) {
      const Cell sub{c.re0 + k * wx[0], c.im0 + r * wy[0], wx[k], wy[r]};
      const auto w = cell_winding(f, sub, saturated);
      if (!w) return std::nullopt;
      if (*w < 0) {
        ++count;
        if (*w == target) hit = sub;
      }
    }
  if (count != 1 || !hit) {
    overlapping = true;
    return std::nullopt;
  }
  return hit;
}

}  // namespace

bool KernelGrid::square() const {
  return values.rows() == values.cols() && x.points.rows() == y.points.rows() && x.points == y.points;
}

KernelGrid sample_kernel(const nn::Mlp& net, double a, double b, std::size_t n) {
  if (net.input_dim() != 2) throw UsageError("sample_kernel: network is not a 1-D Green's function");
  KernelGrid g;
  g.x = axis(a, b, n);
  g.y = g.x;
  g.values = train::evaluate_green(net, g.x.points, g.y.points);
  g.nonfinite = scrub(g.values);
  return g;
}

KernelGrid sample_kernel(const Kernel& fn, double a, double b, std::size_t n) {
  KernelGrid g;
  g.x = axis(a, b, n);
  g.y = g.x;
  const auto xs = g.x.coordinates();
  g.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = fn(xs[i], xs[k]);
  g.nonfinite = scrub(g.values);
  return g;
}

double relative_l2_error(const KernelGrid& learned, const KernelGrid& exact) {
  same_axes(learned, exact);
  const Matrix w = exact.x.weights * exact.y.weights.transpose();
  const double den = (w.array() * exact.values.array().square()).sum();
  if (!(den > 0.0)) throw NumericError("relative_l2_error: exact kernel has zero norm");
  const double num = (w.array() * (learned.values - exact.values).array().square()).sum();
  return 100.0 * std::sqrt(num / den);
}

double relative_l2_error(const KernelGrid& learned, const Kernel& exact) {
  KernelGrid e;
  e.x = learned.x;
  e.y = learned.y;
  const auto xs = e.x.coordinates();
  const auto ys = e.y.coordinates();
  e.values.resize(learned.values.rows(), learned.values.cols());
  for (std::size_t k = 0; k < ys.size(); ++k)
    for (std::size_t i = 0; i < xs.size(); ++i)
      e.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = exact(xs[i], ys[k]);
  return relative_l2_error(learned, e);
}

double symmetry_score(const Matrix& values) {
  if (values.rows() != values.cols()) throw UsageError("symmetry_score: grid is not square");
  const double n = values.norm();
  if (!(n > 0.0)) return 0.0;
  return (values - values.transpose()).norm() / n;
}

double symmetry_score(const KernelGrid& grid) {
  if (!grid.square()) throw UsageError("symmetry_score: axes differ");
  return symmetry_score(grid.values);
}

double constraint_residual(const KernelGrid& g, const bvp::Constraint& c) {
  switch (c.kind) {
    case bvp::ConstraintKind::dirichlet:
      return row_at(g, c.point).cwiseAbs().maxCoeff();
    case bvp::ConstraintKind::integral:
      return (g.x.weights.transpose() * g.values).cwiseAbs().maxCoeff();
    case bvp::ConstraintKind::periodic:
      return (g.values.row(0) - g.values.row(g.values.rows() - 1)).cwiseAbs().maxCoeff();
    case bvp::ConstraintKind::jump: {
      // One-sided limits: nearest grid rows on either side of the jump.
      const auto xs = g.x.coordinates();
      const auto it = std::lower_bound(xs.begin(), xs.end(), c.point);
      if (it == xs.begin() || it == xs.end()) throw UsageError("jump point is not interior to the grid");
      const auto right = static_cast<Eigen::Index>(it - xs.begin()) + (std::abs(*it - c.point) < 1e-12 ? 1 : 0);
      const auto left = static_cast<Eigen::Index>(it - xs.begin()) - 1;
      if (right >= g.values.rows()) throw UsageError("jump point is not interior to the grid");
      return std::max(g.values.row(left).cwiseAbs().maxCoeff(), g.values.row(right).cwiseAbs().maxCoeff());
    }
  }
  throw UsageError("unsupported constraint");
}

double constraint_residual(const Grid& grid, const Vector& u, const bvp::Constraint& c) {
  if (static_cast<std::size_t>(u.size()) != grid.size()) throw UsageError("constraint_residual: size mismatch");
  switch (c.kind) {
    case bvp::ConstraintKind::dirichlet:
      return std::abs(value_at(grid, u, c.point) - c.value);
    case bvp::ConstraintKind::integral:
      return std::abs(grid.weights.dot(u) - c.value);
    case bvp::ConstraintKind::periodic:
      return std::abs(u(0) - u(u.size() - 1));
    case bvp::ConstraintKind::jump: {
      const auto xs = grid.coordinates();
      const auto it = std::lower_bound(xs.begin(), xs.end(), c.point);
      if (it == xs.begin() || it == xs.end()) throw UsageError("jump point is not interior to the grid");
      const auto i = static_cast<Eigen::Index>(it - xs.begin());
      const auto right = i + (std::abs(*it - c.point) < 1e-12 ? 1 : 0);
      if (right >= u.size()) throw UsageError("jump point is not interior to the grid");
      return std::max(std::abs(u(i - 1) - c.left_value), std::abs(u(right) - c.right_value));
    }
  }
  throw UsageError("unsupported constraint");
}

EigenPairs integral_operator_eig(const KernelGrid& grid, std::size_t k) {
  if (!grid.square()) throw UsageError("integral_operator_eig: grid is not square");
  const Vector s = grid.x.weights.cwiseSqrt();
  const Matrix a = s.asDiagonal() * grid.values * s.asDiagonal();
  const auto eig = linalg::sym_eig(a);
  const auto kk = static_cast<Eigen::Index>(std::min<std::size_t>(k, static_cast<std::size_t>(eig.values.size())));
  EigenPairs out;
  out.values = eig.values.head(kk);
  out.functions = s.cwiseInverse().asDiagonal() * eig.vectors.leftCols(kk);
  fix_signs(out.functions);
  return out;
}

SingularTriples integral_operator_svd(const KernelGrid& grid, std::size_t k) {
  const Vector sx = grid.x.weights.cwiseSqrt();
  const Vector sy = grid.y.weights.cwiseSqrt();
  const auto svd = linalg::svd(sx.asDiagonal() * grid.values * sy.asDiagonal());
  const auto kk = static_cast<Eigen::Index>(std::min<std::size_t>(k, static_cast<std::size_t>(svd.sigma.size())));
  SingularTriples out;
  out.values = svd.sigma.head(kk);
  out.left = sx.cwiseInverse().asDiagonal() * svd.u.leftCols(kk);
  out.right = sy.cwiseInverse().asDiagonal() * svd.v.leftCols(kk);
  // Flip pairs together so the product stays unchanged.
  for (Eigen::Index c = 0; c < kk; ++c) {
    const double scale = out.left.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < out.left.rows(); ++r)
      if (std::abs(out.left(r, c)) > 1e-8 * scale) {
        if (out.left(r, c) < 0.0) {
          out.left.col(c) *= -1.0;
          out.right.col(c) *= -1.0;
        }
        break;
      }
  }
  return out;
}

ComplexBatch network_function(const nn::Mlp& net) {
  if (net.activation() != nn::Activation::rational)
    throw UsageError("complex evaluation needs rational activations");
  if (net.input_dim() != 1) throw UsageError("complex evaluation needs a network with one input");
  return [&net](std::span<const cplx> z, std::vector<bool>& failed) {
    auto out = net.forward_complex(z);
    failed.assign(z.size(), false);
    for (std::size_t i = 0; i < out.size(); ++i)
      failed[i] = !std::isfinite(out[i].real()) || !std::isfinite(out[i].imag());
    return out;
  };
}

ComplexBatch pointwise(std::function<cplx(cplx)> f) {
  return [f = std::move(f)](std::span<const cplx> z, std::vector<bool>& failed) {
    std::vector<cplx> out(z.size());
    failed.assign(z.size(), false);
    for (std::size_t i = 0; i < z.size(); ++i) {
      out[i] = f(z[i]);
      failed[i] = !std::isfinite(out[i].real()) || !std::isfinite(out[i].imag());
    }
    return out;
  };
}

PhasePortrait phase_portrait(const ComplexBatch& f, const Window& w, std::size_t resolution) {
  if (resolution < 2) throw UsageError("phase_portrait: resolution must be at least 2");
  if (!(w.re_max > w.re_min && w.im_max > w.im_min)) throw UsageError("phase_portrait: empty window");
  PhasePortrait p;
  p.window = w;
  p.resolution = resolution;
  const auto n = static_cast<Eigen::Index>(resolution);
  p.argument.resize(n, n);
  const auto re = linalg::linspace(w.re_min, w.re_max, resolution);
  const auto im = linalg::linspace(w.im_min, w.im_max, resolution);
  std::vector<cplx> z(resolution);
  std::vector<bool> failed;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < resolution; ++k) z[k] = {re[k], im[static_cast<std::size_t>(r)]};
    const auto v = f(z, failed);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (failed[kk]) {
        p.argument(r, k) = std::numeric_limits<double>::quiet_NaN();
        ++p.failed;
      } else {
        p.argument(r, k) = std::arg(v[kk]);
      }
    }
  }
  return p;
}

PhasePortrait phase_portrait(const nn::Mlp& net, const Window& w, std::size_t resolution) {
  return phase_portrait(network_function(net), w, resolution);
}

PoleReport detect_poles(const ComplexBatch& f, const Window& w, std::size_t resolution) {
  const PhasePortrait p = phase_portrait(f, w, resolution);
  PoleReport report;
  const double hx = (w.re_max - w.re_min) / static_cast<double>(resolution - 1);
  const double hy = (w.im_max - w.im_min) / static_cast<double>(resolution - 1);
  const auto n = static_cast<Eigen::Index>(resolution);
  for (Eigen::Index r = 0; r + 1 < n; ++r)
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      const double a[4] = {p.argument(r, k), p.argument(r, k + 1), p.argument(r + 1, k + 1), p.argument(r + 1, k)};
      if (std::any_of(std::begin(a), std::end(a), [](double v) { return std::isnan(v); })) {
        report.saturated = true;
        continue;
      }
      // Cheap screen on the corners; cells whose phase turns quickly get an
      // accurate boundary winding.
      double steepest = 0.0;
      for (int i = 0; i < 4; ++i) steepest = std::max(steepest, std::abs(wrap(a[(i + 1) % 4] - a[i])));
      if (winding(a) == 0 && steepest < 0.5 * kPi) continue;
      Cell cell{w.re_min + static_cast<double>(k) * hx, w.im_min + static_cast<double>(r) * hy, hx, hy};
      const auto accurate = cell_winding(f, cell, report.saturated);
      if (!accurate || *accurate >= 0) continue;
      const int wnd = *accurate;
      for (int pass = 0; pass < 2; ++pass) {
        const auto next = bisect(f, cell, wnd, report.overlapping, report.saturated);
        if (!next) break;
        cell = *next;
      }
      report.poles.push_back({{cell.re0 + 0.5 * cell.hx, cell.im0 + 0.5 * cell.hy}, -wnd, cell.hx});
    }
  return report;
}

PoleReport detect_poles(const nn::Mlp& net, const Window& w, std::size_t resolution) {
  return detect_poles(network_function(net), w, resolution);
}

std::string FeatureReport::to_text() const {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  out << "operator = " << operator_id << "\n";
  if (relative_error) out << "relative_error_percent = " << num(*relative_error) << "\n";
  out << "symmetry_score = " << num(symmetry) << "\n";
  for (const auto& [name, value] : constraint_residuals) out << "constraint." << name << " = " << num(value) << "\n";
  auto list = [&](const char* key, const Vector& v) {
    out << key << " =";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : " ") << num(v(i));
    out << "\n";
  };
  list("eigenvalues", eigenvalues);
  list("singular_values", singular_values);
  out << "pole_count = " << poles.poles.size() << "\n";
  for (const auto& p : poles.poles)
    out << "pole = " << num(p.location.real()) << ", " << num(p.location.imag()) << ", " << p.multiplicity << "\n";
  out << "poles_overlapping = " << (poles.overlapping ? "true" : "false") << "\n";
  out << "poles_saturated = " << (poles.saturated ? "true" : "false") << "\n";
  for (const auto& n : notes) out << "note = " << n << "\n";
  return out.str();
}

}  // namespace greenlearn::features
