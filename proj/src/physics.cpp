#include "greenlearn/bvp.hpp"

#include "greenlearn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace greenlearn::bvp {

using linalg::Matrix;

// ---------------------------------------------------------------------------
// Crank-Nicolson

ComplexVector crank_nicolson_step(std::span<const double> potential, double h, double dt,
                                  std::span<const std::complex<double>> psi) {
  const std::size_t m = psi.size();
  if (potential.size() != m) throw UsageError("crank_nicolson_step: potential and state sizes differ");
  if (!(h > 0.0) || !(dt > 0.0)) throw UsageError("crank_nicolson_step: h and dt must be positive");
  if (m == 0) return {};
  using C = std::complex<double>;
  const C half_i_dt(0.0, 0.5 * dt);
  const double off = -0.5 / (h * h);  // H off-diagonal
  // rhs = (I - i dt/2 H) psi
  ComplexVector rhs(m);
  for (std::size_t k = 0; k < m; ++k) {
    C hpsi = (1.0 / (h * h) + potential[k]) * psi[k];
    if (k > 0) hpsi += off * psi[k - 1];
    if (k + 1 < m) hpsi += off * psi[k + 1];
    rhs[k] = psi[k] - half_i_dt * hpsi;
  }
  // (I + i dt/2 H) is diagonally dominant, so Thomas elimination is stable.
  const C sub = half_i_dt * off;
  ComplexVector cprime(m);
  ComplexVector out(m);
  C diag = 1.0 + half_i_dt * (1.0 / (h * h) + potential[0]);
  if (std::abs(diag) == 0.0) throw NumericError("crank_nicolson_step: singular step matrix");
  cprime[0] = sub / diag;
  out[0] = rhs[0] / diag;
  for (std::size_t k = 1; k < m; ++k) {
    diag = 1.0 + half_i_dt * (1.0 / (h * h) + potential[k]) - sub * cprime[k - 1];
    if (std::abs(diag) == 0.0) throw NumericError("crank_nicolson_step: singular step matrix");
    cprime[k] = sub / diag;
    out[k] = (rhs[k] - sub * out[k - 1]) / diag;
  }
  for (std::size_t k = m - 1; k-- > 0;) out[k] -= cprime[k] * out[k + 1];
  return out;
}

double discrete_l2_norm(std::span<const std::complex<double>> psi, double h) {
  double s = 0.0;
  for (const auto& z : psi) s += std::norm(z);
  return std::sqrt(h * s);
}

// ---------------------------------------------------------------------------
// Poisson on the unit disk

double PolarGrid::dtheta() const { return 2.0 * std::numbers::pi / angular_points; }

Matrix PolarGrid::nodes() const {
  Matrix out(static_cast<Eigen::Index>(unknowns()), 2);
  out.row(0).setZero();
  Eigen::Index row = 1;
  for (int i = 1; i < radial_intervals; ++i) {
    const double r = i * dr();
    for (int j = 0; j < angular_points; ++j, ++row) {
      const double t = j * dtheta();
      out(row, 0) = r * std::cos(t);
      out(row, 1) = r * std::sin(t);
    }
  }
  return out;
}

namespace {

// Solve a tridiagonal system in place (sub[0] and sup[n-1] unused).
void thomas(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t k = 1; k < n; ++k) {
    const double m = sub[k] / diag[k - 1];
    diag[k] -= m * sup[k - 1];
    rhs[k] -= m * rhs[k - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) rhs[k] = (rhs[k] - sup[k] * rhs[k + 1]) / diag[k];
}

double lagrange_weight(const double* xs, int count, int which, double x) {
  double w = 1.0;
  for (int k = 0; k < count; ++k)
    if (k != which) w *= (x - xs[k]) / (xs[which] - xs[k]);
  return w;
}

}  // namespace

DiskSolution solve_poisson_disk(const PolarGrid& grid, std::span<const double> f) {
  const int nr = grid.radial_intervals;
  const int nt = grid.angular_points;
  if (nr < 4 || nt < 8) throw UsageError("solve_poisson_disk: polar grid too coarse");
  if (f.size() != grid.unknowns()) throw UsageError("solve_poisson_disk: forcing must be given at PolarGrid::nodes()");
  for (double v : f)
    if (!std::isfinite(v)) throw NumericError("solve_poisson_disk: non-finite forcing");
  const double dr = grid.dr();
  const double dt = grid.dtheta();
  const int rings = nr - 1;
  auto at = [&](int ring, int j) { return f[1 + static_cast<std::size_t>(ring - 1) * nt + static_cast<std::size_t>(j)]; };

  // Forward DFT along each ring: fc + i fs with fc = sum f cos, fs = -sum f sin.
  std::vector<double> cs(static_cast<std::size_t>(nt)), sn(static_cast<std::size_t>(nt));
  for (int k = 0; k < nt; ++k) {
    cs[static_cast<std::size_t>(k)] = std::cos(dt * k);
    sn[static_cast<std::size_t>(k)] = std::sin(dt * k);
  }
  const int modes = nt / 2 + 1;
  // hat[m][ring-1] real and imaginary parts
  std::vector<std::vector<double>> re(static_cast<std::size_t>(modes), std::vector<double>(static_cast<std::size_t>(rings)));
  std::vector<std::vector<double>> im = re;
  for (int m = 0; m < modes; ++m) {
    for (int i = 1; i <= rings; ++i) {
      double sr = 0.0;
      double si = 0.0;
      for (int j = 0; j < nt; ++j) {
        const auto idx = static_cast<std::size_t>((static_cast<long>(m) * j) % nt);
        sr += at(i, j) * cs[idx];
        si -= at(i, j) * sn[idx];
      }
      re[static_cast<std::size_t>(m)][static_cast<std::size_t>(i - 1)] = sr;
      im[static_cast<std::size_t>(m)][static_cast<std::size_t>(i - 1)] = si;
    }
  }

  double centre = 0.0;
  for (int m = 0; m < modes; ++m) {
    const double lambda = -4.0 / (dt * dt) * std::pow(std::sin(std::numbers::pi * m / nt), 2);
    if (m == 0) {
      // Unknowns: centre value followed by ring means.
      const std::size_t n = static_cast<std::size_t>(rings) + 1;
      std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
      diag[0] = -4.0 / (dr * dr);
      sup[0] = 4.0 / (dr * dr);
      rhs[0] = f[0];
      for (int i = 1; i <= rings; ++i) {
        const double r = i * dr;
        const double rp = (i + 0.5) * dr;
        const double rm = (i - 0.5) * dr;
        const auto k = static_cast<std::size_t>(i);
        sub[k] = rm / (r * dr * dr);
        diag[k] = -(rp + rm) / (r * dr * dr);
        sup[k] = (i < rings) ? rp / (r * dr * dr) : 0.0;
        rhs[k] = re[0][k - 1] / nt;
      }
      thomas(sub, diag, sup, rhs);
      centre = rhs[0];
      for (int i = 1; i <= rings; ++i) {
        re[0][static_cast<std::size_t>(i - 1)] = rhs[static_cast<std::size_t>(i)] * nt;
        im[0][static_cast<std::size_t>(i - 1)] = 0.0;
      }
      continue;
    }
    const auto n = static_cast<std::size_t>(rings);
    std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0);
    for (int i = 1; i <= rings; ++i) {
      const double r = i * dr;
      const double rp = (i + 0.5) * dr;
      const double rm = (i - 0.5) * dr;
      const auto k = static_cast<std::size_t>(i - 1);
      sub[k] = (i > 1) ? rm / (r * dr * dr) : 0.0;
      diag[k] = -(rp + rm) / (r * dr * dr) + lambda / (r * r);
      sup[k] = (i < rings) ? rp / (r * dr * dr) : 0.0;
    }
    thomas(sub, diag, sup, re[static_cast<std::size_t>(m)]);
    thomas(sub, diag, sup, im[static_cast<std::size_t>(m)]);
  }

  DiskSolution sol;
  sol.grid = grid;
  sol.values.assign(grid.unknowns(), 0.0);
  sol.values[0] = centre;
  // Inverse real DFT.
  for (int i = 1; i <= rings; ++i) {
    for (int j = 0; j < nt; ++j) {
      double s = 0.0;
      for (int m = 0; m < modes; ++m) {
        const auto idx = static_cast<std::size_t>((static_cast<long>(m) * j) % nt);
        const double term = re[static_cast<std::size_t>(m)][static_cast<std::size_t>(i - 1)] * cs[idx] -
                            im[static_cast<std::size_t>(m)][static_cast<std::size_t>(i - 1)] * sn[idx];
        const bool self_conjugate = (m == 0) || (nt % 2 == 0 && m == nt / 2);
        s += self_conjugate ? term : 2.0 * term;
      }
      sol.values[1 + static_cast<std::size_t>(i - 1) * nt + static_cast<std::size_t>(j)] = s / nt;
    }
  }
  return sol;
}

double DiskSolution::operator()(double x, double y) const {
  const int nr = grid.radial_intervals;
  const int nt = grid.angular_points;
  const double r = std::hypot(x, y);
  if (r > 1.0 + 1e-12) throw UsageError("DiskSolution: point outside the unit disk");
  const double theta = std::atan2(y, x);
  const double dt = grid.dtheta();

  // Value on ring index i (may be negative: reflect through the centre).
  auto ring_value = [&](int i) {
    double angle = theta;
    if (i < 0) {
      i = -i;
      angle += std::numbers::pi;
    }
    if (i == 0) return values[0];
    if (i >= nr) return 0.0;
    double s = angle / dt;
    s -= std::floor(s / nt) * nt;
    const int j0 = static_cast<int>(std::floor(s));
    const double xs[4] = {-1.0, 0.0, 1.0, 2.0};
    const double t = s - j0;
    double v = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int j = ((j0 + k - 1) % nt + nt) % nt;
      v += lagrange_weight(xs, 4, k, t) * values[1 + static_cast<std::size_t>(i - 1) * nt + static_cast<std::size_t>(j)];
    }
    return v;
  };

  const double s = r / grid.dr();
  int i0 = static_cast<int>(std::floor(s)) - 1;
  i0 = std::min(i0, nr - 3);  // keep the stencil inside the closed disk
  double xs[4];
  for (int k = 0; k < 4; ++k) xs[k] = i0 + k;
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += lagrange_weight(xs, 4, k, s) * ring_value(i0 + k);
  return v;
}

// ---------------------------------------------------------------------------
// Closed-form kernels

namespace {

const char* const kExactIds[] = {"helmholtz_K15", "helmholtz_periodic", "laplace", "advection_diffusion", "poisson_disk"};

}  // namespace

bool has_exact_green(const std::string& id) {
  return std::find(std::begin(kExactIds), std::end(kExactIds), id) != std::end(kExactIds);
}

ExactGreen exact_green(const std::string& id) {
  ExactGreen g;
  g.id = id;
  const auto zero = [](double) { return 0.0; };
  if (id == "helmholtz_K15") {
    const double k = 15.0;
    g.green = [k](double x, double y) {
      if (x > y) std::swap(x, y);
      return std::sin(k * x) * std::sin(k * (y - 1.0)) / (k * std::sin(k));
    };
    g.homogeneous = zero;
  } else if (id == "helmholtz_periodic") {
    const double k = 15.0;
    g.green = [k](double x, double y) {
      return std::cos(k * (std::abs(x - y) - 0.5)) / (2.0 * k * std::sin(0.5 * k));
    };
    g.homogeneous = zero;
  } else if (id == "laplace") {
    g.green = [](double x, double y) {
      if (x > y) std::swap(x, y);
      return x * (1.0 - y);
    };
    g.homogeneous = zero;
  } else if (id == "advection_diffusion") {
    g.green = [](double x, double y) {
      const double e = std::exp(-2.0 * (x - y));
      return x <= y ? 4.0 * x * (y - 1.0) * e : 4.0 * y * (x - 1.0) * e;
    };
    const double b = -2.0 * std::exp(2.0) - 1.0;
    g.homogeneous = [b](double x) { return (1.0 + b * x) * std::exp(-2.0 * x); };
  } else if (id == "poisson_disk") {
    g.dim = 2;
    g.a = -1.0;
    g.b = 1.0;
    g.green_disk = [](double x, double y, double xt, double yt) {
      const double num = (x - xt) * (x - xt) + (y - yt) * (y - yt);
      const double c = x * yt - xt * y;
      const double d = x * xt + y * yt - 1.0;
      return std::log(num / (c * c + d * d)) / (4.0 * std::numbers::pi);
    };
    g.homogeneous = zero;
  } else {
    throw UsageError("no closed-form kernel for '" + id + "'");
  }
  return g;
}

}  // namespace greenlearn::bvp
