#pragma once

#include "greenlearn/linalg.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace greenlearn::bvp {

using Function = std::function<double(double)>;

enum class ConstraintKind { dirichlet, periodic, integral, jump };

/// One side condition of a second-order problem. A periodic constraint
/// contributes two rows (value and slope); a jump splits the domain at `point`
/// and pins the one-sided limits.
struct Constraint {
  ConstraintKind kind = ConstraintKind::dirichlet;
  double point = 0.0;
  double value = 0.0;
  double left_value = 0.0;
  double right_value = 0.0;

  static Constraint dirichlet(double x, double value);
  static Constraint periodic();
  static Constraint integral(double target);
  static Constraint jump(double x, double left_value, double right_value);

  /// Rows taken from the outer boundary slots (a jump uses interface rows instead).
  int outer_rows() const;
};

std::string to_string(ConstraintKind kind);

/// L u = a2 u'' + a1 u' + a0 u + epsilon * cubic(x) * u^3 on [a, b].
/// Coefficients may be discontinuous at `breakpoints`, where u and u' are kept
/// continuous; jump constraints add their own breakpoint.
struct OperatorSpec {
  double a = 0.0;
  double b = 1.0;
  Function a2;
  Function a1;
  Function a0;
  double epsilon = 0.0;
  Function cubic;  // defaults to 1 when epsilon > 0 and unset
  std::vector<double> breakpoints;
  std::vector<Constraint> constraints;

  /// -(p u')' + q (u + epsilon u^3), expanded as -p u'' - p' u' + q u.
  static OperatorSpec sturm_liouville(double a, double b, Function p, Function dp, Function q, double epsilon,
                                      std::vector<Constraint> constraints);

  /// Interfaces in increasing order, each flagged as a jump or a continuity joint.
  std::vector<std::pair<double, const Constraint*>> interfaces() const;
  void validate() const;
};

/// Chebyshev-Lobatto interpolant of one subinterval.
struct Piece {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> nodes;   // ascending, includes both ends
  std::vector<double> values;
  std::vector<double> bary;    // barycentric weights

  double eval(double x) const;
};

/// Piecewise spectral interpolant; at a breakpoint the right-hand piece wins.
class Solution {
 public:
  Solution() = default;
  explicit Solution(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {}

  double operator()(double x) const;
  std::vector<double> operator()(std::span<const double> xs) const;
  const std::vector<Piece>& pieces() const { return pieces_; }
  /// All nodes of all pieces, concatenated (interfaces appear twice).
  std::vector<double> nodes() const;
  std::vector<double> values() const;
  double integral() const;

 private:
  std::vector<Piece> pieces_;
};

struct SolveResult {
  Solution solution;
  double residual = 0.0;             // max |L u - f| over interior collocation nodes
  double constraint_residual = 0.0;  // max violation of the constraint rows
  int newton_iterations = 0;
};

struct SolverOptions {
  int nodes_per_piece = 512;
};

/// Chebyshev collocation matrices of one piece, exposed for tests.
struct ChebyshevPiece {
  std::vector<double> nodes;
  linalg::Matrix d1;
  linalg::Matrix d2;
  std::vector<double> quadrature;  // Clenshaw-Curtis weights
};
ChebyshevPiece chebyshev_piece(double a, double b, int n_points);

/// Linear solver for one operator, factored once and reused across forcings.
class LinearBvpSolver {
 public:
  explicit LinearBvpSolver(const OperatorSpec& op, const SolverOptions& options = {});
  ~LinearBvpSolver();
  LinearBvpSolver(LinearBvpSolver&&) noexcept;
  LinearBvpSolver& operator=(LinearBvpSolver&&) noexcept;

  /// Collocation nodes where the forcing is sampled (per piece, concatenated).
  const std::vector<double>& nodes() const;
  SolveResult solve(const Function& f) const;
  /// Forcing given at nodes(); columns of `forcing` are independent right-hand sides.
  std::vector<SolveResult> solve_many(const linalg::Matrix& forcing) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveResult solve_linear_bvp(const OperatorSpec& op, const Function& f, const SolverOptions& options = {});
SolveResult solve_homogeneous(const OperatorSpec& op, const SolverOptions& options = {});

struct NewtonOptions {
  double tolerance = 1e-8;
  int max_iterations = 50;
};

/// Newton iteration on L u + epsilon c u^3 - f from the epsilon = 0 solution.
SolveResult solve_nonlinear_bvp(const OperatorSpec& op, const Function& f, const SolverOptions& options = {},
                                const NewtonOptions& newton = {});
/// Forcing given at the solver nodes (see LinearBvpSolver::nodes for the layout).
std::vector<SolveResult> solve_nonlinear_many(const OperatorSpec& op, const linalg::Matrix& forcing,
                                              const SolverOptions& options = {}, const NewtonOptions& newton = {});
std::vector<double> collocation_nodes(const OperatorSpec& op, const SolverOptions& options = {});

/// Coupled system sum_k (A2_ik u_k'' + A1_ik u_k' + A0_ik u_k) = f_i on a common interval.
struct SystemOperatorSpec {
  double a = -1.0;
  double b = 1.0;
  int components = 2;
  // Row-major components x components blocks; empty functions mean zero.
  std::vector<Function> a2;
  std::vector<Function> a1;
  std::vector<Function> a0;
  // Two Dirichlet constraints per component.
  std::vector<std::vector<Constraint>> constraints;

  Function& block(std::vector<Function>& which, int i, int k) { return which[static_cast<std::size_t>(i * components + k)]; }
  void validate() const;
};

class SystemBvpSolver {
 public:
  explicit SystemBvpSolver(const SystemOperatorSpec& op, const SolverOptions& options = {});
  ~SystemBvpSolver();
  SystemBvpSolver(SystemBvpSolver&&) noexcept;
  SystemBvpSolver& operator=(SystemBvpSolver&&) noexcept;

  const std::vector<double>& nodes() const;
  /// One forcing matrix per component, each nodes x samples; result[sample][component].
  std::vector<std::vector<SolveResult>> solve_many(const std::vector<linalg::Matrix>& forcing) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<SolveResult> solve_system_bvp(const SystemOperatorSpec& op, const std::vector<Function>& f,
                                          const SolverOptions& options = {});

// Time-dependent Schroedinger equation i psi_t = H psi with H = -1/2 d^2/dx^2 + V.

using ComplexVector = std::vector<std::complex<double>>;

/// One Crank-Nicolson step (I + i dt/2 H) psi_next = (I - i dt/2 H) psi on the
/// interior nodes of a uniform grid with spacing h and homogeneous Dirichlet ends.
/// `potential` holds V at the same interior nodes.
ComplexVector crank_nicolson_step(std::span<const double> potential, double h, double dt,
                                  std::span<const std::complex<double>> psi);

double discrete_l2_norm(std::span<const std::complex<double>> psi, double h);

// Poisson equation laplacian(u) = f on the unit disk with u = 0 on the circle.

/// Polar grid: r_i = i / radial_intervals (i = 0 is the centre, the last ring
/// is the boundary), theta_j = 2 pi j / angular_points.
struct PolarGrid {
  int radial_intervals = 56;
  int angular_points = 128;

  double dr() const { return 1.0 / radial_intervals; }
  double dtheta() const;
  /// Cartesian coordinates of all unknown nodes: centre first, then rings
  /// 1..radial_intervals-1 with angle varying fastest.
  linalg::Matrix nodes() const;
  std::size_t unknowns() const {
    return 1 + static_cast<std::size_t>(radial_intervals - 1) * static_cast<std::size_t>(angular_points);
  }
};

struct DiskSolution {
  PolarGrid grid;
  std::vector<double> values;  // ordered like PolarGrid::nodes()

  /// Cubic interpolation in angle on the enclosing rings, cubic in radius.
  double operator()(double x, double y) const;
};

/// Second-order finite differences in polar coordinates; angular modes are
/// decoupled by a discrete Fourier transform and each radial system is
/// tridiagonal. `f` is given at PolarGrid::nodes().
DiskSolution solve_poisson_disk(const PolarGrid& grid, std::span<const double> f);

// Closed-form kernels of the catalog problems.

struct ExactGreen {
  std::string id;
  int dim = 1;
  double a = 0.0;
  double b = 1.0;
  /// 1-D kernels: green(x, y); disk kernel: use green_disk.
  std::function<double(double, double)> green;
  std::function<double(double, double, double, double)> green_disk;
  /// Homogeneous solution; zero function when the constraints are homogeneous.
  Function homogeneous;
};

/// Known ids: helmholtz_K15, helmholtz_periodic, laplace, advection_diffusion, poisson_disk.
ExactGreen exact_green(const std::string& id);
bool has_exact_green(const std::string& id);

}  // namespace greenlearn::bvp
