#include "greenlearn/bvp.hpp"

#include "greenlearn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace greenlearn::bvp {

using linalg::Matrix;
using linalg::Vector;

Constraint Constraint::dirichlet(double x, double value) {
  Constraint c;
  c.kind = ConstraintKind::dirichlet;
  c.point = x;
  c.value = value;
  return c;
}

Constraint Constraint::periodic() {
  Constraint c;
  c.kind = ConstraintKind::periodic;
  return c;
}

Constraint Constraint::integral(double target) {
  Constraint c;
  c.kind = ConstraintKind::integral;
  c.value = target;
  return c;
}

Constraint Constraint::jump(double x, double left_value, double right_value) {
  Constraint c;
  c.kind = ConstraintKind::jump;
  c.point = x;
  c.left_value = left_value;
  c.right_value = right_value;
  return c;
}

int Constraint::outer_rows() const {
  switch (kind) {
    case ConstraintKind::dirichlet: return 1;
    case ConstraintKind::periodic: return 2;
    case ConstraintKind::integral: return 1;
    case ConstraintKind::jump: return 0;
  }
  return 0;
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::dirichlet: return "dirichlet";
    case ConstraintKind::periodic: return "periodic";
    case ConstraintKind::integral: return "integral";
    case ConstraintKind::jump: return "jump";
  }
  return "unknown";
}

OperatorSpec OperatorSpec::sturm_liouville(double a, double b, Function p, Function dp, Function q, double epsilon,
                                           std::vector<Constraint> constraints) {
  OperatorSpec op;
  op.a = a;
  op.b = b;
  op.a2 = [p](double x) { return -p(x); };
  op.a1 = [dp](double x) { return -dp(x); };
  op.a0 = q;
  op.epsilon = epsilon;
  op.cubic = q;
  op.constraints = std::move(constraints);
  return op;
}

std::vector<std::pair<double, const Constraint*>> OperatorSpec::interfaces() const {
  std::vector<std::pair<double, const Constraint*>> out;
  for (double x : breakpoints) out.emplace_back(x, nullptr);
  for (const auto& c : constraints)
    if (c.kind == ConstraintKind::jump) out.emplace_back(c.point, &c);
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  return out;
}

void OperatorSpec::validate() const {
  if (!(b > a)) throw UsageError("operator domain must satisfy a < b");
  if (!a2) throw UsageError("operator needs a second-order coefficient");
  int rows = 0;
  for (const auto& c : constraints) {
    rows += c.outer_rows();
    if (c.kind == ConstraintKind::dirichlet && c.point != a && c.point != b)
      throw UsageError("Dirichlet constraints must sit at a domain end");
    if (c.kind == ConstraintKind::jump && !(c.point > a && c.point < b))
      throw UsageError("jump point must be interior");
  }
  if (rows != 2) {
    throw UsageError("a second-order problem needs exactly two boundary rows, got " + std::to_string(rows));
  }
  const auto ifaces = interfaces();
  for (std::size_t i = 0; i < ifaces.size(); ++i) {
    if (!(ifaces[i].first > a && ifaces[i].first < b)) throw UsageError("breakpoint outside the domain");
    if (i > 0 && !(ifaces[i].first > ifaces[i - 1].first)) throw UsageError("duplicate breakpoint");
  }
}

// ---------------------------------------------------------------------------
// Chebyshev machinery

ChebyshevPiece chebyshev_piece(double a, double b, int n_points) {
  if (n_points < 3) throw UsageError("chebyshev_piece: need at least 3 points");
  const int n = n_points - 1;
  const double pi = std::numbers::pi;
  ChebyshevPiece cp;
  cp.nodes.resize(static_cast<std::size_t>(n_points));
  // Ascending nodes t_k = -cos(pi k / n); derivative matrix of the descending
  // family negated.
  std::vector<double> x(static_cast<std::size_t>(n_points));
  for (int k = 0; k <= n; ++k) {
    x[static_cast<std::size_t>(k)] = std::cos(pi * k / n);
    // sin form keeps symmetric nodes exactly symmetric
    const double t = std::sin(pi * (n - 2.0 * k) / (2.0 * n));
    cp.nodes[static_cast<std::size_t>(k)] = 0.5 * (a + b) - 0.5 * (b - a) * t;
  }
  cp.nodes.front() = a;
  cp.nodes.back() = b;

  Matrix d = Matrix::Zero(n_points, n_points);
  for (int i = 0; i <= n; ++i) {
    const double ci = (i == 0 || i == n) ? 2.0 : 1.0;
    double row_sum = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      const double cj = (j == 0 || j == n) ? 2.0 : 1.0;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      // x_i - x_j via the product form
      const double diff = -2.0 * std::sin(pi * (i + j) / (2.0 * n)) * std::sin(pi * (i - j) / (2.0 * n));
      const double v = (ci / cj) * sign / diff;
      d(i, j) = v;
      row_sum += v;
    }
    d(i, i) = -row_sum;
  }
  const double scale = -2.0 / (b - a);
  cp.d1 = scale * d;
  cp.d2 = cp.d1 * cp.d1;

  cp.quadrature.assign(static_cast<std::size_t>(n_points), 0.0);
  std::vector<double> v(static_cast<std::size_t>(n > 1 ? n - 1 : 0), 1.0);
  if (n % 2 == 0) {
    cp.quadrature.front() = cp.quadrature.back() = 1.0 / (static_cast<double>(n) * n - 1.0);
    for (int k = 1; k <= n / 2 - 1; ++k)
      for (int i = 1; i < n; ++i) v[static_cast<std::size_t>(i - 1)] -= 2.0 * std::cos(2.0 * k * pi * i / n) / (4.0 * k * k - 1.0);
    for (int i = 1; i < n; ++i) v[static_cast<std::size_t>(i - 1)] -= std::cos(n * pi * i / n) / (static_cast<double>(n) * n - 1.0);
  } else {
    cp.quadrature.front() = cp.quadrature.back() = 1.0 / (static_cast<double>(n) * n);
    for (int k = 1; k <= (n - 1) / 2; ++k)
      for (int i = 1; i < n; ++i) v[static_cast<std::size_t>(i - 1)] -= 2.0 * std::cos(2.0 * k * pi * i / n) / (4.0 * k * k - 1.0);
  }
  for (int i = 1; i < n; ++i) cp.quadrature[static_cast<std::size_t>(i)] = 2.0 * v[static_cast<std::size_t>(i - 1)] / n;
  for (auto& w : cp.quadrature) w *= 0.5 * (b - a);
  return cp;
}

double Piece::eval(double x) const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double diff = x - nodes[k];
    if (diff == 0.0) return values[k];
    const double t = bary[k] / diff;
    num += t * values[k];
    den += t;
  }
  return num / den;
}

namespace {

Piece make_piece(const ChebyshevPiece& cp, double a, double b, const double* values) {
  Piece p;
  p.a = a;
  p.b = b;
  p.nodes = cp.nodes;
  p.values.assign(values, values + cp.nodes.size());
  const std::size_t n = cp.nodes.size();
  p.bary.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    p.bary[k] = (k % 2 == 0) ? 1.0 : -1.0;
    if (k == 0 || k == n - 1) p.bary[k] *= 0.5;
  }
  return p;
}

double coefficient(const Function& f, double x) { return f ? f(x) : 0.0; }

// Residual b - A x accumulated in extended precision.
Vector residual_extended(const Matrix& a, const Vector& x, const Vector& b) {
  Vector r(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    long double acc = b(i);
    for (Eigen::Index j = 0; j < a.cols(); ++j) acc -= static_cast<long double>(a(i, j)) * x(j);
    r(i) = static_cast<double>(acc);
  }
  return r;
}

// LU solve followed by iterative refinement with extended-precision residuals.
Matrix refined_solve(const Eigen::PartialPivLU<Matrix>& lu, const Matrix& a, const Matrix& rhs) {
  Matrix x = lu.solve(rhs);
  for (int pass = 0; pass < 2; ++pass) {
    Matrix r(rhs.rows(), rhs.cols());
    for (Eigen::Index c = 0; c < rhs.cols(); ++c) r.col(c) = residual_extended(a, x.col(c), rhs.col(c));
    x += lu.solve(r);
  }
  return x;
}

struct Layout {
  std::vector<double> bounds;  // piece endpoints
  std::vector<const Constraint*> jumps;  // per interface, null for continuity
  std::vector<ChebyshevPiece> pieces;
  int points = 0;

  Eigen::Index first(std::size_t p) const { return static_cast<Eigen::Index>(p) * points; }
  Eigen::Index last(std::size_t p) const { return first(p) + points - 1; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(pieces.size()) * points; }
};

Layout make_layout(const OperatorSpec& op, const SolverOptions& options) {
  op.validate();
  Layout layout;
  layout.points = options.nodes_per_piece;
  layout.bounds.push_back(op.a);
  for (const auto& [x, c] : op.interfaces()) {
    layout.bounds.push_back(x);
    layout.jumps.push_back(c);
  }
  layout.bounds.push_back(op.b);
  for (std::size_t p = 0; p + 1 < layout.bounds.size(); ++p)
    layout.pieces.push_back(chebyshev_piece(layout.bounds[p], layout.bounds[p + 1], layout.points));
  return layout;
}

// Linear collocation matrix (interior rows) plus constraint rows. Returns the
// constraint right-hand side in `constraint_rhs` (zero elsewhere) and marks
// interior rows in `interior`.
Matrix assemble(const OperatorSpec& op, const Layout& layout, Vector& constraint_rhs, std::vector<bool>& interior) {
  const Eigen::Index m = layout.size();
  Matrix a = Matrix::Zero(m, m);
  constraint_rhs = Vector::Zero(m);
  interior.assign(static_cast<std::size_t>(m), false);
  const int n = layout.points;
  for (std::size_t p = 0; p < layout.pieces.size(); ++p) {
    const auto& cp = layout.pieces[p];
    const Eigen::Index off = layout.first(p);
    for (int k = 1; k < n - 1; ++k) {
      const double x = cp.nodes[static_cast<std::size_t>(k)];
      const double c2 = coefficient(op.a2, x);
      const double c1 = coefficient(op.a1, x);
      const double c0 = coefficient(op.a0, x);
      a.block(off + k, off, 1, n) = c2 * cp.d2.row(k) + c1 * cp.d1.row(k);
      a(off + k, off + k) += c0;
      interior[static_cast<std::size_t>(off + k)] = true;
    }
  }
  // Interfaces.
  for (std::size_t p = 0; p + 1 < layout.pieces.size(); ++p) {
    const Eigen::Index left = layout.last(p);
    const Eigen::Index right = layout.first(p + 1);
    if (const Constraint* jump = layout.jumps[p]) {
      a(left, left) = 1.0;
      constraint_rhs(left) = jump->left_value;
      a(right, right) = 1.0;
      constraint_rhs(right) = jump->right_value;
    } else {
      a(left, left) = 1.0;
      a(left, right) = -1.0;
      a.block(right, layout.first(p), 1, n) = layout.pieces[p].d1.row(n - 1);
      a.block(right, layout.first(p + 1), 1, n) -= layout.pieces[p + 1].d1.row(0);
    }
  }
  // Outer slots: left end of the first piece, right end of the last piece.
  const Eigen::Index slot_a = 0;
  const Eigen::Index slot_b = layout.last(layout.pieces.size() - 1);
  bool used_a = false;
  bool used_b = false;
  const std::size_t last_piece = layout.pieces.size() - 1;
  for (const auto& c : op.constraints) {
    if (c.kind != ConstraintKind::dirichlet) continue;
    const bool at_a = c.point == op.a;
    const Eigen::Index row = at_a ? slot_a : slot_b;
    bool& used = at_a ? used_a : used_b;
    if (used) throw UsageError("two constraints compete for the same boundary row");
    used = true;
    a(row, row) = 1.0;
    constraint_rhs(row) = c.value;
  }
  auto take_slot = [&]() -> Eigen::Index {
    if (!used_a) {
      used_a = true;
      return slot_a;
    }
    if (!used_b) {
      used_b = true;
      return slot_b;
    }
    throw UsageError("too many constraints");
  };
  for (const auto& c : op.constraints) {
    if (c.kind == ConstraintKind::periodic) {
      const Eigen::Index r1 = take_slot();
      const Eigen::Index r2 = take_slot();
      a(r1, slot_a) += 1.0;
      a(r1, slot_b) -= 1.0;
      a.block(r2, 0, 1, n) += layout.pieces.front().d1.row(0);
      a.block(r2, layout.first(last_piece), 1, n) -= layout.pieces.back().d1.row(n - 1);
    } else if (c.kind == ConstraintKind::integral) {
      const Eigen::Index r = take_slot();
      for (std::size_t p = 0; p < layout.pieces.size(); ++p)
        for (int k = 0; k < n; ++k)
          a(r, layout.first(p) + k) += layout.pieces[p].quadrature[static_cast<std::size_t>(k)];
      constraint_rhs(r) = c.value;
    }
  }
  return a;
}

Solution make_solution(const Layout& layout, const Vector& u) {
  std::vector<Piece> pieces;
  for (std::size_t p = 0; p < layout.pieces.size(); ++p)
    pieces.push_back(make_piece(layout.pieces[p], layout.bounds[p], layout.bounds[p + 1], u.data() + layout.first(p)));
  return Solution(std::move(pieces));
}

void split_residual(const Vector& r, const std::vector<bool>& interior, double& interior_max, double& constraint_max) {
  interior_max = 0.0;
  constraint_max = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double v = std::abs(r(i));
    if (interior[static_cast<std::size_t>(i)])
      interior_max = std::max(interior_max, v);
    else
      constraint_max = std::max(constraint_max, v);
  }
}

}  // namespace

double Solution::operator()(double x) const {
  if (pieces_.empty()) throw UsageError("empty solution");
  for (std::size_t p = pieces_.size(); p-- > 0;) {
    if (x >= pieces_[p].a || p == 0) return pieces_[p].eval(x);
  }
  return pieces_.front().eval(x);
}

std::vector<double> Solution::operator()(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (*this)(xs[i]);
  return out;
}

std::vector<double> Solution::nodes() const {
  std::vector<double> out;
  for (const auto& p : pieces_) out.insert(out.end(), p.nodes.begin(), p.nodes.end());
  return out;
}

std::vector<double> Solution::values() const {
  std::vector<double> out;
  for (const auto& p : pieces_) out.insert(out.end(), p.values.begin(), p.values.end());
  return out;
}

double Solution::integral() const {
  double total = 0.0;
  for (const auto& p : pieces_) {
    const auto cp = chebyshev_piece(p.a, p.b, static_cast<int>(p.nodes.size()));
    for (std::size_t k = 0; k < p.values.size(); ++k) total += cp.quadrature[k] * p.values[k];
  }
  return total;
}

// ---------------------------------------------------------------------------
// Linear solver

struct LinearBvpSolver::Impl {
  OperatorSpec op;
  Layout layout;
  Matrix a;
  Vector constraint_rhs;
  std::vector<bool> interior;
  Eigen::PartialPivLU<Matrix> lu;
  std::vector<double> nodes;
};

LinearBvpSolver::LinearBvpSolver(const OperatorSpec& op, const SolverOptions& options) : impl_(std::make_unique<Impl>()) {
  impl_->op = op;
  impl_->layout = make_layout(op, options);
  impl_->a = assemble(op, impl_->layout, impl_->constraint_rhs, impl_->interior);
  impl_->lu.compute(impl_->a);
  const double rcond = impl_->lu.rcond();
  if (!(rcond > 1e-15 * std::numeric_limits<double>::epsilon())) {
    throw NumericError("solve_linear_bvp: collocation matrix is singular (ill-posed constraints?)");
  }
  for (const auto& cp : impl_->layout.pieces) impl_->nodes.insert(impl_->nodes.end(), cp.nodes.begin(), cp.nodes.end());
}

LinearBvpSolver::~LinearBvpSolver() = default;
LinearBvpSolver::LinearBvpSolver(LinearBvpSolver&&) noexcept = default;
LinearBvpSolver& LinearBvpSolver::operator=(LinearBvpSolver&&) noexcept = default;

const std::vector<double>& LinearBvpSolver::nodes() const { return impl_->nodes; }

std::vector<SolveResult> LinearBvpSolver::solve_many(const Matrix& forcing) const {
  const Eigen::Index m = impl_->layout.size();
  if (forcing.rows() != m) throw UsageError("solve_many: forcing must be sampled at nodes()");
  if (!forcing.allFinite()) throw NumericError("solve_many: non-finite forcing");
  Matrix rhs(m, forcing.cols());
  for (Eigen::Index c = 0; c < forcing.cols(); ++c)
    for (Eigen::Index i = 0; i < m; ++i)
      rhs(i, c) = impl_->interior[static_cast<std::size_t>(i)] ? forcing(i, c) : impl_->constraint_rhs(i);
  const Matrix u = refined_solve(impl_->lu, impl_->a, rhs);
  std::vector<SolveResult> out;
  out.reserve(static_cast<std::size_t>(forcing.cols()));
  for (Eigen::Index c = 0; c < forcing.cols(); ++c) {
    SolveResult r;
    r.solution = make_solution(impl_->layout, u.col(c));
    split_residual(residual_extended(impl_->a, u.col(c), rhs.col(c)), impl_->interior, r.residual,
                   r.constraint_residual);
    out.push_back(std::move(r));
  }
  return out;
}

SolveResult LinearBvpSolver::solve(const Function& f) const {
  Matrix rhs(static_cast<Eigen::Index>(impl_->nodes.size()), 1);
  for (std::size_t i = 0; i < impl_->nodes.size(); ++i) rhs(static_cast<Eigen::Index>(i), 0) = f ? f(impl_->nodes[i]) : 0.0;
  return std::move(solve_many(rhs).front());
}

SolveResult solve_linear_bvp(const OperatorSpec& op, const Function& f, const SolverOptions& options) {
  return LinearBvpSolver(op, options).solve(f);
}

SolveResult solve_homogeneous(const OperatorSpec& op, const SolverOptions& options) {
  if (op.epsilon > 0.0) return solve_nonlinear_bvp(op, [](double) { return 0.0; }, options);
  return solve_linear_bvp(op, [](double) { return 0.0; }, options);
}

std::vector<double> collocation_nodes(const OperatorSpec& op, const SolverOptions& options) {
  const auto layout = make_layout(op, options);
  std::vector<double> nodes;
  for (const auto& cp : layout.pieces) nodes.insert(nodes.end(), cp.nodes.begin(), cp.nodes.end());
  return nodes;
}

// ---------------------------------------------------------------------------
// Newton for the cubic perturbation

std::vector<SolveResult> solve_nonlinear_many(const OperatorSpec& op, const Matrix& forcing, const SolverOptions& options,
                                              const NewtonOptions& newton) {
  const auto layout = make_layout(op, options);
  Vector constraint_rhs;
  std::vector<bool> interior;
  const Matrix a = assemble(op, layout, constraint_rhs, interior);
  const Eigen::Index m = layout.size();
  if (forcing.rows() != m) throw UsageError("solve_nonlinear_many: forcing must be sampled at the collocation nodes");

  std::vector<double> nodes;
  for (const auto& cp : layout.pieces) nodes.insert(nodes.end(), cp.nodes.begin(), cp.nodes.end());
  Vector cubic(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = nodes[static_cast<std::size_t>(i)];
    cubic(i) = interior[static_cast<std::size_t>(i)] ? op.epsilon * (op.cubic ? op.cubic(x) : 1.0) : 0.0;
  }

  Eigen::PartialPivLU<Matrix> lu(a);
  std::vector<SolveResult> out;
  for (Eigen::Index c = 0; c < forcing.cols(); ++c) {
    Vector rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) rhs(i) = interior[static_cast<std::size_t>(i)] ? forcing(i, c) : constraint_rhs(i);
    Vector u = refined_solve(lu, a, rhs);
    auto residual_of = [&](const Vector& v) {
      // f - (A v + eps c v^3), extended precision
      Vector r = residual_extended(a, v, rhs);
      r.array() -= cubic.array() * v.array().cube();
      return r;
    };
    Vector r = residual_of(u);
    int iterations = 0;
    double norm = r.lpNorm<Eigen::Infinity>();
    while (op.epsilon > 0.0 && norm > newton.tolerance) {
      if (iterations >= newton.max_iterations) {
        std::ostringstream msg;
        msg << "solve_nonlinear_bvp: Newton did not converge in " << newton.max_iterations
            << " iterations (last residual " << norm << ")";
        throw NumericError(msg.str());
      }
      Matrix j = a;
      j.diagonal().array() += 3.0 * cubic.array() * u.array().square();
      Eigen::PartialPivLU<Matrix> jlu(j);
      u += jlu.solve(r);
      // One refinement pass on the update keeps the residual at extended-precision level.
      r = residual_of(u);
      ++iterations;
      const double next = r.lpNorm<Eigen::Infinity>();
      if (!std::isfinite(next)) throw NumericError("solve_nonlinear_bvp: Newton diverged");
      norm = next;
    }
    SolveResult res;
    res.solution = make_solution(layout, u);
    split_residual(r, interior, res.residual, res.constraint_residual);
    res.newton_iterations = iterations;
    out.push_back(std::move(res));
  }
  return out;
}

SolveResult solve_nonlinear_bvp(const OperatorSpec& op, const Function& f, const SolverOptions& options,
                                const NewtonOptions& newton) {
  const auto nodes = collocation_nodes(op, options);
  Matrix rhs(static_cast<Eigen::Index>(nodes.size()), 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) rhs(static_cast<Eigen::Index>(i), 0) = f ? f(nodes[i]) : 0.0;
  return std::move(solve_nonlinear_many(op, rhs, options, newton).front());
}

// ---------------------------------------------------------------------------
// Coupled systems

void SystemOperatorSpec::validate() const {
  if (!(b > a)) throw UsageError("system domain must satisfy a < b");
  const auto blocks = static_cast<std::size_t>(components * components);
  if (components < 1 || a2.size() != blocks || a1.size() != blocks || a0.size() != blocks)
    throw UsageError("system coefficient blocks must be components x components");
  if (constraints.size() != static_cast<std::size_t>(components)) throw UsageError("one constraint list per component");
  for (const auto& list : constraints) {
    if (list.size() != 2) throw UsageError("each component carries exactly two constraints");
    for (const auto& c : list)
      if (c.kind != ConstraintKind::dirichlet || (c.point != a && c.point != b))
        throw UsageError("system constraints must be Dirichlet values at the domain ends");
  }
}

struct SystemBvpSolver::Impl {
  SystemOperatorSpec op;
  ChebyshevPiece cp;
  int points = 0;
  Matrix a;
  Vector constraint_rhs;
  std::vector<bool> interior;
  Eigen::PartialPivLU<Matrix> lu;
};

SystemBvpSolver::SystemBvpSolver(const SystemOperatorSpec& op, const SolverOptions& options) : impl_(std::make_unique<Impl>()) {
  op.validate();
  auto& s = *impl_;
  s.op = op;
  s.points = options.nodes_per_piece;
  s.cp = chebyshev_piece(op.a, op.b, s.points);
  const int n = s.points;
  const int nc = op.components;
  const Eigen::Index m = static_cast<Eigen::Index>(n) * nc;
  s.a = Matrix::Zero(m, m);
  s.constraint_rhs = Vector::Zero(m);
  s.interior.assign(static_cast<std::size_t>(m), false);
  for (int i = 0; i < nc; ++i) {
    for (int k = 1; k < n - 1; ++k) {
      const Eigen::Index row = static_cast<Eigen::Index>(i) * n + k;
      const double x = s.cp.nodes[static_cast<std::size_t>(k)];
      for (int c = 0; c < nc; ++c) {
        const auto idx = static_cast<std::size_t>(i * nc + c);
        const double c2 = coefficient(op.a2[idx], x);
        const double c1 = coefficient(op.a1[idx], x);
        const double c0 = coefficient(op.a0[idx], x);
        const Eigen::Index col = static_cast<Eigen::Index>(c) * n;
        if (c2 != 0.0 || c1 != 0.0) s.a.block(row, col, 1, n) += c2 * s.cp.d2.row(k) + c1 * s.cp.d1.row(k);
        s.a(row, col + k) += c0;
      }
      s.interior[static_cast<std::size_t>(row)] = true;
    }
    for (const auto& c : op.constraints[static_cast<std::size_t>(i)]) {
      const Eigen::Index row = static_cast<Eigen::Index>(i) * n + (c.point == op.a ? 0 : n - 1);
      s.a(row, row) = 1.0;
      s.constraint_rhs(row) = c.value;
    }
  }
  s.lu.compute(s.a);
  if (!(s.lu.rcond() > 1e-15 * std::numeric_limits<double>::epsilon()))
    throw NumericError("solve_system_bvp: coupled collocation matrix is singular");
}

SystemBvpSolver::~SystemBvpSolver() = default;
SystemBvpSolver::SystemBvpSolver(SystemBvpSolver&&) noexcept = default;
SystemBvpSolver& SystemBvpSolver::operator=(SystemBvpSolver&&) noexcept = default;

const std::vector<double>& SystemBvpSolver::nodes() const { return impl_->cp.nodes; }

std::vector<std::vector<SolveResult>> SystemBvpSolver::solve_many(const std::vector<Matrix>& forcing) const {
  const auto& s = *impl_;
  const int nc = s.op.components;
  const int n = s.points;
  if (forcing.size() != static_cast<std::size_t>(nc)) throw UsageError("one forcing matrix per component");
  const Eigen::Index samples = forcing.front().cols();
  for (const auto& f : forcing)
    if (f.rows() != n || f.cols() != samples) throw UsageError("system forcing must be sampled at nodes()");
  const Eigen::Index m = s.a.rows();
  Matrix rhs(m, samples);
  for (Eigen::Index c = 0; c < samples; ++c)
    for (Eigen::Index i = 0; i < m; ++i)
      rhs(i, c) = s.interior[static_cast<std::size_t>(i)] ? forcing[static_cast<std::size_t>(i / n)](i % n, c)
                                                          : s.constraint_rhs(i);
  const Matrix u = refined_solve(s.lu, s.a, rhs);
  std::vector<std::vector<SolveResult>> out(static_cast<std::size_t>(samples));
  for (Eigen::Index c = 0; c < samples; ++c) {
    const Vector r = residual_extended(s.a, u.col(c), rhs.col(c));
    for (int i = 0; i < nc; ++i) {
      SolveResult res;
      const Vector ui = u.col(c).segment(static_cast<Eigen::Index>(i) * n, n);
      res.solution = Solution({make_piece(s.cp, s.op.a, s.op.b, ui.data())});
      std::vector<bool> mask(s.interior.begin() + i * n, s.interior.begin() + (i + 1) * n);
      split_residual(r.segment(static_cast<Eigen::Index>(i) * n, n), mask, res.residual, res.constraint_residual);
      out[static_cast<std::size_t>(c)].push_back(std::move(res));
    }
  }
  return out;
}

std::vector<SolveResult> solve_system_bvp(const SystemOperatorSpec& op, const std::vector<Function>& f,
                                          const SolverOptions& options) {
  SystemBvpSolver solver(op, options);
  const auto& nodes = solver.nodes();
  std::vector<Matrix> forcing;
  for (const auto& fi : f) {
    Matrix col(static_cast<Eigen::Index>(nodes.size()), 1);
    for (std::size_t k = 0; k < nodes.size(); ++k) col(static_cast<Eigen::Index>(k), 0) = fi ? fi(nodes[k]) : 0.0;
    forcing.push_back(std::move(col));
  }
  return std::move(solver.solve_many(forcing).front());
}

}  // namespace greenlearn::bvp
