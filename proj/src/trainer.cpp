#include "greenlearn/trainer.hpp"

#include "greenlearn/error.hpp"
#include "greenlearn/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace greenlearn::train {

using linalg::Matrix;
using linalg::Vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double inf_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset

Vector Dataset::response_norms(int component) const {
  const Matrix& u = response.at(static_cast<std::size_t>(component));
  return u.array().square().matrix() * response_grid.weights;
}

void Dataset::validate() const {
  if (forcing.empty() || response.empty()) throw UsageError("dataset has no components");
  if (forcing_grid.size() == 0 || response_grid.size() == 0) throw UsageError("dataset grids are empty");
  if (forcing_grid.dim() != response_grid.dim()) throw UsageError("forcing and response grids differ in dimension");
  if (static_cast<std::size_t>(forcing_grid.weights.size()) != forcing_grid.size() ||
      static_cast<std::size_t>(response_grid.weights.size()) != response_grid.size())
    throw UsageError("quadrature weights do not match the grids");
  const auto n = samples();
  if (n == 0) throw UsageError("dataset has no samples");
  for (const auto& f : forcing)
    if (static_cast<std::size_t>(f.rows()) != n || static_cast<std::size_t>(f.cols()) != forcing_grid.size())
      throw UsageError("forcing matrix shape does not match N x N_f");
  for (const auto& u : response)
    if (static_cast<std::size_t>(u.rows()) != n || static_cast<std::size_t>(u.cols()) != response_grid.size())
      throw UsageError("response matrix shape does not match N x N_u");
  for (const auto& f : forcing)
    if (!f.allFinite()) throw NumericError("forcing values are not finite");
  for (const auto& u : response)
    if (!u.allFinite()) throw NumericError("response values are not finite");
  for (int c = 0; c < response_components(); ++c) {
    const Vector norms = response_norms(c);
    for (Eigen::Index j = 0; j < norms.size(); ++j)
      if (!(norms(j) > 0.0)) {
        std::ostringstream msg;
        msg << "response " << j << " of component " << c << " has zero norm";
        throw NumericError(msg.str());
      }
  }
}

Dataset normalize_dataset(const Dataset& d) {
  double m = 0.0;
  for (const auto& u : d.response) m = std::max(m, u.cwiseAbs().maxCoeff());
  if (!(m > 0.0)) throw NumericError("normalize_dataset: all responses are zero");
  Dataset out = d;
  const double s = 1.0 / m;
  if (s == 1.0) return out;
  for (auto& u : out.response) u *= s;
  for (auto& f : out.forcing) f *= s;
  out.normalization *= s;
  return out;
}

Dataset add_noise(const Dataset& d, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw UsageError("add_noise: noise level must be nonnegative");
  Dataset out = d;
  if (delta == 0.0) return out;
  Rng rng(seed);
  for (auto& u : out.response)
    for (Eigen::Index j = 0; j < u.rows(); ++j)
      for (Eigen::Index i = 0; i < u.cols(); ++i) u(j, i) *= 1.0 + delta * rng.normal();
  out.noise = delta;
  return out;
}

Dataset mask_measurements(const Dataset& d, std::span<const std::size_t> kept) {
  if (kept.size() < 2) throw UsageError("mask_measurements: fewer than two response points remain");
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (kept[k] >= d.response_grid.size()) throw UsageError("mask_measurements: index out of range");
    if (k > 0 && kept[k] <= kept[k - 1]) throw UsageError("mask_measurements: indices must be ascending");
  }
  if (kept.size() == d.response_grid.size()) return d;
  if (d.response_grid.dim() != 1) throw UsageError("mask_measurements: only 1-D response grids can be masked");
  Dataset out = d;
  const auto n = static_cast<Eigen::Index>(kept.size());
  std::vector<double> pts(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) pts[k] = d.response_grid.points(static_cast<Eigen::Index>(kept[k]), 0);
  const auto rule = d.quadrature == "montecarlo" ? linalg::QuadratureRule::montecarlo : linalg::QuadratureRule::trapezoid;
  out.response_grid = linalg::make_grid(pts, rule, d.b - d.a);
  for (std::size_t c = 0; c < d.response.size(); ++c) {
    Matrix u(d.response[c].rows(), n);
    for (Eigen::Index k = 0; k < n; ++k) u.col(k) = d.response[c].col(static_cast<Eigen::Index>(kept[static_cast<std::size_t>(k)]));
    out.response[c] = std::move(u);
  }
  std::ostringstream desc;
  desc << "kept " << kept.size() << " of " << d.response_grid.size();
  out.mask = d.mask == "none" ? desc.str() : d.mask + "; " + desc.str();
  return out;
}

Dataset mask_measurements(const Dataset& d, double lo, double hi) {
  if (d.response_grid.dim() != 1) throw UsageError("mask_measurements: only 1-D response grids can be masked");
  if (!(hi >= lo)) throw UsageError("mask_measurements: empty or reversed interval");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < d.response_grid.size(); ++i) {
    const double x = d.response_grid.points(static_cast<Eigen::Index>(i), 0);
    if (x < lo || x > hi) kept.push_back(i);
  }
  if (kept.size() < 2) throw UsageError("mask_measurements: fewer than two response points remain");
  Dataset out = mask_measurements(d, kept);
  if (kept.size() != d.response_grid.size()) {
    std::ostringstream desc;
    desc.precision(17);
    desc << "exclude [" << lo << "," << hi << "]";
    out.mask = d.mask == "none" ? desc.str() : d.mask + "; " + desc.str();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config and model

void TrainConfig::validate() const {
  if (adam_epochs < 0 || lbfgs_max_iters < 0) throw UsageError("iteration counts must be nonnegative");
  if (!(adam_lr > 0.0)) throw UsageError("adam_lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw UsageError("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw UsageError("adam_eps must be positive");
  if (lbfgs_memory < 1) throw UsageError("lbfgs_memory must be positive");
  if (!(gradient_tolerance >= 0.0)) throw UsageError("gradient_tolerance must be nonnegative");
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) throw UsageError("Wolfe constants need 0 < c1 < c2 < 1");
  if (hidden.empty()) throw UsageError("at least one hidden layer is required");
}

TrainedModel init_model(const Dataset& d, const TrainConfig& config) {
  TrainedModel model;
  model.operator_id = d.operator_id;
  model.a = d.a;
  model.b = d.b;
  model.dim = d.dim();
  model.seed = config.seed;
  model.activation = config.activation;
  const int nu = d.response_components();
  const int nf = d.forcing_components();
  for (int r = 0; r < nu; ++r) {
    RowModel row;
    for (int k = 0; k < nf; ++k) {
      const auto stream = static_cast<std::uint64_t>(r * nf + k);
      row.green.push_back(nn::Mlp::init(2 * d.dim(), config.activation, derive_seed(config.seed, stream), config.hidden));
    }
    const auto stream = static_cast<std::uint64_t>(1000 + r);
    row.homogeneous = nn::Mlp::init(d.dim(), config.activation, derive_seed(config.seed, stream), config.hidden);
    model.rows.push_back(std::move(row));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Loss

LossProblem::LossProblem(const Dataset& d, int row) : data_(&d), row_(row) {
  d.validate();
  if (row < 0 || row >= d.response_components()) throw UsageError("LossProblem: response row out of range");
  const int dim = d.dim();
  const auto nu = static_cast<Eigen::Index>(d.response_grid.size());
  const auto nf = static_cast<Eigen::Index>(d.forcing_grid.size());
  product_.resize(2 * dim, nu * nf);
  for (Eigen::Index k = 0; k < nf; ++k)
    for (Eigen::Index i = 0; i < nu; ++i) {
      const Eigen::Index p = i + nu * k;
      product_.block(0, p, dim, 1) = d.response_grid.points.row(i).transpose();
      product_.block(dim, p, dim, 1) = d.forcing_grid.points.row(k).transpose();
    }
  response_inputs_ = d.response_grid.points.transpose();
  norms_ = d.response_norms(row);
  caches_.resize(static_cast<std::size_t>(d.forcing_components()));
}

std::size_t LossProblem::parameter_count(const RowModel& model) const {
  std::size_t n = model.homogeneous.parameter_count();
  for (const auto& g : model.green) n += g.parameter_count();
  return n;
}

std::vector<double> LossProblem::pack(const RowModel& model) const {
  std::vector<double> out;
  out.reserve(parameter_count(model));
  for (const auto& g : model.green) out.insert(out.end(), g.parameters().begin(), g.parameters().end());
  const auto h = model.homogeneous.parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

void LossProblem::unpack(std::span<const double> params, RowModel& model) const {
  if (params.size() != parameter_count(model)) throw UsageError("unpack: parameter vector has the wrong size");
  std::size_t off = 0;
  auto fill = [&](nn::Mlp& net) {
    auto p = net.parameters();
    std::copy(params.begin() + static_cast<std::ptrdiff_t>(off), params.begin() + static_cast<std::ptrdiff_t>(off + p.size()), p.begin());
    off += p.size();
  };
  for (auto& g : model.green) fill(g);
  fill(model.homogeneous);
}

namespace {

// (1/N) sum_j sum_i w_i r(j, i)^2 / ||u_j||^2
double relative_loss(const Matrix& r, const Vector& w, const Vector& norms) {
  const Vector per_sample = r.array().square().matrix() * w;
  return (per_sample.array() / norms.array()).sum() / static_cast<double>(r.rows());
}

}  // namespace

double kernel_loss(const Dataset& d, int row, const std::vector<Matrix>& green, const Vector& homogeneous) {
  if (green.size() != d.forcing.size()) throw UsageError("kernel_loss: one kernel matrix per forcing component");
  Matrix pred = Matrix::Zero(static_cast<Eigen::Index>(d.samples()), static_cast<Eigen::Index>(d.response_grid.size()));
  for (std::size_t k = 0; k < green.size(); ++k) {
    if (green[k].rows() != pred.cols() || green[k].cols() != static_cast<Eigen::Index>(d.forcing_grid.size()))
      throw UsageError("kernel_loss: kernel matrix must be N_u x N_f");
    pred.noalias() += (d.forcing[k] * d.forcing_grid.weights.asDiagonal()) * green[k].transpose();
  }
  if (homogeneous.size() != 0) pred.rowwise() += homogeneous.transpose();
  const Matrix r = d.response[static_cast<std::size_t>(row)] - pred;
  return relative_loss(r, d.response_grid.weights, d.response_norms(row));
}

Matrix LossProblem::predict(const RowModel& model) const {
  const Dataset& d = *data_;
  if (model.green.size() != d.forcing.size()) throw UsageError("predict: model and dataset component counts differ");
  const auto nu = static_cast<Eigen::Index>(d.response_grid.size());
  const auto nf = static_cast<Eigen::Index>(d.forcing_grid.size());
  Matrix pred = Matrix::Zero(static_cast<Eigen::Index>(d.samples()), nu);
  for (std::size_t k = 0; k < model.green.size(); ++k) {
    const Vector out = model.green[k].forward_columns(product_, caches_[k]);
    const Eigen::Map<const Matrix> gm(out.data(), nu, nf);
    pred.noalias() += (d.forcing[k] * d.forcing_grid.weights.asDiagonal()) * gm.transpose();
  }
  const Vector h = model.homogeneous.forward_columns(response_inputs_, hom_cache_);
  pred.rowwise() += h.transpose();
  return pred;
}

double LossProblem::evaluate(const RowModel& model, std::vector<double>* grad) const {
  const Dataset& d = *data_;
  const auto nu = static_cast<Eigen::Index>(d.response_grid.size());
  const auto nf = static_cast<Eigen::Index>(d.forcing_grid.size());
  const auto n = static_cast<double>(d.samples());
  const Matrix pred = predict(model);
  const Matrix r = d.response[static_cast<std::size_t>(row_)] - pred;
  const Vector& wx = d.response_grid.weights;
  const double loss = relative_loss(r, wx, norms_);
  if (grad) grad->assign(parameter_count(model), 0.0);
  if (!std::isfinite(loss)) return kInf;
  if (!grad) return loss;

  // dL/dpred(j, i) = -(2 / N) wx_i r(j, i) / ||u_j||^2
  const Vector scale = (-2.0 / n) * norms_.cwiseInverse();
  const Matrix dpred = scale.asDiagonal() * r * wx.asDiagonal();
  std::size_t off = 0;
  for (std::size_t k = 0; k < model.green.size(); ++k) {
    // dL/dG(i, l) = sum_j dpred(j, i) f_k(j, l) wy_l
    const Matrix dg = (dpred.transpose() * d.forcing[k]) * d.forcing_grid.weights.asDiagonal();
    const Eigen::Map<const Vector> dout(dg.data(), nu * nf);
    const auto count = model.green[k].parameter_count();
    model.green[k].backward(caches_[k], dout, std::span<double>(grad->data() + off, count));
    off += count;
  }
  const Vector dh = dpred.colwise().sum().transpose();
  model.homogeneous.backward(hom_cache_, dh, std::span<double>(grad->data() + off, model.homogeneous.parameter_count()));
  for (double g : *grad)
    if (!std::isfinite(g)) return kInf;
  return loss;
}

// ---------------------------------------------------------------------------
// Optimizers

namespace {

using Clock = std::chrono::steady_clock;

struct Objective {
  const LossProblem& problem;
  RowModel& model;
  std::size_t evaluations = 0;

  double operator()(std::span<const double> x, std::vector<double>& g) {
    problem.unpack(x, model);
    ++evaluations;
    return problem.evaluate(model, &g);
  }
};

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;
  std::vector<double> x;
  std::vector<double> g;
};

// Strong Wolfe line search (bracketing followed by zoom with safeguarded
// cubic interpolation). Non-finite values count as +infinity.
LineSearchResult strong_wolfe(Objective& obj, const std::vector<double>& x0, double f0, const std::vector<double>& g0,
                              const std::vector<double>& dir, double alpha0, double c1, double c2) {
  const double dphi0 = dot(g0, dir);
  const std::size_t n = x0.size();
  LineSearchResult best;
  best.f = f0;

  struct Point {
    double a = 0.0, f = 0.0, d = 0.0;
    std::vector<double> x, g;
  };
  auto probe = [&](double a) {
    Point p;
    p.a = a;
    p.x.resize(n);
    for (std::size_t k = 0; k < n; ++k) p.x[k] = x0[k] + a * dir[k];
    p.f = obj(p.x, p.g);
    if (!std::isfinite(p.f)) {
      p.f = kInf;
      p.d = std::numeric_limits<double>::quiet_NaN();
    } else {
      p.d = dot(p.g, dir);
      if (p.f < best.f) {
        best.f = p.f;
        best.alpha = a;
        best.x = p.x;
        best.g = p.g;
      }
    }
    return p;
  };
  auto accept = [&](Point& p) {
    LineSearchResult r;
    r.ok = true;
    r.alpha = p.a;
    r.f = p.f;
    r.x = std::move(p.x);
    r.g = std::move(p.g);
    return r;
  };
  auto cubic_min = [](const Point& lo, const Point& hi) {
    const double a = lo.a, b = hi.a;
    const double lo_bound = std::min(a, b) + 0.1 * std::abs(b - a);
    const double hi_bound = std::max(a, b) - 0.1 * std::abs(b - a);
    if (!std::isfinite(hi.f) || !std::isfinite(hi.d) || !std::isfinite(lo.d)) return 0.5 * (a + b);
    const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (a - b);
    const double disc = d1 * d1 - lo.d * hi.d;
    if (disc < 0.0) return 0.5 * (a + b);
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double t = b - (b - a) * (hi.d + d2 - d1) / (hi.d - lo.d + 2.0 * d2);
    if (!std::isfinite(t)) return 0.5 * (a + b);
    return std::clamp(t, lo_bound, hi_bound);
  };
  auto zoom = [&](Point lo, Point hi) -> LineSearchResult {
    for (int it = 0; it < 30; ++it) {
      if (std::abs(hi.a - lo.a) <= 1e-14 * std::max(1.0, std::abs(lo.a))) break;
      Point p = probe(cubic_min(lo, hi));
      if (p.f > f0 + c1 * p.a * dphi0 || p.f >= lo.f) {
        hi = std::move(p);
      } else {
        if (std::abs(p.d) <= -c2 * dphi0) return accept(p);
        if (p.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = std::move(p);
      }
    }
    return {};
  };

  Point prev;
  prev.a = 0.0;
  prev.f = f0;
  prev.d = dphi0;
  double alpha = alpha0;
  for (int it = 0; it < 25; ++it) {
    Point p = probe(alpha);
    if (p.f > f0 + c1 * alpha * dphi0 || (it > 0 && p.f >= prev.f)) {
      LineSearchResult r = zoom(prev, p);
      if (r.ok) return r;
      break;
    }
    if (std::abs(p.d) <= -c2 * dphi0) return accept(p);
    if (p.d >= 0.0) {
      LineSearchResult r = zoom(p, prev);
      if (r.ok) return r;
      break;
    }
    prev = std::move(p);
    alpha *= 2.0;
  }
  best.ok = false;
  return best;
}

}  // namespace

namespace {

void train_row(const LossProblem& problem, RowModel& row, const TrainConfig& config, int row_index,
               const ProgressCallback& progress) {
  const auto start = Clock::now();
  const double time_offset = row.wall_time;
  auto elapsed = [&] { return time_offset + std::chrono::duration<double>(Clock::now() - start).count(); };
  Objective obj{problem, row};
  std::vector<double> x = problem.pack(row);
  std::vector<double> g;
  const std::size_t n = x.size();

  auto log = [&](const std::string& phase, double f, const std::vector<double>& grad) {
    LogEntry e;
    e.iteration = row.log.size();
    e.phase = phase;
    e.loss = f;
    e.gradient_norm = l2(grad);
    e.wall_time = elapsed();
    row.log.push_back(e);
    row.wall_time = e.wall_time;
    if (progress) return progress(Progress{row_index, &row.log.back()});
    return true;
  };

  double f = obj(x, g);
  if (row.log.empty()) {
    if (!std::isfinite(f)) throw NumericError("training: loss is not finite at the initial parameters");
    if (!log("init", f, g)) return;
  } else if (!std::isfinite(f)) {
    throw NumericError("training: loss is not finite at the resumed parameters");
  }

  // Adam
  if (row.adam_m.size() != n) {
    row.adam_m.assign(n, 0.0);
    row.adam_v.assign(n, 0.0);
  }
  while (row.adam_steps < config.adam_epochs) {
    const int t = row.adam_steps + 1;
    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);
    std::vector<double> prev = x;
    for (std::size_t k = 0; k < n; ++k) {
      row.adam_m[k] = config.beta1 * row.adam_m[k] + (1.0 - config.beta1) * g[k];
      row.adam_v[k] = config.beta2 * row.adam_v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double mhat = row.adam_m[k] / bc1;
      const double vhat = row.adam_v[k] / bc2;
      x[k] -= config.adam_lr * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
    row.adam_steps = t;
    std::vector<double> gn;
    const double fn = obj(x, gn);
    if (!std::isfinite(fn)) {
      // Stepped onto a pole: keep the last finite iterate and hand over to L-BFGS.
      x = std::move(prev);
      f = obj(x, g);
      row.adam_steps = config.adam_epochs;
      break;
    }
    f = fn;
    g = std::move(gn);
    if (!log("adam", f, g)) {
      problem.unpack(x, row);
      return;
    }
  }
  row.phase_boundary = row.log.size() - 1;
  problem.unpack(x, row);

  // L-BFGS
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(n), q(n);
  std::vector<double> alpha_k;
  for (int it = 0; it < config.lbfgs_max_iters; ++it) {
    if (inf_norm(g) <= config.gradient_tolerance) break;
    // two-loop recursion
    q = g;
    const std::size_t m = s_hist.size();
    alpha_k.assign(m, 0.0);
    for (std::size_t j = m; j-- > 0;) {
      alpha_k[j] = rho_hist[j] * dot(s_hist[j], q);
      for (std::size_t k = 0; k < n; ++k) q[k] -= alpha_k[j] * y_hist[j][k];
    }
    double gamma = 1.0;
    if (m > 0) gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (std::size_t k = 0; k < n; ++k) q[k] *= gamma;
    for (std::size_t j = 0; j < m; ++j) {
      const double beta = rho_hist[j] * dot(y_hist[j], q);
      for (std::size_t k = 0; k < n; ++k) q[k] += s_hist[j][k] * (alpha_k[j] - beta);
    }
    for (std::size_t k = 0; k < n; ++k) dir[k] = -q[k];
    if (dot(dir, g) >= 0.0) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t k = 0; k < n; ++k) dir[k] = -g[k];
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / std::max(l2(g), 1e-300)) : 1.0;
    LineSearchResult ls = strong_wolfe(obj, x, f, g, dir, alpha0, config.wolfe_c1, config.wolfe_c2);
    if (!ls.ok) {
      if (!ls.x.empty() && ls.f < f) {
        x = std::move(ls.x);
        g = std::move(ls.g);
        f = ls.f;
        log("lbfgs", f, g);
      }
      break;
    }
    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = ls.x[k] - x[k];
      y[k] = ls.g[k] - g[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * l2(s) * l2(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > config.lbfgs_memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(ls.x);
    g = std::move(ls.g);
    f = ls.f;
    if (!log("lbfgs", f, g)) break;
  }
  problem.unpack(x, row);
  row.final_loss = f;
  row.finished = true;
  row.adam_m.clear();
  row.adam_v.clear();
}

}  // namespace

TrainedModel train(const Dataset& d, const TrainConfig& config, const TrainedModel* resume,
                   const ProgressCallback& progress) {
  config.validate();
  d.validate();
  TrainedModel model = resume ? *resume : init_model(d, config);
  if (model.response_components() != d.response_components() || model.forcing_components() != d.forcing_components())
    throw UsageError("train: model does not match the dataset's component counts");
  for (int r = 0; r < model.response_components(); ++r) {
    RowModel& row = model.rows[static_cast<std::size_t>(r)];
    if (row.finished) continue;
    LossProblem problem(d, r);
    bool stopped = false;
    ProgressCallback wrapped;
    if (progress)
      wrapped = [&](const Progress& p) {
        const bool go = progress(p);
        if (!go) stopped = true;
        return go;
      };
    train_row(problem, row, config, r, wrapped);
    if (stopped) break;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Grid evaluation

Matrix evaluate_green(const nn::Mlp& net, const Matrix& x, const Matrix& y) {
  const int dim = static_cast<int>(x.cols());
  if (y.cols() != dim || net.input_dim() != 2 * dim) throw UsageError("evaluate_green: dimension mismatch");
  const Eigen::Index nx = x.rows();
  const Eigen::Index ny = y.rows();
  Matrix values(nx, ny);
  const Eigen::Index total = nx * ny;
  const Eigen::Index chunk = 32768;
  nn::ForwardCache cache;
  Matrix inputs;
  for (Eigen::Index start = 0; start < total; start += chunk) {
    const Eigen::Index count = std::min(chunk, total - start);
    inputs.resize(2 * dim, count);
    for (Eigen::Index c = 0; c < count; ++c) {
      const Eigen::Index p = start + c;
      const Eigen::Index i = p % nx;
      const Eigen::Index k = p / nx;
      inputs.block(0, c, dim, 1) = x.row(i).transpose();
      inputs.block(dim, c, dim, 1) = y.row(k).transpose();
    }
    const Vector out = net.forward_columns(inputs, cache);
    std::copy(out.data(), out.data() + count, values.data() + start);
  }
  return values;
}

Vector evaluate_homogeneous(const nn::Mlp& net, const Matrix& x) {
  if (net.input_dim() != x.cols()) throw UsageError("evaluate_homogeneous: dimension mismatch");
  nn::ForwardCache cache;
  return net.forward_columns(x.transpose(), cache);
}

}  // namespace greenlearn::train
