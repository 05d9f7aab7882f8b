// Fits a type (3,2) rational function to max(0, x) on [-1, 1] in the minimax
// sense and prints the coefficients with 17 significant digits.
//
// Method: linearized least squares for a starting point, then Lawson
// reweighting around Levenberg-Marquardt solves of the weighted nonlinear
// least-squares problem. The denominator is normalized so that q0 = 1.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <vector>

namespace {

struct Fit {
  Eigen::Matrix<double, 6, 1> theta;  // p0..p3, q1, q2

  double num(double x) const { return theta(0) + x * (theta(1) + x * (theta(2) + x * theta(3))); }
  double den(double x) const { return 1.0 + x * (theta(4) + x * theta(5)); }
  double operator()(double x) const { return num(x) / den(x); }
};

double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

int main() {
  const int n = 20001;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (n - 1);

  Fit fit;
  {
    // P(x) - relu(x) (q1 x + q2 x^2) = relu(x)
    Eigen::MatrixXd a(n, 6);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      const double x = xs[static_cast<std::size_t>(i)];
      const double r = relu(x);
      a.row(i) << 1.0, x, x * x, x * x * x, -r * x, -r * x * x;
      b(i) = r;
    }
    fit.theta = a.colPivHouseholderQr().solve(b);
  }

  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  Fit best = fit;
  double best_err = 1e300;
  for (int outer = 0; outer < 400; ++outer) {
    double lambda = 1e-6;
    for (int inner = 0; inner < 20; ++inner) {
      Eigen::MatrixXd j(n, 6);
      Eigen::VectorXd r(n);
      for (int i = 0; i < n; ++i) {
        const double x = xs[static_cast<std::size_t>(i)];
        const double sw = std::sqrt(weights(i));
        const double q = fit.den(x);
        const double v = fit.num(x) / q;
        r(i) = sw * (v - relu(x));
        j.row(i) << sw / q, sw * x / q, sw * x * x / q, sw * x * x * x / q, -sw * v * x / q, -sw * v * x * x / q;
      }
      const Eigen::MatrixXd jtj = j.transpose() * j;
      const Eigen::VectorXd g = j.transpose() * r;
      const double before = r.squaredNorm();
      bool accepted = false;
      for (int tries = 0; tries < 30 && !accepted; ++tries) {
        Eigen::MatrixXd m = jtj;
        m.diagonal() *= (1.0 + lambda);
        Fit trial = fit;
        trial.theta -= m.ldlt().solve(g);
        double after = 0.0;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
          const double x = xs[static_cast<std::size_t>(i)];
          if (trial.den(x) <= 0.0) ok = false;
          const double e = trial(x) - relu(x);
          after += weights(i) * e * e;
        }
        if (ok && after < before) {
          fit = trial;
          lambda *= 0.3;
          accepted = true;
        } else {
          lambda *= 10.0;
        }
      }
      if (!accepted) break;
    }
    double err = 0.0;
    Eigen::VectorXd abs_err(n);
    for (int i = 0; i < n; ++i) {
      const double x = xs[static_cast<std::size_t>(i)];
      abs_err(i) = std::abs(fit(x) - relu(x));
      err = std::max(err, abs_err(i));
    }
    if (err < best_err) {
      best_err = err;
      best = fit;
    }
    weights = weights.cwiseProduct(abs_err);
    weights /= weights.sum();
  }

  std::printf("max |r(x) - relu(x)| on [-1,1]: %.6e\n", best_err);
  std::printf("p0 = %.17g\np1 = %.17g\np2 = %.17g\np3 = %.17g\n", best.theta(0), best.theta(1), best.theta(2),
              best.theta(3));
  std::printf("q0 = %.17g\nq1 = %.17g\nq2 = %.17g\n", 1.0, best.theta(4), best.theta(5));
  return 0;
}
