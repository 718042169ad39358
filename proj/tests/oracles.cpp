#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

namespace {

constexpr double kPivotTol = 1e-11;

struct Tableau {
  Eigen::MatrixXd t;  // rows 0..k-1 constraints, last row reduced costs, last col rhs
  std::vector<int> basis;
};

// Minimizes the objective held in the last row; false when unbounded.
bool run_simplex(Tableau& tab, int allowed_cols) {
  const int k = static_cast<int>(tab.basis.size());
  const int rhs = static_cast<int>(tab.t.cols()) - 1;
  for (int guard = 0; guard < 100000; ++guard) {
    int enter = -1;
    for (int j = 0; j < allowed_cols; ++j)
      if (tab.t(k, j) < -kPivotTol) {
        enter = j;
        break;
      }
    if (enter < 0) return true;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      if (tab.t(i, enter) <= kPivotTol) continue;
      const double ratio = tab.t(i, rhs) / tab.t(i, enter);
      if (ratio < best - 1e-14 || (ratio <= best + 1e-14 && leave >= 0 && tab.basis[i] < tab.basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) return false;
    tab.t.row(leave) /= tab.t(leave, enter);
    for (int i = 0; i <= k; ++i)
      if (i != leave && tab.t(i, enter) != 0.0) tab.t.row(i) -= tab.t(i, enter) * tab.t.row(leave);
    tab.basis[leave] = enter;
  }
  return false;
}

}  // namespace

double simplex_min(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int k = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  Tableau tab;
  tab.t = Eigen::MatrixXd::Zero(k + 1, n + k + 1);
  for (int i = 0; i < k; ++i) {
    const double s = b(i) < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = s * a.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + k) = s * b(i);
    tab.basis.push_back(n + i);
  }
  for (int i = 0; i < k; ++i) tab.t.row(k) -= tab.t.row(i);
  for (int i = 0; i < k; ++i) tab.t(k, n + i) = 0.0;
  run_simplex(tab, n + k);
  if (-tab.t(k, n + k) > 1e-8 * (1.0 + b.norm())) return std::numeric_limits<double>::quiet_NaN();

  // Drive remaining artificials out of the basis where possible.
  for (int i = 0; i < k; ++i) {
    if (tab.basis[i] < n) continue;
    for (int j = 0; j < n; ++j)
      if (std::abs(tab.t(i, j)) > 1e-9) {
        tab.t.row(i) /= tab.t(i, j);
        for (int r = 0; r <= k; ++r)
          if (r != i) tab.t.row(r) -= tab.t(r, j) * tab.t.row(i);
        tab.basis[i] = j;
        break;
      }
  }
  tab.t.row(k).setZero();
  tab.t.row(k).head(n) = c.transpose();
  for (int i = 0; i < k; ++i)
    if (tab.basis[i] < n) tab.t.row(k) -= c(tab.basis[i]) * tab.t.row(i);
  if (!run_simplex(tab, n)) return -std::numeric_limits<double>::infinity();
  return -tab.t(k, n + k);
}

double l1_basis_pursuit_value(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
  const Eigen::Index n = m.cols();
  Eigen::MatrixXd a(m.rows(), 2 * n);
  a << m, -m;
  return simplex_min(a, b, Eigen::VectorXd::Ones(2 * n));
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

double shrink_second_moment(double tau) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  return c * integrate([tau](double w) { return (w - tau) * (w - tau) * std::exp(-0.5 * w * w); }, tau,
                       std::numeric_limits<double>::infinity());
}

double mp_density(double y, double b) {
  const double am = 1.0 - std::sqrt(y), ap = 1.0 + std::sqrt(y);
  if (b <= am || b >= ap) return 0.0;
  return std::sqrt((b * b - am * am) * (ap * ap - b * b)) / (std::numbers::pi * y * b);
}

double mp_moment(double y, double tau) {
  const double am = 1.0 - std::sqrt(y), ap = 1.0 + std::sqrt(y);
  const double lo = std::max(am, tau);
  if (lo >= ap) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double b) { return (b - tau) * (b - tau) * mp_density(y, b); }, lo, ap);
}

GridMin grid_minimize(const std::function<double(double)>& f, double hi, int points) {
  const double h = hi / (points - 1);
  int best = 0;
  double fbest = f(0.0);
  for (int i = 1; i < points; ++i) {
    const double v = f(i * h);
    if (v < fbest) fbest = v, best = i;
  }
  double lo = std::max(0.0, (best - 1) * h), up = std::min(hi, (best + 1) * h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = up - g * (up - lo), x2 = lo + g * (up - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && up - lo > 1e-13; ++it) {
    if (f1 <= f2) {
      up = x2, x2 = x1, f2 = f1;
      x1 = up - g * (up - lo), f1 = f(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + g * (up - lo), f2 = f(x2);
    }
  }
  const double xm = 0.5 * (lo + up);
  GridMin r{xm, f(xm)};
  if (fbest < r.value) r = {best * h, fbest};
  if (f(0.0) <= r.value) r = {0.0, f(0.0)};
  return r;
}

}  // namespace oracle
