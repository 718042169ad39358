#include "pocs/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pocs {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels) {
  static const GaussRule rule = gauss_legendre(64);
  if (panels < 1) throw std::invalid_argument("integrate_gl: need at least one panel");
  if (b == a) return 0.0;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    total += 0.5 * h * s;
  }
  return total;
}

ConvexMinimum golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double width) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > width) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x), b - a};
}

ConvexMinimum minimize_convex(const std::function<double(double)>& f,
                              const std::function<double(double)>& df, double hi, double width) {
  if (df && df(0.0) >= 0.0) return {0.0, f(0.0), 0.0};
  ConvexMinimum g = golden_section(f, 0.0, hi, width);
  if (!df) return g;
  // Bracket a sign change of f' around the golden-section estimate.
  double step = std::max(width, 1e-12);
  double a = std::max(0.0, g.argmin - step), b = g.argmin + step;
  for (int k = 0; k < 60 && df(a) > 0.0 && a > 0.0; ++k) a = std::max(0.0, a - (step *= 2.0));
  step = std::max(width, 1e-12);
  for (int k = 0; k < 60 && df(b) < 0.0; ++k) b += (step *= 2.0);
  if (df(a) > 0.0) return {a, f(a), 0.0};
  for (int k = 0; k < 200 && b - a > 0.0; ++k) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (df(mid) < 0.0)
      a = mid;
    else
      b = mid;
  }
  const double x = 0.5 * (a + b);
  return {x, f(x), b - a};
}

}  // namespace pocs
