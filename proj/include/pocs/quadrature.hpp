#ifndef POCS_QUADRATURE_HPP
#define POCS_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace pocs {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule (Newton iteration on P_n).
GaussRule gauss_legendre(int n);

// Composite Gauss-Legendre on [a, b] with `panels` equal panels of the
// shared 64-point rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels);

// Minimizer of a convex function on [0, hi]. Golden-section search narrows
// the bracket to `width`; when a derivative is supplied the result is then
// refined by bisection on its sign.
struct ConvexMinimum {
  double argmin;
  double value;
  // Final bracket width.
  double bracket;
};

ConvexMinimum minimize_convex(const std::function<double(double)>& f,
                              const std::function<double(double)>& df, double hi,
                              double width = 1e-10);

ConvexMinimum golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double width);

}  // namespace pocs

#endif  // POCS_QUADRATURE_HPP
