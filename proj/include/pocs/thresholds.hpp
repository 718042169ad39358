#ifndef POCS_THRESHOLDS_HPP
#define POCS_THRESHOLDS_HPP

#include <string>
#include <vector>

#include "pocs/rng.hpp"
#include "pocs/signals.hpp"

namespace pocs {

enum class ThresholdMethod { closed_form, quadrature, monte_carlo };

std::string to_string(ThresholdMethod m);

struct ThresholdResult {
  double value = 0.0;
  // Minimizer of the inner problem over tau >= 0.
  double tau_star = 0.0;
  ThresholdMethod method = ThresholdMethod::closed_form;
  // closed_form / quadrature: numerical error bound; monte_carlo: standard error.
  double error_estimate = 0.0;
};

// Marchenko-Pastur singular value law with aspect ratio y:
//   phi_y(b) = sqrt((b^2 - a_-^2)(a_+^2 - b^2)) / (pi y b),  b in [a_-, a_+].
struct MPParams {
  double y;
  double a_minus;
  double a_plus;

  static MPParams from_ratio(double y);
};

double mp_density(const MPParams& mp, double b);
// Integral of phi_y over its support (equals 1).
double mp_mass(const MPParams& mp);
// Integral of (b - tau)^2 phi_y(b) over [max(a_-, tau), a_+].
double mp_moment(const MPParams& mp, double tau);
// d/dtau of mp_moment.
double mp_moment_derivative(const MPParams& mp, double tau);

// E shrink(g; tau)^2 for g ~ N(0, 1): 2[(1 + tau^2) Q(tau) - tau phi(tau)].
double shrink_second_moment(double tau);
double shrink_second_moment_derivative(double tau);

// inf_tau u(1 + tau^2) + (1 - u) E shrink^2. u in (0, 1].
ThresholdResult psi1(double u);
// inf_tau u(1 + tau^2 - tau^2 v (1 - 2/pi)) + (1 - u) E shrink^2. u in (0, 1], v in (0, 1].
ThresholdResult psi(double u, double v);
// Low-rank analogues, rho in (0, 1], nu in (0, 1], mu in (0, 1].
ThresholdResult psi_lr1(double rho, double nu);
ThresholdResult psi_lr(double rho, double nu, double mu);

double ratio_sp(double u, double v);
double ratio_lr(double u, double v, double w);

ThresholdResult zeta_hat_po_sparse(const SparseSignal& x);
ThresholdResult zeta_hat_po_lowrank(const LowRankSignal& x);
// Same surrogates from the scalar summaries of a signal.
ThresholdResult zeta_hat_po_sparse(int n, int s, double l1);
ThresholdResult zeta_hat_po_lowrank(int p, int q, int r, double nuclear);
ThresholdResult zeta_ln_sparse(int n, int s);
ThresholdResult zeta_ln_lowrank(int p, int q, int r);

// Monte Carlo of E dist^2(g, tau * Q_x^{-1} d f(x)).
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

// Samples are drawn in fixed-size shards, each from its own substream of
// `master_seed`, and pooled in shard order, so the estimate does not depend
// on `workers`.
class Dist2Sampler {
 public:
  static constexpr int kShardSize = 256;

  Dist2Sampler(const SparseSignal& x, long samples, std::uint64_t master_seed, int workers = 1);
  Dist2Sampler(const LowRankSignal& x, long samples, std::uint64_t master_seed, int workers = 1);

  McEstimate evaluate(double tau) const;
  long samples() const { return samples_; }

 private:
  struct Shard {
    // Per sample: constant term, linear coefficient and the magnitudes that
    // enter through shrink(.; tau)^2.
    std::vector<double> constant;
    std::vector<double> linear;
    std::vector<double> magnitudes;  // `width` entries per sample
  };
  template <class Fill>
  void generate(long samples, std::uint64_t master_seed, int workers, Fill fill);

  long samples_ = 0;
  int width_ = 0;
  double quadratic_ = 0.0;  // coefficient of tau^2, identical for all samples
  std::vector<Shard> shards_;
};

McEstimate mc_dist2_subdiff(const SparseSignal& x, double tau, long samples, Rng& rng, int workers = 1);
McEstimate mc_dist2_subdiff(const LowRankSignal& x, double tau, long samples, Rng& rng, int workers = 1);

// Minimizes the sampled curve over tau (common random numbers across tau):
// coarse grid on [0, tau_hi], finer grid around its minimum, local quadratic
// fit, and a final evaluation at the fitted vertex.
ThresholdResult minimize_mc_dist2(const Dist2Sampler& sampler, double tau_hi);

}  // namespace pocs

#endif  // POCS_THRESHOLDS_HPP
