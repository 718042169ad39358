#include "pocs/thresholds.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "pocs/quadrature.hpp"

namespace pocs {

namespace {

constexpr double kTauHi = 10.0;
constexpr double kStationarityTol = 1e-8;
constexpr int kMpPanels = 8;
constexpr double kEps = std::numeric_limits<double>::epsilon();
// 1 - 2/pi, the weight by which Q_x^{-1} shortens the signal direction.
constexpr double kOneMinusTwoOverPi = 1.0 - 2.0 / std::numbers::pi;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }
double normal_tail(double t) { return 0.5 * std::erfc(t / std::numbers::sqrt2); }

// phi_y(b) |db| after b = a_- + 2 sqrt(y) cos^2(theta/2), theta in [0, pi]
// (so b = 1 + sqrt(y) cos theta). The square-root zeros at both edges are
// absorbed into sin^2(theta); at y = 1 the 1/b pole is cancelled analytically.
struct MpSubstitution {
  const MPParams& mp;

  double b(double theta) const {
    const double c = std::cos(0.5 * theta);
    return mp.a_minus + 2.0 * std::sqrt(mp.y) * c * c;
  }

  double weight(double theta) const {
    if (mp.a_minus == 0.0) {
      const double sh = std::sin(0.5 * theta);
      const double ch = std::cos(0.5 * theta);
      return 2.0 * std::numbers::sqrt2 * sh * sh * ch * std::sqrt(b(theta) + mp.a_plus) / std::numbers::pi;
    }
    const double bb = b(theta);
    const double st = std::sin(theta);
    return st * st * std::sqrt((bb + mp.a_minus) * (bb + mp.a_plus)) / (std::numbers::pi * bb);
  }

  // Upper theta limit of the region b >= tau.
  double theta_max(double tau) const {
    if (tau <= mp.a_minus) return std::numbers::pi;
    if (tau >= mp.a_plus) return 0.0;
    return std::acos(std::clamp((tau - 1.0) / std::sqrt(mp.y), -1.0, 1.0));
  }
};

double mp_moment_panels(const MPParams& mp, double tau, int panels) {
  const MpSubstitution sub{mp};
  const double hi = sub.theta_max(tau);
  if (hi == 0.0) return 0.0;
  return integrate_gl(
      [&](double th) {
        const double d = sub.b(th) - tau;
        return d * d * sub.weight(th);
      },
      0.0, hi, panels);
}

void check_stationary(const std::function<double(double)>& df, double tau, const char* who) {
  const double g = df(tau);
  if (tau == 0.0 ? g < -kStationarityTol : std::abs(g) > kStationarityTol)
    throw std::runtime_error(std::string(who) + ": minimizer failed the stationarity check");
}

ThresholdResult minimize_objective(const std::function<double(double)>& f,
                                   const std::function<double(double)>& df, const char* who,
                                   ThresholdMethod method) {
  const ConvexMinimum m = minimize_convex(f, df, kTauHi);
  check_stationary(df, m.argmin, who);
  ThresholdResult r;
  r.value = m.value;
  r.tau_star = m.argmin;
  r.method = method;
  r.error_estimate = std::abs(df(m.argmin)) * m.bracket + 4.0 * kEps * std::abs(m.value);
  return r;
}

// Shared objective of psi1 / psi: u(1 + c tau^2) + (1 - u) E shrink^2.
ThresholdResult sparse_objective(double u, double c, const char* who) {
  auto f = [u, c](double t) { return u * (1.0 + c * t * t) + (1.0 - u) * shrink_second_moment(t); };
  auto df = [u, c](double t) { return 2.0 * u * c * t + (1.0 - u) * shrink_second_moment_derivative(t); };
  return minimize_objective(f, df, who, ThresholdMethod::closed_form);
}

// Shared objective of Psi1 / Psi:
//   rho nu + (1 - rho nu)[rho (1 + c tau^2) + (1 - rho) mp_moment(y, tau)].
ThresholdResult lowrank_objective(double rho, double nu, double c, const char* who) {
  const double rn = rho * nu;
  if (rho == 1.0) {
    // The Marchenko-Pastur term drops out and the minimum sits at tau = 0.
    auto f = [rn, c](double t) { return rn + (1.0 - rn) * (1.0 + c * t * t); };
    auto df = [rn, c](double t) { return (1.0 - rn) * 2.0 * c * t; };
    return minimize_objective(f, df, who, ThresholdMethod::closed_form);
  }
  const MPParams mp = MPParams::from_ratio((nu - rn) / (1.0 - rn));
  auto f = [&](double t) { return rn + (1.0 - rn) * (rho * (1.0 + c * t * t) + (1.0 - rho) * mp_moment(mp, t)); };
  auto df = [&](double t) {
    return (1.0 - rn) * (2.0 * rho * c * t + (1.0 - rho) * mp_moment_derivative(mp, t));
  };
  ThresholdResult r = minimize_objective(f, df, who, ThresholdMethod::quadrature);
  const double coarse = mp_moment_panels(mp, r.tau_star, kMpPanels / 2);
  r.error_estimate += (1.0 - rn) * (1.0 - rho) * std::abs(mp_moment(mp, r.tau_star) - coarse);
  return r;
}

}  // namespace

std::string to_string(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::closed_form: return "closed_form";
    case ThresholdMethod::quadrature: return "quadrature";
    case ThresholdMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

MPParams MPParams::from_ratio(double y) {
  require(y > 0.0 && y <= 1.0, "MPParams: y must lie in (0, 1]");
  const double r = std::sqrt(y);
  return {y, 1.0 - r, 1.0 + r};
}

double mp_density(const MPParams& mp, double b) {
  if (b <= mp.a_minus || b >= mp.a_plus) return 0.0;
  return std::sqrt((b * b - mp.a_minus * mp.a_minus) * (mp.a_plus * mp.a_plus - b * b)) /
         (std::numbers::pi * mp.y * b);
}

double mp_mass(const MPParams& mp) {
  const MpSubstitution sub{mp};
  return integrate_gl([&](double th) { return sub.weight(th); }, 0.0, std::numbers::pi, kMpPanels);
}

double mp_moment(const MPParams& mp, double tau) {
  require(tau >= 0.0, "mp_moment: tau must be nonnegative");
  if (tau >= mp.a_plus) return 0.0;
  return mp_moment_panels(mp, tau, kMpPanels);
}

double mp_moment_derivative(const MPParams& mp, double tau) {
  require(tau >= 0.0, "mp_moment_derivative: tau must be nonnegative");
  if (tau >= mp.a_plus) return 0.0;
  const MpSubstitution sub{mp};
  return -2.0 * integrate_gl([&](double th) { return (sub.b(th) - tau) * sub.weight(th); }, 0.0,
                             sub.theta_max(tau), kMpPanels);
}

double shrink_second_moment(double tau) {
  require(tau >= 0.0, "shrink_second_moment: tau must be nonnegative");
  return 2.0 * ((1.0 + tau * tau) * normal_tail(tau) - tau * normal_pdf(tau));
}

double shrink_second_moment_derivative(double tau) {
  require(tau >= 0.0, "shrink_second_moment_derivative: tau must be nonnegative");
  return -4.0 * (normal_pdf(tau) - tau * normal_tail(tau));
}

ThresholdResult psi1(double u) {
  require(u > 0.0 && u <= 1.0, "psi1: u must lie in (0, 1]");
  return sparse_objective(u, 1.0, "psi1");
}

ThresholdResult psi(double u, double v) {
  require(u > 0.0 && u <= 1.0, "psi: u must lie in (0, 1]");
  require(v > 0.0 && v <= 1.0, "psi: v must lie in (0, 1]");
  return sparse_objective(u, 1.0 - v * kOneMinusTwoOverPi, "psi");
}

ThresholdResult psi_lr1(double rho, double nu) {
  require(rho > 0.0 && rho <= 1.0, "psi_lr1: rho must lie in (0, 1]");
  require(nu > 0.0 && nu <= 1.0, "psi_lr1: nu must lie in (0, 1]");
  return lowrank_objective(rho, nu, 1.0, "psi_lr1");
}

ThresholdResult psi_lr(double rho, double nu, double mu) {
  require(rho > 0.0 && rho <= 1.0, "psi_lr: rho must lie in (0, 1]");
  require(nu > 0.0 && nu <= 1.0, "psi_lr: nu must lie in (0, 1]");
  require(mu > 0.0 && mu <= 1.0, "psi_lr: mu must lie in (0, 1]");
  return lowrank_objective(rho, nu, 1.0 - mu * kOneMinusTwoOverPi, "psi_lr");
}

double ratio_sp(double u, double v) { return psi(u, v).value / psi1(u).value; }

double ratio_lr(double u, double v, double w) { return psi_lr(u, v, w).value / psi_lr1(u, v).value; }

namespace {

ThresholdResult scaled(ThresholdResult r, double factor) {
  r.value *= factor;
  r.error_estimate *= factor;
  return r;
}

void check_dims(int n, int s) {
  require(n >= 1 && s >= 1 && s <= n, "sparse threshold: need 1 <= s <= n");
}

void check_dims(int p, int q, int r) {
  require(p >= 1 && p <= q, "low-rank threshold: need 1 <= p <= q");
  require(r >= 1 && r <= p, "low-rank threshold: need 1 <= r <= p");
}

}  // namespace

ThresholdResult zeta_hat_po_sparse(int n, int s, double l1) {
  check_dims(n, s);
  const double v = l1 * l1 / s;
  require(l1 >= 1.0 - 1e-12 && v <= 1.0 + 1e-12, "zeta_hat_po_sparse: l1 must lie in [1, sqrt(s)]");
  return scaled(psi(static_cast<double>(s) / n, std::min(v, 1.0)), n);
}

ThresholdResult zeta_hat_po_sparse(const SparseSignal& x) {
  return zeta_hat_po_sparse(x.dimension(), x.sparsity(), x.l1());
}

ThresholdResult zeta_hat_po_lowrank(int p, int q, int r, double nuclear) {
  check_dims(p, q, r);
  const double mu = nuclear * nuclear / r;
  require(nuclear >= 1.0 - 1e-12 && mu <= 1.0 + 1e-12,
          "zeta_hat_po_lowrank: nuclear norm must lie in [1, sqrt(r)]");
  return scaled(psi_lr(static_cast<double>(r) / p, static_cast<double>(p) / q, std::min(mu, 1.0)),
                static_cast<double>(p) * q);
}

ThresholdResult zeta_hat_po_lowrank(const LowRankSignal& x) {
  return zeta_hat_po_lowrank(x.rows(), x.cols(), x.rank(), x.nuclear());
}

ThresholdResult zeta_ln_sparse(int n, int s) {
  check_dims(n, s);
  return scaled(psi1(static_cast<double>(s) / n), n);
}

ThresholdResult zeta_ln_lowrank(int p, int q, int r) {
  check_dims(p, q, r);
  return scaled(psi_lr1(static_cast<double>(r) / p, static_cast<double>(p) / q), static_cast<double>(p) * q);
}

// ---------------------------------------------------------------------------
// Monte Carlo

template <class Fill>
void Dist2Sampler::generate(long samples, std::uint64_t master_seed, int workers, Fill fill) {
  require(samples >= 1, "Dist2Sampler: need at least one sample");
  samples_ = samples;
  const long nshards = (samples + kShardSize - 1) / kShardSize;
  shards_.resize(static_cast<std::size_t>(nshards));
  std::atomic<long> next{0};
  auto work = [&]() {
    for (long k = next++; k < nshards; k = next++) {
      Rng rng(derive_seed(master_seed, {static_cast<std::uint64_t>(k)}));
      const long count = std::min<long>(kShardSize, samples - k * kShardSize);
      Shard& sh = shards_[static_cast<std::size_t>(k)];
      sh.constant.resize(count);
      sh.linear.resize(count);
      sh.magnitudes.resize(static_cast<std::size_t>(count) * width_);
      for (long i = 0; i < count; ++i) fill(rng, sh, i);
    }
  };
  const int nthreads = std::max(1, std::min<int>(workers, static_cast<int>(nshards)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

Dist2Sampler::Dist2Sampler(const SparseSignal& x, long samples, std::uint64_t master_seed, int workers) {
  const int n = x.dimension();
  const int s = x.sparsity();
  width_ = n - s;
  // Q_x^{-1} applied to sign(x) on the support: d_i = sign(x_i) - (1 - sqrt(2/pi)) |x|_1 x_i.
  const double c = 1.0 - std::sqrt(2.0 / std::numbers::pi);
  std::vector<double> d(s);
  for (int i = 0; i < s; ++i) {
    d[i] = (x.values()[i] > 0.0 ? 1.0 : -1.0) - c * x.l1() * x.values()[i];
    quadratic_ += d[i] * d[i];
  }
  std::vector<char> on_support(n, 0);
  for (int idx : x.support()) on_support[idx] = 1;
  generate(samples, master_seed, workers, [&](Rng& rng, Shard& sh, long i) {
    double cst = 0.0, lin = 0.0;
    int k = 0, off = 0;
    double* mags = sh.magnitudes.data() + i * width_;
    for (int j = 0; j < n; ++j) {
      const double g = rng.normal();
      if (on_support[j]) {
        cst += g * g;
        lin -= 2.0 * g * d[k++];
      } else {
        mags[off++] = std::abs(g);
      }
    }
    sh.constant[i] = cst;
    sh.linear[i] = lin;
  });
}

Dist2Sampler::Dist2Sampler(const LowRankSignal& x, long samples, std::uint64_t master_seed, int workers) {
  const int p = x.rows(), q = x.cols(), r = x.rank();
  width_ = std::min(p - r, q - r);
  // Complete the frames: U = [U1 U2], V = [V1 V2] orthogonal.
  auto complete = [](const Eigen::MatrixXd& f) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(f);
    Eigen::MatrixXd full = qr.householderQ();
    full.leftCols(f.cols()) = f;
    return full;
  };
  const Eigen::MatrixXd u = complete(x.u1());
  const Eigen::MatrixXd v = complete(x.v1());
  // Q_x^{-1} on the subgradient's signal block: I_r - (1 - sqrt(2/pi)) |X|_nu Sigma_r.
  const double c = 1.0 - std::sqrt(2.0 / std::numbers::pi);
  const Eigen::VectorXd dg = (1.0 - c * x.nuclear() * x.sigma().array()).matrix();
  quadratic_ = dg.squaredNorm();
  generate(samples, master_seed, workers, [&](Rng& rng, Shard& sh, long i) {
    Eigen::MatrixXd g(p, q);
    for (int col = 0; col < q; ++col)
      for (int row = 0; row < p; ++row) g(row, col) = rng.normal();
    const Eigen::MatrixXd h = u.transpose() * g * v;
    const double g11_diag_dot = h.topLeftCorner(r, r).diagonal().dot(dg);
    const double outside = h.squaredNorm() - h.bottomRightCorner(p - r, q - r).squaredNorm();
    sh.constant[i] = outside;
    sh.linear[i] = -2.0 * g11_diag_dot;
    if (width_ > 0) {
      const Eigen::VectorXd sv =
          Eigen::JacobiSVD<Eigen::MatrixXd>(h.bottomRightCorner(p - r, q - r)).singularValues();
      std::copy(sv.data(), sv.data() + width_, sh.magnitudes.data() + i * width_);
    }
  });
}

McEstimate Dist2Sampler::evaluate(double tau) const {
  require(tau >= 0.0, "Dist2Sampler: tau must be nonnegative");
  // Per-shard mean / M2 (Welford), pooled in shard order (Chan et al.).
  double mean = 0.0, m2 = 0.0;
  long count = 0;
  for (const Shard& sh : shards_) {
    double smean = 0.0, sm2 = 0.0;
    const long n = static_cast<long>(sh.constant.size());
    for (long i = 0; i < n; ++i) {
      double val = sh.constant[i] + tau * sh.linear[i] + tau * tau * quadratic_;
      const double* mags = sh.magnitudes.data() + i * width_;
      for (int j = 0; j < width_; ++j) {
        const double e = mags[j] - tau;
        if (e > 0.0) val += e * e;
      }
      const double delta = val - smean;
      smean += delta / static_cast<double>(i + 1);
      sm2 += delta * (val - smean);
    }
    const long total = count + n;
    const double delta = smean - mean;
    mean += delta * static_cast<double>(n) / static_cast<double>(total);
    m2 += sm2 + delta * delta * static_cast<double>(count) * static_cast<double>(n) / static_cast<double>(total);
    count = total;
  }
  McEstimate est;
  est.mean = mean;
  est.samples = count;
  est.std_error = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
  return est;
}

McEstimate mc_dist2_subdiff(const SparseSignal& x, double tau, long samples, Rng& rng, int workers) {
  return Dist2Sampler(x, samples, rng.next_u64(), workers).evaluate(tau);
}

McEstimate mc_dist2_subdiff(const LowRankSignal& x, double tau, long samples, Rng& rng, int workers) {
  return Dist2Sampler(x, samples, rng.next_u64(), workers).evaluate(tau);
}

ThresholdResult minimize_mc_dist2(const Dist2Sampler& sampler, double tau_hi) {
  require(tau_hi > 0.0, "minimize_mc_dist2: tau_hi must be positive");
  auto argmin_on = [&](double lo, double hi, int points, std::vector<double>& taus, std::vector<double>& vals) {
    taus.resize(points);
    vals.resize(points);
    int best = 0;
    for (int k = 0; k < points; ++k) {
      taus[k] = lo + (hi - lo) * k / (points - 1);
      vals[k] = sampler.evaluate(taus[k]).mean;
      if (vals[k] < vals[best]) best = k;
    }
    return best;
  };
  std::vector<double> taus, vals;
  const int coarse_points = 41;
  const int k = argmin_on(0.0, tau_hi, coarse_points, taus, vals);
  const double step = tau_hi / (coarse_points - 1);
  const double lo = std::max(0.0, taus[k] - step);
  const double hi = std::min(tau_hi, taus[k] + step);
  const int j = argmin_on(lo, hi, 21, taus, vals);

  double tau_star = taus[j];
  if (j > 0 && j + 1 < static_cast<int>(taus.size())) {
    // Vertex of the parabola through the three points around the grid minimum.
    const double h = taus[j + 1] - taus[j];
    const double curv = vals[j + 1] - 2.0 * vals[j] + vals[j - 1];
    if (curv > 0.0) tau_star = taus[j] - 0.5 * h * (vals[j + 1] - vals[j - 1]) / curv;
  }
  McEstimate best = sampler.evaluate(tau_star);
  if (vals[j] < best.mean) {
    tau_star = taus[j];
    best = sampler.evaluate(tau_star);
  }
  ThresholdResult r;
  r.value = best.mean;
  r.tau_star = tau_star;
  r.method = ThresholdMethod::monte_carlo;
  r.error_estimate = best.std_error;
  return r;
}

}  // namespace pocs
