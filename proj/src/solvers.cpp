#include "pocs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>

namespace pocs {

namespace {

constexpr int kRhoUpdatePeriod = 10;
constexpr int kPolishPeriod = 25;
constexpr double kCertificateSlack = 1e-9;
constexpr int kPruneRounds = 4;
constexpr std::size_t kEnterCandidates = 8;
constexpr double kPruneFloor = 1e-10;
constexpr double kBalanceRatio = 10.0;
constexpr double kRhoFactor = 2.0;

// Affine projection onto {u : M u = b}. M^T Pi = Q R is a rank-revealing QR of
// M^T (so R^T R factors the permuted M M^T). The projection is
//   P(v) = u0 + v - Q1 Q1^T v
// where u0 is the minimum-norm feasible point.
class AffineProjector {
 public:
  AffineProjector(const Eigen::MatrixXd& m_in, const Eigen::VectorXd& b_in) {
    if (m_in.rows() != b_in.size()) throw std::invalid_argument("basis pursuit: M rows must match b");
    if (m_in.cols() < 1) throw std::invalid_argument("basis pursuit: empty variable");
    // Drop all-zero rows; their right-hand side must vanish.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m_in.rows(); ++i) {
      if (m_in.row(i).cwiseAbs().maxCoeff() > 0.0) {
        keep.push_back(i);
      } else if (b_in(i) != 0.0) {
        throw InfeasibleError("basis pursuit: zero constraint row with nonzero right-hand side");
      }
    }
    const Eigen::Index n = m_in.cols();
    u0_ = Eigen::VectorXd::Zero(n);
    if (keep.empty()) {
      q1_.resize(n, 0);
      return;
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(keep.size()), n);
    Eigen::VectorXd b(m.rows());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      m.row(static_cast<Eigen::Index>(k)) = m_in.row(keep[k]);
      b(static_cast<Eigen::Index>(k)) = b_in(keep[k]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.transpose());
    const Eigen::Index rank = qr.rank();
    q1_ = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
    // Pi^T M = R^T Q^T, so the first `rank` rows give R11^T (Q1^T u) = (Pi^T b)_{0:rank}.
    const Eigen::VectorXd pb = qr.colsPermutation().transpose() * b;
    const Eigen::VectorXd c = qr.matrixR()
                                  .topLeftCorner(rank, rank)
                                  .triangularView<Eigen::Upper>()
                                  .transpose()
                                  .solve(pb.head(rank));
    u0_ = q1_ * c;
    const double res = (m * u0_ - b).norm();
    if (res > 1e-6 * (1.0 + b.norm()))
      throw InfeasibleError("basis pursuit: constraints are inconsistent (residual " + std::to_string(res) + ")");
  }

  void project(const Eigen::VectorXd& v, Eigen::VectorXd& out, Eigen::VectorXd& work) const {
    work.noalias() = q1_.transpose() * v;
    out = u0_ + v;
    out.noalias() -= q1_ * work;
  }

 private:
  Eigen::MatrixXd q1_;
  Eigen::VectorXd u0_;
};

// Active-set refinement for l1 basis pursuit. With S the support of the
// shrunk iterate and sigma its signs, solve M_S u_S = b and look for a dual
// certificate v = M^T lambda with v_S = sigma and |v_i| <= 1 off S, starting
// from the ADMM multiplier. Returns u only when both checks pass.
class L1Polisher {
 public:
  L1Polisher(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, double feas_tol)
      : m_(m), b_(b), feas_tol_(feas_tol), mt_qr_(m.transpose()) {}

  // Candidate supports: the nonzeros of the shrunk iterate z, then the
  // rank(M) largest entries of the projected iterate x.
  std::optional<Eigen::VectorXd> operator()(const Eigen::VectorXd& z, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& y) const {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      if (z(i) != 0.0) support.push_back(i);
    if (auto u = try_support(support, z, y)) return u;
    const Eigen::Index k = std::min<Eigen::Index>(mt_qr_.rank(), x.size());
    if (!support.empty() && static_cast<Eigen::Index>(support.size()) < k) {
      // One entry short of a vertex: price the missing column by the dual
      // estimate |M^T lambda| and try the best few.
      const Eigen::VectorXd v = m_.transpose() * mt_qr_.solve(y);
      std::vector<Eigen::Index> outside;
      for (Eigen::Index i = 0; i < z.size(); ++i)
        if (z(i) == 0.0) outside.push_back(i);
      const auto tries = std::min<std::size_t>(kEnterCandidates, outside.size());
      std::partial_sort(outside.begin(), outside.begin() + static_cast<std::ptrdiff_t>(tries), outside.end(),
                        [&v](Eigen::Index a, Eigen::Index b) { return std::abs(v(a)) > std::abs(v(b)); });
      Eigen::VectorXd ref = z;
      for (std::size_t t = 0; t < tries; ++t) {
        const Eigen::Index j = outside[t];
        if (v(j) == 0.0) break;
        std::vector<Eigen::Index> grown = support;
        grown.insert(std::upper_bound(grown.begin(), grown.end(), j), j);
        ref(j) = v(j);
        if (auto u = try_support(grown, ref, y)) return u;
        ref(j) = 0.0;
      }
    }
    if (static_cast<Eigen::Index>(support.size()) == k) return std::nullopt;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&x](Eigen::Index a, Eigen::Index b) { return std::abs(x(a)) > std::abs(x(b)); });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return try_support(order, x, y);
  }

 private:
  std::optional<Eigen::VectorXd> try_support(std::vector<Eigen::Index> support, const Eigen::VectorXd& ref,
                                             const Eigen::VectorXd& y) const {
    for (Eigen::Index i : support)
      if (ref(i) == 0.0) return std::nullopt;
    // Entries that come out of the restricted solve with vanishing magnitude
    // or the wrong sign are dropped and the solve repeated.
    Eigen::MatrixXd ms;
    Eigen::VectorXd us, sigma;
    for (int round = 0;; ++round) {
      const auto s = static_cast<Eigen::Index>(support.size());
      if (s == 0 || s > m_.rows() || round > kPruneRounds) return std::nullopt;
      ms.resize(m_.rows(), s);
      sigma.resize(s);
      for (Eigen::Index k = 0; k < s; ++k) {
        ms.col(k) = m_.col(support[k]);
        sigma(k) = ref(support[k]) > 0.0 ? 1.0 : -1.0;
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ms);
      if (qr.rank() < s) return std::nullopt;
      us = qr.solve(b_);
      if ((ms * us - b_).norm() > feas_tol_) return std::nullopt;
      const double floor = kPruneFloor * us.lpNorm<Eigen::Infinity>();
      std::vector<Eigen::Index> kept;
      for (Eigen::Index k = 0; k < s; ++k)
        if (us(k) * sigma(k) > floor) kept.push_back(support[k]);
      if (static_cast<Eigen::Index>(kept.size()) == s) break;
      support = std::move(kept);
    }
    const auto s = static_cast<Eigen::Index>(support.size());

    // lambda closest to the multiplier estimate subject to M_S^T lambda = sigma.
    Eigen::VectorXd lambda = mt_qr_.solve(y);
    const Eigen::VectorXd gap = ms.transpose() * lambda - sigma;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ms.transpose());
    lambda -= cod.solve(gap);
    const Eigen::VectorXd v = m_.transpose() * lambda;
    for (Eigen::Index k = 0; k < s; ++k)
      if (std::abs(v(support[k]) - sigma(k)) > 1e-8) return std::nullopt;
    if (v.cwiseAbs().maxCoeff() > 1.0 + kCertificateSlack) return std::nullopt;

    Eigen::VectorXd u = Eigen::VectorXd::Zero(ref.size());
    for (Eigen::Index k = 0; k < s; ++k) u(support[k]) = us(k);
    return u;
  }

  const Eigen::MatrixXd& m_;
  const Eigen::VectorXd& b_;
  double feas_tol_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> mt_qr_;
};

template <class Shrink, class Norm, class Polish>
SolveResult admm_basis_pursuit(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                               const SolveOptions& opts, const TraceSink& trace, Shrink shrink,
                               Norm norm, Polish polish, double default_rho) {
  opts.validate();
  const AffineProjector proj(m, b);
  const Eigen::Index n = m.cols();
  double rho = opts.rho > 0.0 ? opts.rho : default_rho;
  const double alpha = opts.alpha;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z_old(n), x_hat(n), work;

  SolveResult res;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    proj.project(z - w, x, work);
    x_hat = alpha * x + (1.0 - alpha) * z;
    z_old.swap(z);
    z = shrink(x_hat + w, 1.0 / rho);
    w += x_hat - z;

    const double r_norm = (x - z).norm();
    const double s_norm = rho * (z - z_old).norm();
    const double eps_pri = sqrt_n * opts.absolute_tolerance +
                           opts.relative_tolerance * std::max(x.norm(), z.norm());
    const double eps_dual = sqrt_n * opts.absolute_tolerance + opts.relative_tolerance * rho * w.norm();
    res.iterations = it;
    res.primal_residual = r_norm;
    res.dual_residual = s_norm;
    if (trace) trace({it, r_norm, s_norm, norm(x)});
    if (r_norm <= eps_pri && s_norm <= eps_dual) {
      res.converged = true;
      break;
    }
    if (opts.polish && (it % kPolishPeriod == 0 || it == opts.max_iterations)) {
      if (auto u = polish(z, x, Eigen::VectorXd(rho * w))) {
        x = std::move(*u);
        res.converged = true;
        res.polished = true;
        break;
      }
    }
    if (opts.adaptive_rho && it % kRhoUpdatePeriod == 0) {
      // Residual balancing; the scaled dual w = y / rho is rescaled to keep y fixed.
      if (r_norm > kBalanceRatio * s_norm) {
        rho *= kRhoFactor;
        w /= kRhoFactor;
      } else if (s_norm > kBalanceRatio * r_norm) {
        rho /= kRhoFactor;
        w *= kRhoFactor;
      }
    }
  }
  res.solution = std::move(x);
  res.objective = norm(res.solution);
  res.constraint_residual = (m * res.solution - b).norm();
  return res;
}

}  // namespace

void SolveOptions::validate() const {
  if (!(rho >= 0.0)) throw std::invalid_argument("SolveOptions: rho must be nonnegative");
  if (!(absolute_tolerance > 0.0) || !(relative_tolerance > 0.0))
    throw std::invalid_argument("SolveOptions: tolerances must be positive");
  if (max_iterations < 1) throw std::invalid_argument("SolveOptions: max_iterations must be >= 1");
  if (!(alpha >= 1.0 && alpha <= 1.9)) throw std::invalid_argument("SolveOptions: alpha must lie in [1, 1.9]");
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

Eigen::VectorXd singular_value_threshold(const Eigen::VectorXd& v, int p, int q, double t) {
  const Eigen::Map<const Eigen::MatrixXd> a(v.data(), p, q);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = (svd.singularValues().array() - t).max(0.0).matrix();
  Eigen::Index keep = 0;
  while (keep < s.size() && s(keep) > 0.0) ++keep;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  if (keep == 0) return out;
  Eigen::Map<Eigen::MatrixXd> o(out.data(), p, q);
  o.noalias() = svd.matrixU().leftCols(keep) * s.head(keep).asDiagonal() *
                svd.matrixV().leftCols(keep).transpose();
  return out;
}

double nuclear_norm(const Eigen::MatrixXd& a) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues().sum();
}

SolveResult basis_pursuit_l1(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                             const SolveOptions& opts, const TraceSink& trace) {
  const L1Polisher polisher(m, b, opts.absolute_tolerance * (1.0 + b.norm()));
  return admm_basis_pursuit(
      m, b, opts, trace, [](const Eigen::VectorXd& v, double t) { return soft_threshold(v, t); },
      [](const Eigen::VectorXd& v) { return v.lpNorm<1>(); }, polisher, kDefaultRhoL1);
}

SolveResult basis_pursuit_nuclear(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, int p, int q,
                                  const SolveOptions& opts, const TraceSink& trace) {
  if (p < 1 || q < 1 || m.cols() != static_cast<Eigen::Index>(p) * q)
    throw std::invalid_argument("basis_pursuit_nuclear: operator width must equal p*q");
  return admm_basis_pursuit(
      m, b, opts, trace,
      [p, q](const Eigen::VectorXd& v, double t) { return singular_value_threshold(v, p, q, t); },
      [p, q](const Eigen::VectorXd& v) {
        return nuclear_norm(Eigen::Map<const Eigen::MatrixXd>(v.data(), p, q));
      },
      [](const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return std::optional<Eigen::VectorXd>{};
      },
      kDefaultRhoNuclear);
}

SolveResult basis_pursuit_nuclear(const std::vector<Eigen::MatrixXd>& measure,
                                  const Eigen::VectorXd& b, int p, int q, const SolveOptions& opts,
                                  const TraceSink& trace) {
  if (measure.empty()) throw std::invalid_argument("basis_pursuit_nuclear: need at least one measurement");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(measure.size()), static_cast<Eigen::Index>(p) * q);
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (measure[i].rows() != p || measure[i].cols() != q)
      throw std::invalid_argument("basis_pursuit_nuclear: measurement matrices must be p x q");
    m.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(measure[i].data(), p * q);
  }
  return basis_pursuit_nuclear(m, b, p, q, opts, trace);
}

namespace {

SolveResult solve_for_shape(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                            const SignalShape& shape, const SolveOptions& opts) {
  if (m.cols() != shape.n) throw std::invalid_argument("recovery: operator width does not match signal shape");
  if (shape.norm == NormKind::l1) return basis_pursuit_l1(m, b, opts);
  return basis_pursuit_nuclear(m, b, shape.p, shape.q, opts);
}

RecoveryOutcome to_outcome(SolveResult&& r) {
  RecoveryOutcome out;
  out.raw = std::move(r.solution);
  out.iterations = r.iterations;
  out.primal_residual = r.primal_residual;
  out.dual_residual = r.dual_residual;
  out.converged = r.converged;
  return out;
}

}  // namespace

RecoveryOutcome recover_pocs(const ComplexSensingMatrix& phi, const SignalShape& shape,
                             const PhaseVector& z, const SolveOptions& opts) {
  if (z.size() != phi.rows()) throw std::invalid_argument("recover_pocs: phase count must equal rows of Phi");
  const LinearizedSystem sys = build_linearized(phi, z);
  RecoveryOutcome out = to_outcome(solve_for_shape(sys.matrix, sys.rhs, shape, opts));
  const double nrm = out.raw.norm();
  if (nrm == 0.0) throw DegenerateSolutionError("recover_pocs: zero solution cannot be normalized");
  out.estimate = out.raw / nrm;
  return out;
}

RecoveryOutcome recover_linear_cs(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                  const SignalShape& shape, const SolveOptions& opts) {
  RecoveryOutcome out = to_outcome(solve_for_shape(a, y, shape, opts));
  out.estimate = out.raw;
  return out;
}

TraceSink csv_trace(std::ostream& os) {
  os << "iteration,primal_residual,dual_residual,objective\n";
  return [&os](const IterationRecord& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.iteration, r.primal_residual,
                  r.dual_residual, r.objective);
    os << buf;
  };
}

}  // namespace pocs
