#ifndef POCS_SOLVERS_HPP
#define POCS_SOLVERS_HPP

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "pocs/measurement.hpp"

namespace pocs {

inline constexpr double kDefaultRhoL1 = 10.0;
inline constexpr double kDefaultRhoNuclear = 100.0;

struct SolveOptions {
  // Augmented Lagrangian penalty; 0 selects kDefaultRhoL1 / kDefaultRhoNuclear.
  double rho = 0.0;
  double absolute_tolerance = 1e-9;
  double relative_tolerance = 1e-7;
  int max_iterations = 20000;
  // Over-relaxation, in [1, 1.9].
  double alpha = 1.6;
  // Residual balancing of rho (starting from `rho`).
  bool adaptive_rho = false;
  // l1 only: periodically try an active-set solve certified by KKT conditions.
  bool polish = true;

  void validate() const;
};

struct IterationRecord {
  int iteration;
  double primal_residual;
  double dual_residual;
  double objective;
};

struct SolveResult {
  Eigen::VectorXd solution;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // Constraint residual |M u - b|_2 of the returned solution.
  double constraint_residual = 0.0;
  bool converged = false;
  // True when the returned point came from the certified active-set solve.
  bool polished = false;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using TraceSink = std::function<void(const IterationRecord&)>;

// min |u|_1  s.t.  M u = b.
SolveResult basis_pursuit_l1(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                             const SolveOptions& opts = {}, const TraceSink& trace = {});

// min |U|_nu  s.t.  <A_i, U> = b_i. `m` holds vec(A_i)^T (column-major) in row i.
SolveResult basis_pursuit_nuclear(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, int p, int q,
                                  const SolveOptions& opts = {}, const TraceSink& trace = {});

// Same problem with the measurement operator given as matrices A_i.
SolveResult basis_pursuit_nuclear(const std::vector<Eigen::MatrixXd>& measure,
                                  const Eigen::VectorXd& b, int p, int q,
                                  const SolveOptions& opts = {}, const TraceSink& trace = {});

// Elementwise soft threshold.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);

// Singular value soft threshold of the column-major p x q matrix stored in v.
Eigen::VectorXd singular_value_threshold(const Eigen::VectorXd& v, int p, int q, double t);

double nuclear_norm(const Eigen::MatrixXd& a);

enum class NormKind { l1, nuclear };

struct SignalShape {
  NormKind norm = NormKind::l1;
  // Vector length for l1; rows/cols for nuclear (n = p * q).
  int n = 0;
  int p = 0;
  int q = 0;

  static SignalShape vector(int n) { return {NormKind::l1, n, 0, 0}; }
  static SignalShape matrix(int p, int q) { return {NormKind::nuclear, p * q, p, q}; }
};

struct RecoveryOutcome {
  // Unit-norm estimate (vectorized column-major for matrices).
  Eigen::VectorXd estimate;
  // Raw basis pursuit solution.
  Eigen::VectorXd raw;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
};

// Solve min f(u) s.t. A_z u = e1 and normalize.
RecoveryOutcome recover_pocs(const ComplexSensingMatrix& phi, const SignalShape& shape,
                             const PhaseVector& z, const SolveOptions& opts = {});

// Solve min f(u) s.t. A u = y (no normalization).
RecoveryOutcome recover_linear_cs(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                  const SignalShape& shape, const SolveOptions& opts = {});

// CSV trace writer: iteration,primal_residual,dual_residual,objective
TraceSink csv_trace(std::ostream& os);

}  // namespace pocs

#endif  // POCS_SOLVERS_HPP
