#ifndef POCS_MEASUREMENT_HPP
#define POCS_MEASUREMENT_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pocs/rng.hpp"

namespace pocs {

// m x n complex Gaussian sensing matrix; real and imaginary parts are
// independent N(0, 1). Eigen stores std::complex<double> as interleaved
// (re, im) pairs.
struct ComplexSensingMatrix {
  Eigen::MatrixXcd entries;
  std::uint64_t seed = 0;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

// Unit-modulus phases sign(Phi x).
struct PhaseVector {
  Eigen::VectorXcd z;

  Eigen::Index size() const { return z.size(); }
};

// Real (m+1) x n system A_z u = e1.
struct LinearizedSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

ComplexSensingMatrix sample_phi(int m, int n, Rng& rng);

// Phi x, each entry accumulated explicitly in (re, im).
Eigen::VectorXcd apply(const ComplexSensingMatrix& phi, const Eigen::VectorXd& x);

// sign(c) = c/|c| with sign(0) = 1.
std::complex<double> complex_sign(std::complex<double> c);

PhaseVector phases(const ComplexSensingMatrix& phi, const Eigen::VectorXd& x);

// Row 0 = (1/m) Re(z^* Phi); rows 1..m = (1/sqrt m) Im(diag(z^*) Phi).
LinearizedSystem build_linearized(const ComplexSensingMatrix& phi, const PhaseVector& z);

// Householder reflection P = I - 2 v v^T / |v|^2, v = x - e1. Row 0 of P is
// x^T and P x = e1. Requires |x|_2 = 1 within 1e-10.
Eigen::MatrixXd householder_px(const Eigen::VectorXd& x);

struct DiagnosticReport {
  int n = 0;
  int m = 0;
  int trials = 0;
  // Largest |entry| over rows 1..m of column 0 of A_z P_x^T, all trials.
  double max_abs_zero_block = 0.0;
  // Trials whose column-0 lower block is zero up to rounding of the phase
  // computation (a few ulps of the row scale).
  int zero_block_trials = 0;
  // Entry (0, 0) against L = mean of |N + iN| samples.
  double l_mean = 0.0;
  double l_variance = 0.0;
  double l_mean_expected = 0.0;
  double l_variance_expected = 0.0;
  // Entry (5, 3) (clamped into range) against N(0, 1/m).
  double probe_variance = 0.0;
  // Pooled variance of all entries in columns 1..n-1.
  double pooled_variance = 0.0;
  double variance_expected = 0.0;
  // Kolmogorov-Smirnov distance of sqrt(m) * (columns 1..n-1) from N(0, 1),
  // pooled over trials, and its sample size.
  double ks_distance = 0.0;
  std::size_t ks_samples = 0;
};

DiagnosticReport near_gaussianity_diagnostics(int n, int m, int trials, Rng& rng);

// Real matrix export: CSV with 17 significant digits, row-major.
void write_csv(std::ostream& os, const Eigen::MatrixXd& a);
// Binary layout: 8-byte magic, u64 rows, u64 cols, then row-major
// little-endian doubles. Complex matrices store (re, im) per entry.
void write_binary(std::ostream& os, const Eigen::MatrixXd& a);
void write_binary(std::ostream& os, const ComplexSensingMatrix& phi);
Eigen::MatrixXd read_binary_real(std::istream& is);
ComplexSensingMatrix read_binary_complex(std::istream& is);

inline constexpr char kRealMagic[8] = {'P', 'O', 'C', 'S', 'R', 'M', 'A', '1'};
inline constexpr char kComplexMagic[8] = {'P', 'O', 'C', 'S', 'C', 'M', 'A', '1'};

}  // namespace pocs

#endif  // POCS_MEASUREMENT_HPP
