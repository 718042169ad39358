#include "pocs/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace pocs {

namespace {

constexpr std::size_t kMaxKsSamples = 200000;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ostream& os, double d) { put_u64(os, std::bit_cast<std::uint64_t>(d)); }

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("binary matrix: truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

void expect_magic(std::istream& is, const char (&magic)[8]) {
  char buf[8];
  if (!is.read(buf, 8) || std::memcmp(buf, magic, 8) != 0)
    throw std::runtime_error("binary matrix: bad magic");
}

}  // namespace

ComplexSensingMatrix sample_phi(int m, int n, Rng& rng) {
  if (m < 1 || n < 1) throw std::invalid_argument("sample_phi: dimensions must be positive");
  ComplexSensingMatrix phi;
  phi.seed = rng.seed();
  phi.entries.resize(m, n);
  // Row-major fill so a prefix of rows does not depend on m.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      phi.entries(i, j) = {re, im};
    }
  return phi;
}

Eigen::VectorXcd apply(const ComplexSensingMatrix& phi, const Eigen::VectorXd& x) {
  if (x.size() != phi.cols()) throw std::invalid_argument("apply: signal length must equal n");
  Eigen::VectorXcd w(phi.rows());
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      re += phi.entries(i, j).real() * x(j);
      im += phi.entries(i, j).imag() * x(j);
    }
    w(i) = {re, im};
  }
  return w;
}

std::complex<double> complex_sign(std::complex<double> c) {
  const double mod = std::hypot(c.real(), c.imag());
  if (mod == 0.0) return {1.0, 0.0};
  return {c.real() / mod, c.imag() / mod};
}

PhaseVector phases(const ComplexSensingMatrix& phi, const Eigen::VectorXd& x) {
  const Eigen::VectorXcd w = apply(phi, x);
  PhaseVector out;
  out.z.resize(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) out.z(i) = complex_sign(w(i));
  return out;
}

LinearizedSystem build_linearized(const ComplexSensingMatrix& phi, const PhaseVector& z) {
  const Eigen::Index m = phi.rows();
  const Eigen::Index n = phi.cols();
  if (z.size() != m) throw std::invalid_argument("build_linearized: phase count must equal m");
  LinearizedSystem sys;
  sys.matrix.resize(m + 1, n);
  sys.rhs = Eigen::VectorXd::Zero(m + 1);
  sys.rhs(0) = 1.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index j = 0; j < n; ++j) {
    double top = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      // conj(z_i) * phi_ij = (zr*pr + zi*pi) + i (zr*pi - zi*pr)
      const double zr = z.z(i).real(), zi = z.z(i).imag();
      const double pr = phi.entries(i, j).real(), pi = phi.entries(i, j).imag();
      top += zr * pr + zi * pi;
      sys.matrix(i + 1, j) = inv_sqrt_m * (zr * pi - zi * pr);
    }
    sys.matrix(0, j) = inv_m * top;
  }
  return sys;
}

Eigen::MatrixXd householder_px(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 1) throw std::invalid_argument("householder_px: empty vector");
  if (std::abs(x.norm() - 1.0) > 1e-10) throw std::invalid_argument("householder_px: x must be a unit vector");
  Eigen::VectorXd v = x;
  v(0) -= 1.0;
  const double vv = v.squaredNorm();
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  if (std::sqrt(vv) < 1e-14) return p;
  p.noalias() -= (2.0 / vv) * v * v.transpose();
  return p;
}

DiagnosticReport near_gaussianity_diagnostics(int n, int m, int trials, Rng& rng) {
  if (n < 2 || m < 1) throw std::invalid_argument("diagnostics: need n >= 2 and m >= 1");
  if (trials < 100) throw std::invalid_argument("diagnostics: need at least 100 trials");
  DiagnosticReport rep;
  rep.n = n;
  rep.m = m;
  rep.trials = trials;
  const double md = static_cast<double>(m);
  rep.l_mean_expected = std::sqrt(std::numbers::pi / 2.0);
  rep.l_variance_expected = (2.0 - std::numbers::pi / 2.0) / md;
  rep.variance_expected = 1.0 / md;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(0) = 1.0;
  const Eigen::MatrixXd px = householder_px(x);
  const int probe_row = std::min(5, m);
  const int probe_col = std::min(3, n - 1);

  double l_sum = 0.0, l_sq = 0.0, probe_sum = 0.0, probe_sq = 0.0;
  double pooled_sum = 0.0, pooled_sq = 0.0;
  std::size_t pooled_count = 0;
  std::vector<double> ks;
  ks.reserve(std::min<std::size_t>(kMaxKsSamples, static_cast<std::size_t>(trials) * (m + 1) * (n - 1)));
  const double eps = std::numeric_limits<double>::epsilon();

  for (int t = 0; t < trials; ++t) {
    const ComplexSensingMatrix phi = sample_phi(m, n, rng);
    const LinearizedSystem sys = build_linearized(phi, phases(phi, x));
    const Eigen::MatrixXd rotated = sys.matrix * px.transpose();

    double worst = 0.0;
    double scale = 0.0;
    for (int i = 1; i <= m; ++i) {
      worst = std::max(worst, std::abs(rotated(i, 0)));
      scale = std::max(scale, std::abs(phi.entries(i - 1, 0)));
    }
    rep.max_abs_zero_block = std::max(rep.max_abs_zero_block, worst);
    if (worst <= 4.0 * eps * scale / std::sqrt(md)) ++rep.zero_block_trials;

    const double l = rotated(0, 0);
    l_sum += l;
    l_sq += l * l;
    const double probe = rotated(probe_row, probe_col);
    probe_sum += probe;
    probe_sq += probe * probe;
    for (int j = 1; j < n; ++j)
      for (int i = 0; i <= m; ++i) {
        const double v = rotated(i, j);
        pooled_sum += v;
        pooled_sq += v * v;
        ++pooled_count;
        if (ks.size() < kMaxKsSamples) ks.push_back(v * std::sqrt(md));
      }
  }

  const double tn = static_cast<double>(trials);
  rep.l_mean = l_sum / tn;
  rep.l_variance = (l_sq - tn * rep.l_mean * rep.l_mean) / (tn - 1.0);
  const double probe_mean = probe_sum / tn;
  rep.probe_variance = (probe_sq - tn * probe_mean * probe_mean) / (tn - 1.0);
  const double pc = static_cast<double>(pooled_count);
  const double pooled_mean = pooled_sum / pc;
  rep.pooled_variance = (pooled_sq - pc * pooled_mean * pooled_mean) / (pc - 1.0);

  std::sort(ks.begin(), ks.end());
  const double k = static_cast<double>(ks.size());
  double d = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double f = std_normal_cdf(ks[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / k - f, f - static_cast<double>(i) / k});
  }
  rep.ks_distance = d;
  rep.ks_samples = ks.size();
  return rep;
}

void write_csv(std::ostream& os, const Eigen::MatrixXd& a) {
  char buf[64];
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      if (j) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

void write_binary(std::ostream& os, const Eigen::MatrixXd& a) {
  os.write(kRealMagic, 8);
  put_u64(os, static_cast<std::uint64_t>(a.rows()));
  put_u64(os, static_cast<std::uint64_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) put_f64(os, a(i, j));
}

void write_binary(std::ostream& os, const ComplexSensingMatrix& phi) {
  os.write(kComplexMagic, 8);
  put_u64(os, static_cast<std::uint64_t>(phi.rows()));
  put_u64(os, static_cast<std::uint64_t>(phi.cols()));
  for (Eigen::Index i = 0; i < phi.rows(); ++i)
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      put_f64(os, phi.entries(i, j).real());
      put_f64(os, phi.entries(i, j).imag());
    }
}

Eigen::MatrixXd read_binary_real(std::istream& is) {
  expect_magic(is, kRealMagic);
  const auto rows = static_cast<Eigen::Index>(get_u64(is));
  const auto cols = static_cast<Eigen::Index>(get_u64(is));
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = get_f64(is);
  return a;
}

ComplexSensingMatrix read_binary_complex(std::istream& is) {
  expect_magic(is, kComplexMagic);
  const auto rows = static_cast<Eigen::Index>(get_u64(is));
  const auto cols = static_cast<Eigen::Index>(get_u64(is));
  ComplexSensingMatrix phi;
  phi.entries.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = get_f64(is);
      const double im = get_f64(is);
      phi.entries(i, j) = {re, im};
    }
  return phi;
}

}  // namespace pocs
