#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pocs/measurement.hpp"
#include "pocs/signals.hpp"

using namespace pocs;

namespace {

ComplexSensingMatrix from_entries(Eigen::MatrixXcd e) {
  ComplexSensingMatrix phi;
  phi.entries = std::move(e);
  return phi;
}

}  // namespace

TEST(Measurement, SamplePhiUsesSeededStream) {
  Rng a(42), b(42);
  const ComplexSensingMatrix phi = sample_phi(1, 1, a);
  const double re = b.normal(), im = b.normal();
  EXPECT_EQ(phi.entries(0, 0).real(), re);
  EXPECT_EQ(phi.entries(0, 0).imag(), im);
}

TEST(Measurement, SamplePhiMoments) {
  Rng rng(1);
  const ComplexSensingMatrix phi = sample_phi(100, 1000, rng);
  const double n = 1e5;
  EXPECT_NEAR(phi.entries.cwiseAbs2().sum() / n, 2.0, 0.02);
  EXPECT_NEAR(phi.entries.cwiseAbs().sum() / n, std::sqrt(std::numbers::pi / 2.0), 0.01);
}

TEST(Measurement, ComplexSign) {
  EXPECT_EQ(complex_sign({3.0, 4.0}), std::complex<double>(0.6, 0.8));
  EXPECT_EQ(complex_sign({0.0, 0.0}), std::complex<double>(1.0, 0.0));
}

TEST(Measurement, PhasesOfPositiveRealAreOnes) {
  Eigen::MatrixXcd e(3, 1);
  e << 1.0, 2.5, 0.1;
  const PhaseVector z = phases(from_entries(e), Eigen::VectorXd::Ones(1));
  for (int i = 0; i < 3; ++i) EXPECT_EQ(z.z(i), std::complex<double>(1.0, 0.0));
}

TEST(Measurement, PhasesOfZeroRowIsOne) {
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(1, 2);
  const PhaseVector z = phases(from_entries(e), Eigen::VectorXd::Ones(2));
  EXPECT_EQ(z.z(0), std::complex<double>(1.0, 0.0));
}

TEST(Measurement, TrivialLinearizedSystem) {
  Eigen::MatrixXcd e(1, 2);
  e << std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 0.0);
  const ComplexSensingMatrix phi = from_entries(e);
  const Eigen::VectorXd x = Eigen::VectorXd::Unit(2, 0);
  const LinearizedSystem sys = build_linearized(phi, phases(phi, x));
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0, 0, 0;
  EXPECT_EQ(sys.matrix, expected);
  EXPECT_EQ(sys.rhs, Eigen::VectorXd::Unit(2, 0));
}

TEST(Measurement, FeasiblePointMapsToE1) {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const int n = 30, m = 10 + t % 40;
    const SparseSignal s = make_sparse_with_l1(n, 4, 1.5, rng);
    const Eigen::VectorXd x = s.dense();
    const ComplexSensingMatrix phi = sample_phi(m, n, rng);
    const LinearizedSystem sys = build_linearized(phi, phases(phi, x));
    const Eigen::VectorXd star = (m / apply(phi, x).cwiseAbs().sum()) * x;
    EXPECT_LT((sys.matrix * star - sys.rhs).norm(), 1e-10);
  }
}

TEST(Measurement, ScalingLeavesSystemUnchanged) {
  Rng rng(22);
  const Eigen::VectorXd x = make_equal_amplitude_sparse(20, 3, rng).dense();
  const ComplexSensingMatrix phi = sample_phi(15, 20, rng);
  const LinearizedSystem a = build_linearized(phi, phases(phi, x));
  for (double lambda : {0.25, 2.0, 1024.0}) {
    const LinearizedSystem b = build_linearized(phi, phases(phi, lambda * x));
    EXPECT_EQ(a.matrix, b.matrix);
  }
}

TEST(Measurement, PhasesRotateWithRows) {
  Rng rng(23);
  const Eigen::VectorXd x = make_equal_amplitude_sparse(10, 2, rng).dense();
  const ComplexSensingMatrix phi = sample_phi(8, 10, rng);
  Eigen::VectorXcd w(8);
  for (int i = 0; i < 8; ++i) w(i) = std::polar(1.0, 0.3 + 0.7 * i);
  const ComplexSensingMatrix rotated = from_entries(w.asDiagonal() * phi.entries);
  const PhaseVector z = phases(phi, x), zr = phases(rotated, x);
  for (int i = 0; i < 8; ++i) EXPECT_LT(std::abs(zr.z(i) - w(i) * z.z(i)), 1e-12);
}

TEST(Measurement, HouseholderIdentityAtE1) {
  EXPECT_EQ(householder_px(Eigen::VectorXd::Unit(5, 0)), Eigen::MatrixXd::Identity(5, 5));
}

TEST(Measurement, HouseholderSwapsForE2) {
  const Eigen::VectorXd x = Eigen::VectorXd::Unit(4, 1);
  const Eigen::MatrixXd p = householder_px(x);
  EXPECT_LT((p * x - Eigen::VectorXd::Unit(4, 0)).norm(), 1e-15);
  EXPECT_LT((p.row(0).transpose() - x).norm(), 1e-15);
}

TEST(Measurement, HouseholderRandomUnit) {
  Rng rng(24);
  Eigen::VectorXd x(50);
  for (int i = 0; i < 50; ++i) x(i) = rng.normal();
  x.normalize();
  const Eigen::MatrixXd p = householder_px(x);
  EXPECT_LT((p * x - Eigen::VectorXd::Unit(50, 0)).norm(), 1e-12);
  EXPECT_LT((p * p.transpose() - Eigen::MatrixXd::Identity(50, 50)).norm(), 1e-12);
  EXPECT_LT((p - p.transpose()).norm(), 1e-15);
  EXPECT_LT((p * p - Eigen::MatrixXd::Identity(50, 50)).norm(), 1e-12);
}

TEST(Measurement, HouseholderRejectsNonUnit) {
  EXPECT_THROW(householder_px(Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST(Measurement, DiagnosticsMoments) {
  Rng rng(25);
  const int m = 100, trials = 10000;
  const DiagnosticReport r = near_gaussianity_diagnostics(8, m, trials, rng);
  EXPECT_EQ(r.zero_block_trials, trials);
  const double sd = std::sqrt((2.0 - std::numbers::pi / 2.0) / (m * static_cast<double>(trials)));
  EXPECT_NEAR(r.l_mean, std::sqrt(std::numbers::pi / 2.0), 3.0 * sd);
  EXPECT_NEAR(r.probe_variance, 0.01, 0.001);
  EXPECT_NEAR(r.pooled_variance, 0.01, 0.001);
  EXPECT_LT(r.ks_distance, 0.01);
}

TEST(Measurement, DiagnosticsNeedEnoughTrials) {
  Rng rng(1);
  EXPECT_THROW(near_gaussianity_diagnostics(8, 10, 99, rng), std::invalid_argument);
}

TEST(Measurement, BinaryRoundTrip) {
  Rng rng(26);
  const ComplexSensingMatrix phi = sample_phi(4, 3, rng);
  std::stringstream ss;
  write_binary(ss, phi);
  EXPECT_EQ(read_binary_complex(ss).entries, phi.entries);
  const LinearizedSystem sys = build_linearized(phi, phases(phi, Eigen::VectorXd::Unit(3, 0)));
  std::stringstream sr;
  write_binary(sr, sys.matrix);
  EXPECT_EQ(read_binary_real(sr), sys.matrix);
}

TEST(Measurement, CsvHasFullPrecision) {
  Eigen::MatrixXd a(1, 2);
  a << 0.1, 1.0 / 3.0;
  std::stringstream ss;
  write_csv(ss, a);
  double u = 0, v = 0;
  char comma;
  ss >> u >> comma >> v;
  EXPECT_EQ(u, 0.1);
  EXPECT_EQ(v, 1.0 / 3.0);
}
