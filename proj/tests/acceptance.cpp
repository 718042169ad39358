#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pocs/experiments.hpp"
#include "pocs/measurement.hpp"
#include "pocs/signals.hpp"
#include "pocs/thresholds.hpp"

using namespace pocs;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

ExperimentConfig sparse_sweep(int n, std::vector<double> values, int trials) {
  ExperimentConfig c;
  c.problem = Problem::sparse;
  c.n = n;
  c.parameter = RowParameter::sparsity;
  c.values = std::move(values);
  c.trials = trials;
  c.seed = kDefaultSeed;
  return c;
}

// Rows ordered by increasing norm: each m50 must not exceed its predecessor
// unless the two confidence intervals overlap.
void check_monotone(Outcome& o, const SweepResult& r) {
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const LogisticFit& f = r.rows[i].fit;
    o.check(std::isfinite(f.m50), fmt("norm %.4g: m50 %.2f", r.rows[i].row.norm, f.m50) +
                                      fmt(" [%.2f, %.2f]", f.m50_lo, f.m50_hi));
    if (i == 0) continue;
    const LogisticFit& p = r.rows[i - 1].fit;
    o.check(f.m50 <= p.m50 || f.m50_lo <= p.m50_hi, fmt("step %.4g -> %.4g ok", r.rows[i - 1].row.norm, r.rows[i].row.norm));
  }
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const double a = ratio_sp(1e-3, 1.0), b = ratio_sp(1e-3, 0.6);
  const double c = ratio_lr(1e-3, 1.0, 1.0), d = ratio_lr(1e-3, 1.0, 0.6);
  o.check(std::abs(a - 0.678) <= 0.02, fmt("R_sp(1e-3,1) = %.4f (target 0.678)", a));
  o.check(std::abs(b - 0.808) <= 0.02, fmt("R_sp(1e-3,0.6) = %.4f (target 0.808)", b));
  o.check(std::abs(c - 0.758) <= 0.02, fmt("R_lr(1e-3,1,1) = %.4f (target 0.758)", c));
  o.check(std::abs(d - 0.856) <= 0.02, fmt("R_lr(1e-3,1,0.6) = %.4f (target 0.856)", d));
  const double t = seconds_since(t0);
  o.check(t < 5.0, fmt("%.3f s < 5 s", t));
  return o;
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const double r = zeta_hat_po_sparse(1000, 1, 1.0).value / zeta_ln_sparse(1000, 1).value;
  o.check(r < 0.75, fmt("ratio %.5f < 0.75", r));
  const double t = seconds_since(t0);
  o.check(t < 1.0, fmt("%.3f s < 1 s", t));
  return o;
}

Outcome criterion3() {
  Outcome o;
  double worst_sp = -1e300, worst_lr = -1e300;
  int count_sp = 0, count_lr = 0;
  for (int i = 0; i < 20; ++i) {
    const double u = std::pow(10.0, -3.0 + 3.0 * i / 19.0) * (i == 19 ? 0.999 : 1.0);
    const double base = psi1(u).value;
    for (double v : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      worst_sp = std::max(worst_sp, psi(u, v).value - base);
      ++count_sp;
    }
  }
  for (int i = 0; i < 10; ++i) {
    const double rho = 0.005 + 0.09 * i;
    for (double nu : {0.3, 0.6, 1.0}) {
      const double base = psi_lr1(rho, nu).value;
      for (double mu : {0.2, 0.6, 1.0}) {
        worst_lr = std::max(worst_lr, psi_lr(rho, nu, mu).value - base);
        ++count_lr;
      }
    }
  }
  o.check(worst_sp <= 1e-9, fmt("max psi - psi1 = %.3g over %.0f points", worst_sp, count_sp));
  o.check(worst_lr <= 1e-9, fmt("max Psi - Psi1 = %.3g over %.0f points", worst_lr, count_lr));
  return o;
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  double worst = 0.0;
  for (int k = 0; k <= 50; ++k) {
    const double tau = 0.1 * k;
    worst = std::max(worst, std::abs(shrink_second_moment(tau) - oracle::shrink_second_moment(tau)));
  }
  o.check(worst < 1e-10, fmt("shrink moment max diff %.2g", worst));
  double mass = 0.0, moment = 0.0, oracle_mass = 0.0;
  for (double y : {0.1, 0.25, 0.5, 1.0}) {
    const MPParams mp = MPParams::from_ratio(y);
    mass = std::max(mass, std::abs(mp_mass(mp) - 1.0));
    moment = std::max(moment, std::abs(mp_moment(mp, 0.0) - 1.0));
    oracle_mass = std::max(
        oracle_mass,
        std::abs(oracle::integrate([y](double b) { return oracle::mp_density(y, b); }, mp.a_minus, mp.a_plus) -
                 1.0));
  }
  o.check(mass <= 1e-9, fmt("|int phi_y - 1| %.2g", mass));
  o.check(oracle_mass <= 1e-9, fmt("oracle |int phi_y - 1| %.2g", oracle_mass));
  o.check(moment <= 1e-8, fmt("|mp_moment(y,0) - 1| %.2g", moment));
  const double t = seconds_since(t0);
  o.check(t < 5.0, fmt("%.2f s < 5 s", t));
  return o;
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const long samples = 10000;
  for (double l1 : {std::sqrt(10.0), 2.0}) {
    Rng rng(derive_seed(kDefaultSeed, {5, static_cast<std::uint64_t>(l1 * 1000)}));
    const SparseSignal x = l1 == std::sqrt(10.0) ? make_equal_amplitude_sparse(200, 10, rng)
                                                 : make_sparse_with_l1(200, 10, l1, rng);
    const Dist2Sampler smp(x, samples, rng.next_u64());
    const ThresholdResult mc = minimize_mc_dist2(smp, 10.0);
    const double th = 200.0 * psi(10.0 / 200.0, std::min(1.0, l1 * l1 / 10.0)).value;
    const double z = std::abs(mc.value - th) / mc.error_estimate;
    o.check(z <= 3.0, fmt("l1 %.4f: MC %.3f vs %.3f", l1, mc.value, th) + fmt(" (%.2f SE)", z));
  }
  for (double nuc : {std::sqrt(2.0), 1.2}) {
    Rng rng(derive_seed(kDefaultSeed, {6, static_cast<std::uint64_t>(nuc * 1000)}));
    const LowRankSignal x = make_lowrank_with_nuclear(20, 20, 2, nuc, rng);
    const Dist2Sampler smp(x, samples, rng.next_u64());
    const ThresholdResult mc = minimize_mc_dist2(smp, 10.0);
    const double th = 400.0 * psi_lr(0.1, 1.0, std::min(1.0, nuc * nuc / 2.0)).value;
    const double rel = std::abs(mc.value / th - 1.0);
    o.check(rel <= 0.05, fmt("nuclear %.4f: MC %.2f vs %.2f", nuc, mc.value, th) + fmt(" (%.2f%%)", 100 * rel));
  }
  const double t = seconds_since(t0);
  o.check(t < 120.0, fmt("%.1f s < 120 s", t));
  return o;
}

Outcome criterion6(std::string& csv) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const ExperimentConfig c = sparse_sweep(100, {2, 4, 6, 8, 10}, 100);
  const SweepResult r = sweep(c);
  csv = csv_of(r);
  for (const RowSummary& s : r.rows) {
    const double theory = 100.0 * psi(s.row.level / 100.0, 1.0).value;
    const double ratio = s.fit.m50 / theory;
    const double nc = static_cast<double>(s.non_converged) / s.trials;
    o.check(std::isfinite(ratio) && std::abs(ratio - 1.0) <= 0.15 && s.row.m_grid.size() == 11,
            fmt("s=%.0f m50/theory %.4f", s.row.level, ratio));
    o.check(nc < 0.01, fmt("s=%.0f non-converged %.2f%%", s.row.level, 100 * nc));
  }
  o.detail += fmt("; %.1f s", seconds_since(t0));
  return o;
}

Outcome criterion7(bool slow) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  ExperimentConfig c = sparse_sweep(300, {1.1, 2.0, 3.0}, 50);
  c.parameter = RowParameter::l1_norm;
  c.fixed_level = 9;
  check_monotone(o, amplitude_sweep(c));
  if (slow) {
    ExperimentConfig l;
    l.problem = Problem::lowrank;
    l.p = l.q = 30;
    l.parameter = RowParameter::nuclear_norm;
    l.fixed_level = 2;
    l.values = {1.05, 1.2, std::sqrt(2.0)};
    l.trials = 50;
    check_monotone(o, amplitude_sweep(l));
  } else {
    o.check(false, "low-rank part skipped");
  }
  o.detail += fmt("; %.1f s", seconds_since(t0));
  return o;
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  ExperimentConfig c = sparse_sweep(100, {5}, 100);
  c.modes = {SensingMode::phase_only, SensingMode::linear};
  const SweepResult r = sweep(c);
  const LogisticFit& po = r.rows[0].fit;
  const LogisticFit& ln = r.rows[1].fit;
  o.check(po.m50 < ln.m50, fmt("m50 PO %.2f < LN %.2f", po.m50, ln.m50));
  o.check(po.m50_hi < ln.m50_lo, fmt("CI PO hi %.2f < LN lo %.2f", po.m50_hi, ln.m50_lo));
  const double t = seconds_since(t0);
  o.check(t < 1800.0, fmt("%.1f s < 1800 s", t));
  return o;
}

Outcome criterion9() {
  Outcome o;
  Rng rng(derive_seed(kDefaultSeed, {9}));
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 10 + static_cast<int>(rng.uniform_index(60));
    const int m = 1 + static_cast<int>(rng.uniform_index(120));
    const int s = 1 + static_cast<int>(rng.uniform_index(std::min(n, 10)));
    const Eigen::VectorXd x = make_equal_amplitude_sparse(n, s, rng).dense();
    const ComplexSensingMatrix phi = sample_phi(m, n, rng);
    const LinearizedSystem sys = build_linearized(phi, phases(phi, x));
    const Eigen::VectorXd star = (m / apply(phi, x).cwiseAbs().sum()) * x;
    worst = std::max(worst, (sys.matrix * star - sys.rhs).norm());
  }
  o.check(worst < 1e-10, fmt("A_z x* residual max %.2g", worst));
  const DiagnosticReport d = near_gaussianity_diagnostics(20, 40, 1000, rng);
  o.check(d.zero_block_trials == d.trials,
          fmt("zero block %.0f/%.0f trials", d.zero_block_trials, d.trials) +
              fmt(" (max %.2g)", d.max_abs_zero_block));
  double orth = 0.0;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd x(50);
    for (int i = 0; i < 50; ++i) x(i) = rng.normal();
    x.normalize();
    const Eigen::MatrixXd p = householder_px(x);
    orth = std::max(orth, (p * p.transpose() - Eigen::MatrixXd::Identity(50, 50)).norm());
    orth = std::max(orth, (p * x - Eigen::VectorXd::Unit(50, 0)).norm());
  }
  o.check(orth < 1e-12, fmt("householder orthogonality %.2g", orth));
  return o;
}

Outcome criterion10(const std::string& reference) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  SweepOptions opts;
  opts.workers = 3;
  const std::string again = csv_of(sweep(sparse_sweep(100, {2, 4, 6, 8, 10}, 100), opts));
  o.check(!reference.empty() && again == reference,
          fmt("workers 1 vs 3: %.0f vs %.0f bytes", reference.size(), again.size()) +
              (again == reference ? ", identical" : ", differ"));
  o.detail += fmt("; %.1f s", seconds_since(t0));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  bool slow = true;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--skip-slow") == 0) {
      slow = false;
    } else {
      std::fprintf(stderr, "usage: %s [--skip-slow]\n", argv[0]);
      return 2;
    }
  }
  // Criteria that fail against the stated target and are documented as such.
  const std::vector<int> known = {1};

  std::string reference_csv;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, [&] { return criterion6(reference_csv); }},
      {7, [&] { return criterion7(slow); }},
      {8, criterion8},
      {9, criterion9},
      {10, [&] { return criterion10(reference_csv); }},
  };
  int unexpected = 0, failed = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const bool is_known = std::find(known.begin(), known.end(), id) != known.end();
    std::printf("criterion %2d: %s%s | %s\n", id, o.pass ? "PASS" : "FAIL",
                !o.pass && is_known ? " (known deviation)" : "", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
    unexpected += !o.pass && !is_known;
  }
  std::printf("note: R_sp(1e-6,1) = %.4f, R_sp(1e-6,0.6) = %.4f\n", ratio_sp(1e-6, 1.0), ratio_sp(1e-6, 0.6));
  std::printf("summary: %d of %zu criteria passed, %d unexpected failure(s)\n",
              static_cast<int>(criteria.size()) - failed, criteria.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
