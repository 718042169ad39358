#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "pocs/curves.hpp"
#include "pocs/experiments.hpp"
#include "pocs/measurement.hpp"
#include "pocs/signals.hpp"
#include "pocs/thresholds.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kOutputEnv = "POCS_OUTPUT_DIR";
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::uint64_t seed = pocs::kDefaultSeed;
  bool seed_given = false;
  std::string out;
  int workers = 1;
  int verbosity = 0;
};

fs::path output_dir(const Common& c) {
  fs::path dir = c.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputEnv);
    dir = env && *env ? env : "pocs-out";
  }
  fs::create_directories(dir);
  return dir;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pocs::ConfigError("", "cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw pocs::ConfigError("", std::string("invalid JSON: ") + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json threshold_json(const pocs::ThresholdResult& r) {
  return {{"value", r.value},
          {"tau_star", r.tau_star},
          {"method", pocs::to_string(r.method)},
          {"error_estimate", r.error_estimate}};
}

// --- threshold -------------------------------------------------------------

struct ThresholdArgs {
  int n = 0, s = 0, p = 0, q = 0, r = 0;
  double l1 = NAN, nuc = NAN;
  long mc_samples = 0;
};

json cmd_threshold_sparse(const ThresholdArgs& a, const Common& c) {
  const double l1 = std::isnan(a.l1) ? std::sqrt(static_cast<double>(a.s)) : a.l1;
  const pocs::ThresholdResult po = pocs::zeta_hat_po_sparse(a.n, a.s, l1);
  const pocs::ThresholdResult ln = pocs::zeta_ln_sparse(a.n, a.s);
  json j = {{"problem", "sparse"},   {"n", a.n},          {"s", a.s},
            {"l1", l1},              {"zeta_po_hat", po.value}, {"zeta_ln_hat", ln.value},
            {"ratio", po.value / ln.value}, {"tau_star", po.tau_star}, {"po", threshold_json(po)},
            {"ln", threshold_json(ln)}};
  if (a.mc_samples > 0) {
    pocs::Rng rng(c.seed);
    const double root = std::sqrt(static_cast<double>(a.s));
    const pocs::SparseSignal x = a.s == 1 || root - l1 <= 1e-12 * root
                                     ? pocs::make_equal_amplitude_sparse(a.n, a.s, rng)
                                     : pocs::make_sparse_with_l1(a.n, a.s, l1, rng);
    const pocs::Dist2Sampler sampler(x, a.mc_samples, rng.next_u64(), c.workers);
    const pocs::ThresholdResult mc = pocs::minimize_mc_dist2(sampler, 10.0);
    j["mc"] = threshold_json(mc);
    j["mc"]["samples"] = a.mc_samples;
  }
  return j;
}

json cmd_threshold_lowrank(const ThresholdArgs& a, const Common& c) {
  const double nuc = std::isnan(a.nuc) ? std::sqrt(static_cast<double>(a.r)) : a.nuc;
  const pocs::ThresholdResult po = pocs::zeta_hat_po_lowrank(a.p, a.q, a.r, nuc);
  const pocs::ThresholdResult ln = pocs::zeta_ln_lowrank(a.p, a.q, a.r);
  json j = {{"problem", "lowrank"},  {"p", a.p},   {"q", a.q},
            {"r", a.r},              {"nuc", nuc}, {"zeta_po_hat", po.value},
            {"zeta_ln_hat", ln.value}, {"ratio", po.value / ln.value}, {"tau_star", po.tau_star},
            {"po", threshold_json(po)}, {"ln", threshold_json(ln)}};
  if (a.mc_samples > 0) {
    pocs::Rng rng(c.seed);
    const pocs::LowRankSignal x = pocs::make_lowrank_with_nuclear(a.p, a.q, a.r, nuc, rng);
    const pocs::Dist2Sampler sampler(x, a.mc_samples, rng.next_u64(), c.workers);
    // Singular values of the (p - r) x (q - r) block stay below about sqrt(q) + sqrt(p).
    const double tau_hi = 2.0 * (std::sqrt(static_cast<double>(a.p)) + std::sqrt(static_cast<double>(a.q)));
    const pocs::ThresholdResult mc = pocs::minimize_mc_dist2(sampler, tau_hi);
    j["mc"] = threshold_json(mc);
    j["mc"]["samples"] = a.mc_samples;
  }
  return j;
}

// --- ratio-curve -----------------------------------------------------------

struct RatioArgs {
  std::string config;
  std::string family = "sp";
  double v = 1.0, w = 1.0;
  double u_min = 1e-3, u_max = 1.0;
  int points = 60;
  bool linear = false;
  std::string name;
  bool svg = true;
};

void cmd_ratio_curve(const RatioArgs& a, const Common& c) {
  pocs::RatioCurveConfig cfg;
  if (!a.config.empty()) {
    cfg = pocs::ratio_config_from_json(read_json_file(a.config));
  } else {
    json j = {{"schema", pocs::kRatioConfigSchema},
              {"family", a.family},
              {"curves", json::array({{{"v", a.v}, {"w", a.w}}})},
              {"u", {{"min", a.u_min}, {"max", a.u_max}, {"points", a.points}, {"spacing", a.linear ? "linear" : "log"}}}};
    if (a.family == "sparse_fixed_n") throw pocs::ConfigError("/family", "sparse_fixed_n curves need --config");
    cfg = pocs::ratio_config_from_json(j);
  }
  if (!a.name.empty()) cfg.name = a.name;
  const auto pts = pocs::ratio_curve(cfg);
  const fs::path dir = output_dir(c);
  std::ostringstream csv;
  pocs::write_ratio_csv(cfg, pts, csv);
  write_file(dir / (cfg.name + ".csv"), csv.str());
  if (a.svg) {
    pocs::plot::Figure fig;
    fig.title = cfg.name;
    const bool fixed_n = cfg.family == pocs::CurveFamily::sparse_fixed_n;
    fig.xlabel = fixed_n ? "s" : "u";
    fig.ylabel = fixed_n ? "zeta_PO / zeta_LN" : (cfg.family == pocs::CurveFamily::sp ? "R_sp" : "R_lr");
    fig.log_x = fixed_n ? false : cfg.log_spacing;
    std::map<std::string, std::size_t> index;
    for (const auto& p : pts) {
      auto [it, fresh] = index.try_emplace(p.curve, fig.series.size());
      if (fresh) fig.series.emplace_back(p.curve);
      fig.series[it->second].x.push_back(p.x);
      fig.series[it->second].y.push_back(p.ratio);
    }
    write_file(dir / (cfg.name + ".svg"), pocs::plot::render_svg(fig));
  }
  if (c.verbosity > 0) std::cerr << "wrote " << (dir / (cfg.name + ".csv")).string() << "\n";
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string config;
  bool fresh = false;
  bool svg = true;
};

std::string parameter_label(pocs::RowParameter p) {
  switch (p) {
    case pocs::RowParameter::sparsity: return "s";
    case pocs::RowParameter::l1_norm: return "|x|_1";
    case pocs::RowParameter::rank: return "r";
    case pocs::RowParameter::nuclear_norm: return "|X|_nu";
  }
  return "";
}

void write_sweep_plots(const pocs::SweepResult& r, const fs::path& dir) {
  const pocs::ExperimentConfig& cfg = r.config;
  pocs::plot::Figure trans;
  trans.title = cfg.name + ": transition";
  trans.xlabel = parameter_label(cfg.parameter);
  trans.ylabel = "m";
  pocs::plot::Figure rates;
  rates.title = cfg.name + ": success rate";
  rates.xlabel = "m";
  rates.ylabel = "success rate";
  for (pocs::SensingMode mode : cfg.modes) {
    const std::string tag = pocs::to_string(mode);
    pocs::plot::Series theory(tag + " theory"), fitted(tag + " m50");
    fitted.line = false;
    fitted.markers = true;
    for (const pocs::RowSummary& s : r.rows) {
      if (s.row.mode != mode) continue;
      const double x = cfg.values[s.row.index];
      theory.x.push_back(x);
      theory.y.push_back(s.row.theory.value);
      fitted.x.push_back(x);
      fitted.y.push_back(s.fit.m50);
      fitted.lo.push_back(s.fit.m50_lo);
      fitted.hi.push_back(s.fit.m50_hi);
      pocs::plot::Series curve(tag + " " + parameter_label(cfg.parameter) + "=" + pocs::plot::compact(x));
      curve.markers = true;
      for (const pocs::CellRecord& cell : r.cells) {
        if (cell.mode != mode || cell.row != s.row.index) continue;
        curve.x.push_back(cell.m);
        curve.y.push_back(static_cast<double>(cell.successes) / cell.trials);
      }
      rates.series.push_back(std::move(curve));
    }
    trans.series.push_back(std::move(theory));
    trans.series.push_back(std::move(fitted));
  }
  write_file(dir / (cfg.name + ".svg"), pocs::plot::render_svg(trans));
  write_file(dir / (cfg.name + "-rates.svg"), pocs::plot::render_svg(rates));
}

void cmd_sweep(const SweepArgs& a, const Common& c) {
  pocs::ExperimentConfig cfg = pocs::config_from_json(read_json_file(a.config));
  if (c.seed_given) cfg.seed = c.seed;
  const fs::path dir = output_dir(c);
  pocs::SweepOptions opts;
  opts.workers = c.workers;
  opts.resume_log = dir / (cfg.name + ".cells.log");
  if (a.fresh) fs::remove(opts.resume_log);
  std::size_t total = 0;
  for (const auto& row : pocs::resolve_rows(cfg)) total += row.m_grid.size();
  std::size_t done = 0;
  if (c.verbosity > 0)
    opts.on_cell = [&](const pocs::CellRecord& cell) {
      std::cerr << "[" << ++done << "/" << total << "] " << pocs::to_string(cell.mode) << " row " << cell.row
                << " m=" << cell.m << " " << cell.successes << "/" << cell.trials << "\n";
    };
  const pocs::SweepResult r = pocs::sweep(cfg, opts);
  std::ostringstream csv;
  pocs::write_csv(r, csv);
  write_file(dir / (cfg.name + ".csv"), csv.str());
  write_file(dir / (cfg.name + ".summary.json"), pocs::summary_json(r).dump(2) + "\n");
  if (a.svg) write_sweep_plots(r, dir);
  if (c.verbosity > 0) std::cerr << "wrote " << (dir / (cfg.name + ".csv")).string() << "\n";
}

// --- diagnose --------------------------------------------------------------

json cmd_diagnose(int n, int m, int trials, const Common& c) {
  pocs::Rng rng(c.seed);
  const pocs::DiagnosticReport d = pocs::near_gaussianity_diagnostics(n, m, trials, rng);
  const double l_sd = std::sqrt(d.l_variance_expected / d.trials);
  return {{"n", d.n},
          {"m", d.m},
          {"trials", d.trials},
          {"seed", c.seed},
          {"max_abs_zero_block", d.max_abs_zero_block},
          {"zero_block_trials", d.zero_block_trials},
          {"zero_block_ok", d.zero_block_trials == d.trials},
          {"l_mean", d.l_mean},
          {"l_mean_expected", d.l_mean_expected},
          {"l_mean_within_3sd", std::abs(d.l_mean - d.l_mean_expected) <= 3.0 * l_sd},
          {"l_variance", d.l_variance},
          {"l_variance_expected", d.l_variance_expected},
          {"probe_variance", d.probe_variance},
          {"pooled_variance", d.pooled_variance},
          {"variance_expected", d.variance_expected},
          {"ks_distance", d.ks_distance},
          {"ks_samples", d.ks_samples}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-only compressed sensing: thresholds, ratio curves, diagnostics and sweeps"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Master seed (default " + std::to_string(pocs::kDefaultSeed) + ")");
    sub->add_option("--out", common.out, std::string("Output directory (default $") + kOutputEnv + " or ./pocs-out)");
    sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", common.verbosity, "Progress messages on stderr");
  };

  ThresholdArgs th;
  auto* threshold = app.add_subcommand("threshold", "Phase transition surrogates as JSON");
  threshold->require_subcommand(1);
  auto* th_sparse = threshold->add_subcommand("sparse", "s-sparse vectors in R^n");
  th_sparse->add_option("--n", th.n, "Dimension")->required();
  th_sparse->add_option("--s", th.s, "Sparsity")->required();
  th_sparse->add_option("--l1", th.l1, "l1 norm of the unit-norm signal (default sqrt(s))");
  th_sparse->add_option("--mc-samples", th.mc_samples, "Also estimate by Monte Carlo with this many samples");
  add_common(th_sparse);
  auto* th_lowrank = threshold->add_subcommand("lowrank", "rank-r p x q matrices");
  th_lowrank->add_option("--p", th.p, "Rows")->required();
  th_lowrank->add_option("--q", th.q, "Columns")->required();
  th_lowrank->add_option("--r", th.r, "Rank")->required();
  th_lowrank->add_option("--nuc", th.nuc, "Nuclear norm of the unit-norm signal (default sqrt(r))");
  th_lowrank->add_option("--mc-samples", th.mc_samples, "Also estimate by Monte Carlo with this many samples");
  add_common(th_lowrank);

  RatioArgs ra;
  auto* ratio = app.add_subcommand("ratio-curve", "Ratio curves zeta_PO / zeta_LN as CSV (+ SVG)");
  ratio->add_option("--config", ra.config, "Ratio-curve JSON config");
  ratio->add_option("--family", ra.family, "sp or lr")->check(CLI::IsMember({"sp", "lr"}));
  ratio->add_option("--v", ra.v, "v (sp) or p/q (lr)");
  ratio->add_option("--w", ra.w, "w = |X|_nu^2 / r (lr)");
  ratio->add_option("--u-min", ra.u_min, "Smallest u");
  ratio->add_option("--u-max", ra.u_max, "Largest u");
  ratio->add_option("--points", ra.points, "Grid points");
  ratio->add_flag("--linear", ra.linear, "Linear instead of logarithmic u spacing");
  ratio->add_option("--name", ra.name, "Output file stem");
  ratio->add_flag("!--no-svg", ra.svg, "Skip the SVG plot");
  add_common(ratio);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo phase transition sweep");
  sweep->add_option("--config", sw.config, "Sweep JSON config")->required();
  sweep->add_flag("--fresh", sw.fresh, "Discard completed cells from an earlier run");
  sweep->add_flag("!--no-svg", sw.svg, "Skip the SVG plots");
  add_common(sweep);

  int dn = 0, dm = 0, dtrials = 1000;
  auto* diagnose = app.add_subcommand("diagnose", "Near-Gaussianity diagnostics of the linearized matrix");
  diagnose->add_option("--n", dn, "Signal dimension")->required();
  diagnose->add_option("--m", dm, "Number of phases")->required();
  diagnose->add_option("--trials", dtrials, "Trials (>= 100)");
  add_common(diagnose);

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  for (auto* sub : {th_sparse, th_lowrank, ratio, sweep, diagnose})
    if (sub->parsed() && sub->count("--seed") > 0) common.seed_given = true;

  try {
    if (version->parsed()) {
      std::cout << "pocs " << kVersion << "\n";
    } else if (th_sparse->parsed()) {
      std::cout << cmd_threshold_sparse(th, common).dump(2) << "\n";
    } else if (th_lowrank->parsed()) {
      std::cout << cmd_threshold_lowrank(th, common).dump(2) << "\n";
    } else if (ratio->parsed()) {
      cmd_ratio_curve(ra, common);
    } else if (sweep->parsed()) {
      cmd_sweep(sw, common);
    } else if (diagnose->parsed()) {
      std::cout << cmd_diagnose(dn, dm, dtrials, common).dump(2) << "\n";
    }
  } catch (const pocs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
