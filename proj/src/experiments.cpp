#include "pocs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <boost/math/distributions/normal.hpp>

#include "json_fields.hpp"
#include "pocs/measurement.hpp"
#include "pocs/rng.hpp"
#include "pocs/signals.hpp"

namespace pocs {

namespace {

using nlohmann::json;
using detail::enum_from;
using detail::number_at;
using detail::read_optional;
using detail::required;

constexpr std::uint64_t kSignalStream = 0x5167;
constexpr std::uint64_t kMeasureStream = 0x3ea5;
constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::pair<const char*, Problem>> kProblems{{"sparse", Problem::sparse},
                                                            {"lowrank", Problem::lowrank}};
const std::vector<std::pair<const char*, SensingMode>> kModes{{"po", SensingMode::phase_only},
                                                             {"ln", SensingMode::linear}};
const std::vector<std::pair<const char*, RowParameter>> kParameters{
    {"sparsity", RowParameter::sparsity},
    {"l1_norm", RowParameter::l1_norm},
    {"rank", RowParameter::rank},
    {"nuclear_norm", RowParameter::nuclear_norm}};

bool is_integer_value(double v) { return std::floor(v) == v; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string to_string(Problem p) { return p == Problem::sparse ? "sparse" : "lowrank"; }
std::string to_string(SensingMode m) { return m == SensingMode::phase_only ? "po" : "ln"; }
std::string to_string(RowParameter r) {
  switch (r) {
    case RowParameter::sparsity: return "sparsity";
    case RowParameter::l1_norm: return "l1_norm";
    case RowParameter::rank: return "rank";
    case RowParameter::nuclear_norm: return "nuclear_norm";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  const bool sparse = problem == Problem::sparse;
  if (sparse) {
    if (n < 1) throw ConfigError("/n", "must be >= 1");
    if (parameter != RowParameter::sparsity && parameter != RowParameter::l1_norm)
      throw ConfigError("/parameter", "sparse problems vary \"sparsity\" or \"l1_norm\"");
  } else {
    if (p < 1) throw ConfigError("/p", "must be >= 1");
    if (q < p) throw ConfigError("/q", "must be >= p");
    if (parameter != RowParameter::rank && parameter != RowParameter::nuclear_norm)
      throw ConfigError("/parameter", "lowrank problems vary \"rank\" or \"nuclear_norm\"");
  }
  if (modes.empty()) throw ConfigError("/modes", "must be nonempty");
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (modes[i] == modes[k]) throw ConfigError("/modes/" + std::to_string(i), "duplicate mode");
  if (values.empty()) throw ConfigError("/values", "must be nonempty");

  const int max_level = sparse ? n : p;
  const bool norm_rows = parameter == RowParameter::l1_norm || parameter == RowParameter::nuclear_norm;
  if (norm_rows && (fixed_level < 1 || fixed_level > max_level))
    throw ConfigError("/fixed_level", "must lie in [1, " + std::to_string(max_level) + "]");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string path = "/values/" + std::to_string(i);
    const double v = values[i];
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    if (norm_rows) {
      const double root = std::sqrt(static_cast<double>(fixed_level));
      const bool ok = fixed_level == 1 ? v == 1.0 : (v > 1.0 && v <= root * (1.0 + 1e-12));
      if (!ok) throw ConfigError(path, "norm must lie in (1, sqrt(fixed_level)] (exactly 1 when fixed_level = 1)");
    } else if (!is_integer_value(v) || v < 1.0 || v > max_level) {
      throw ConfigError(path, "must be an integer in [1, " + std::to_string(max_level) + "]");
    }
  }
  for (std::size_t i = 0; i < m_grid.size(); ++i)
    if (m_grid[i] < 1) throw ConfigError("/m_grid/" + std::to_string(i), "m must be >= 1");
  if (m_grid.empty()) {
    if (!(auto_grid.lo > 0.0)) throw ConfigError("/m_grid/lo", "must be positive");
    if (!(auto_grid.hi >= auto_grid.lo)) throw ConfigError("/m_grid/hi", "must be >= lo");
    if (auto_grid.points < 1) throw ConfigError("/m_grid/points", "must be >= 1");
  }
  if (trials < 1) throw ConfigError("/trials", "must be >= 1");
  if (!(success_threshold > 0.0)) throw ConfigError("/success_threshold", "must be positive");
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/solver", e.what());
  }
}

ExperimentConfig config_from_json(const json& j) {
  detail::check_schema(j, kSweepConfigSchema);
  ExperimentConfig c;
  if (j.contains("name")) {
    c.name = detail::string_at(j["name"], "/name");
  }
  c.problem = enum_from(required(j, "problem", ""), "/problem", kProblems);
  if (j.contains("modes")) {
    const json& ms = j["modes"];
    if (!ms.is_array()) throw ConfigError("/modes", "expected an array");
    c.modes.clear();
    for (std::size_t i = 0; i < ms.size(); ++i)
      c.modes.push_back(enum_from(ms[i], "/modes/" + std::to_string(i), kModes));
  }
  if (c.problem == Problem::sparse) {
    c.n = number_at<int>(required(j, "n", ""), "/n");
  } else {
    c.p = number_at<int>(required(j, "p", ""), "/p");
    c.q = number_at<int>(required(j, "q", ""), "/q");
  }
  c.parameter = c.problem == Problem::sparse ? RowParameter::sparsity : RowParameter::rank;
  if (j.contains("parameter")) c.parameter = enum_from(j["parameter"], "/parameter", kParameters);
  const json& vals = required(j, "values", "");
  if (!vals.is_array()) throw ConfigError("/values", "expected an array");
  for (std::size_t i = 0; i < vals.size(); ++i)
    c.values.push_back(number_at<double>(vals[i], "/values/" + std::to_string(i)));
  read_optional(j, "fixed_level", "", c.fixed_level);
  if (j.contains("m_grid")) {
    const json& g = j["m_grid"];
    if (g.is_array()) {
      for (std::size_t i = 0; i < g.size(); ++i)
        c.m_grid.push_back(number_at<int>(g[i], "/m_grid/" + std::to_string(i)));
      if (c.m_grid.empty()) throw ConfigError("/m_grid", "explicit grid must be nonempty");
    } else if (g.is_object()) {
      read_optional(g, "lo", "/m_grid", c.auto_grid.lo);
      read_optional(g, "hi", "/m_grid", c.auto_grid.hi);
      read_optional(g, "points", "/m_grid", c.auto_grid.points);
    } else {
      throw ConfigError("/m_grid", "expected an array of m values or an {lo, hi, points} object");
    }
  }
  read_optional(j, "trials", "", c.trials);
  read_optional(j, "success_threshold", "", c.success_threshold);
  read_optional(j, "seed", "", c.seed);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (!s.is_object()) throw ConfigError("/solver", "expected an object");
    read_optional(s, "rho", "/solver", c.solver.rho);
    read_optional(s, "absolute_tolerance", "/solver", c.solver.absolute_tolerance);
    read_optional(s, "relative_tolerance", "/solver", c.solver.relative_tolerance);
    read_optional(s, "max_iterations", "/solver", c.solver.max_iterations);
    read_optional(s, "alpha", "/solver", c.solver.alpha);
    read_optional(s, "adaptive_rho", "/solver", c.solver.adaptive_rho);
    read_optional(s, "polish", "/solver", c.solver.polish);
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema"] = kSweepConfigSchema;
  j["name"] = c.name;
  j["problem"] = to_string(c.problem);
  json modes = json::array();
  for (SensingMode m : c.modes) modes.push_back(to_string(m));
  j["modes"] = modes;
  if (c.problem == Problem::sparse) {
    j["n"] = c.n;
  } else {
    j["p"] = c.p;
    j["q"] = c.q;
  }
  j["parameter"] = to_string(c.parameter);
  j["values"] = c.values;
  if (c.parameter == RowParameter::l1_norm || c.parameter == RowParameter::nuclear_norm)
    j["fixed_level"] = c.fixed_level;
  if (c.m_grid.empty())
    j["m_grid"] = {{"lo", c.auto_grid.lo}, {"hi", c.auto_grid.hi}, {"points", c.auto_grid.points}};
  else
    j["m_grid"] = c.m_grid;
  j["trials"] = c.trials;
  j["success_threshold"] = c.success_threshold;
  j["seed"] = c.seed;
  j["solver"] = {{"rho", c.solver.rho},
                 {"absolute_tolerance", c.solver.absolute_tolerance},
                 {"relative_tolerance", c.solver.relative_tolerance},
                 {"max_iterations", c.solver.max_iterations},
                 {"alpha", c.solver.alpha},
                 {"adaptive_rho", c.solver.adaptive_rho},
                 {"polish", c.solver.polish}};
  return j;
}

std::vector<SweepRow> resolve_rows(const ExperimentConfig& c) {
  c.validate();
  std::vector<SweepRow> rows;
  for (SensingMode mode : c.modes) {
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      SweepRow row;
      row.mode = mode;
      row.index = static_cast<int>(i);
      const bool level_rows = c.parameter == RowParameter::sparsity || c.parameter == RowParameter::rank;
      row.level = level_rows ? static_cast<int>(c.values[i]) : c.fixed_level;
      row.norm = level_rows ? std::sqrt(static_cast<double>(row.level)) : c.values[i];
      if (c.problem == Problem::sparse)
        row.theory = mode == SensingMode::phase_only ? zeta_hat_po_sparse(c.n, row.level, row.norm)
                                                     : zeta_ln_sparse(c.n, row.level);
      else
        row.theory = mode == SensingMode::phase_only ? zeta_hat_po_lowrank(c.p, c.q, row.level, row.norm)
                                                     : zeta_ln_lowrank(c.p, c.q, row.level);
      if (!c.m_grid.empty()) {
        row.m_grid = c.m_grid;
      } else {
        const AutoGrid& g = c.auto_grid;
        const double span = (g.hi - g.lo) * row.theory.value;
        if (g.points > 1 && span < g.points - 1) {
          // Too narrow for distinct integers: consecutive m values centered on the span.
          const double center = 0.5 * (g.lo + g.hi) * row.theory.value;
          const int first = std::max(1, static_cast<int>(std::lround(center - 0.5 * (g.points - 1))));
          for (int k = 0; k < g.points; ++k) row.m_grid.push_back(first + k);
        } else {
          for (int k = 0; k < g.points; ++k) {
            const double f = g.points == 1 ? 0.5 * (g.lo + g.hi) : g.lo + (g.hi - g.lo) * k / (g.points - 1);
            row.m_grid.push_back(std::max(1, static_cast<int>(std::lround(f * row.theory.value))));
          }
        }
      }
      std::sort(row.m_grid.begin(), row.m_grid.end());
      row.m_grid.erase(std::unique(row.m_grid.begin(), row.m_grid.end()), row.m_grid.end());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

TrialOutcome run_trial(const ExperimentConfig& c, const SweepRow& row, int m, int trial) {
  if (m < 1) throw std::invalid_argument("run_trial: m must be >= 1");
  // The signal depends on the trial only, so rows and modes share signals;
  // the measurements depend on (mode, m, trial).
  Rng signal_rng(derive_seed(c.seed, {kSignalStream, static_cast<std::uint64_t>(trial)}));
  Rng measure_rng(derive_seed(c.seed, {kMeasureStream, static_cast<std::uint64_t>(row.mode),
                                       static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)}));

  Eigen::VectorXd x;
  SignalShape shape;
  if (c.problem == Problem::sparse) {
    const double root = std::sqrt(static_cast<double>(row.level));
    const bool equal = row.level == 1 || root - row.norm <= 1e-12 * root;
    const SparseSignal s = equal ? make_equal_amplitude_sparse(c.n, row.level, signal_rng)
                                 : make_sparse_with_l1(c.n, row.level, row.norm, signal_rng);
    x = s.dense();
    shape = SignalShape::vector(c.n);
  } else {
    x = make_lowrank_with_nuclear(c.p, c.q, row.level, row.norm, signal_rng).flat();
    shape = SignalShape::matrix(c.p, c.q);
  }

  RecoveryOutcome out;
  try {
    if (row.mode == SensingMode::phase_only) {
      const ComplexSensingMatrix phi = sample_phi(m, static_cast<int>(x.size()), measure_rng);
      out = recover_pocs(phi, shape, phases(phi, x), c.solver);
    } else {
      Eigen::MatrixXd a(m, x.size());
      for (int i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < x.size(); ++j) a(i, j) = measure_rng.normal();
      out = recover_linear_cs(a, a * x, shape, c.solver);
    }
  } catch (const DegenerateSolutionError&) {
    return {false, x.norm(), false};
  }
  TrialOutcome t;
  t.distance = (out.estimate - x).norm();
  t.converged = out.converged;
  t.success = t.converged && t.distance <= c.success_threshold;
  return t;
}

LogisticFit logistic_fit(const std::vector<BinomialPoint>& input) {
  if (input.empty()) throw std::invalid_argument("logistic_fit: need at least one point");
  // Merge repeated m values.
  std::map<double, std::pair<int, int>> merged;
  for (const BinomialPoint& pt : input) {
    if (pt.trials < 1 || pt.successes < 0 || pt.successes > pt.trials)
      throw std::invalid_argument("logistic_fit: need 0 <= successes <= trials and trials >= 1");
    merged[pt.m].first += pt.successes;
    merged[pt.m].second += pt.trials;
  }
  std::vector<BinomialPoint> pts;
  for (const auto& [m, kn] : merged) pts.push_back({m, kn.first, kn.second});

  double max_fail = -kInf, min_succ = kInf, min_fail = kInf, max_succ = -kInf;
  for (const BinomialPoint& pt : pts) {
    if (pt.successes < pt.trials) max_fail = std::max(max_fail, pt.m), min_fail = std::min(min_fail, pt.m);
    if (pt.successes > 0) min_succ = std::min(min_succ, pt.m), max_succ = std::max(max_succ, pt.m);
  }
  LogisticFit fit;
  auto bracket = [&fit](double lo, double hi) {
    fit.bracket_only = true;
    fit.m50_lo = lo;
    fit.m50_hi = hi;
    fit.m50 = std::isfinite(lo) && std::isfinite(hi) ? 0.5 * (lo + hi) : std::numeric_limits<double>::quiet_NaN();
    fit.covariance.setConstant(std::numeric_limits<double>::quiet_NaN());
    return fit;
  };
  // (Quasi-)separation: the likelihood increases without bound along some direction.
  if (max_fail <= min_succ) return bracket(max_fail, min_succ);
  if (max_succ <= min_fail) return bracket(max_succ, min_fail);

  double mean = 0.0, total = 0.0;
  for (const BinomialPoint& pt : pts) mean += pt.m * pt.trials, total += pt.trials;
  mean /= total;
  double var = 0.0;
  for (const BinomialPoint& pt : pts) var += pt.trials * (pt.m - mean) * (pt.m - mean);
  const double scale = std::sqrt(var / total);

  auto loglik = [&](const Eigen::Vector2d& b) {
    double l = 0.0;
    for (const BinomialPoint& pt : pts) {
      const double eta = b(0) + b(1) * (pt.m - mean) / scale;
      // log(1 + e^eta) without overflow.
      const double softplus = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
      l += pt.successes * eta - pt.trials * softplus;
    }
    return l;
  };
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
  double l = loglik(b);
  bool converged = false;
  for (int it = 0; it < 200 && !converged; ++it) {
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    info.setZero();
    for (const BinomialPoint& pt : pts) {
      const double t = (pt.m - mean) / scale;
      const double pr = 1.0 / (1.0 + std::exp(-(b(0) + b(1) * t)));
      const Eigen::Vector2d xv(1.0, t);
      grad += (pt.successes - pt.trials * pr) * xv;
      info += pt.trials * pr * (1.0 - pr) * xv * xv.transpose();
    }
    const Eigen::Vector2d step = info.ldlt().solve(grad);
    double h = 1.0;
    Eigen::Vector2d next = b + step;
    double lnext = loglik(next);
    while (lnext < l && h > 1e-10) {
      h *= 0.5;
      next = b + h * step;
      lnext = loglik(next);
    }
    converged = (next - b).lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>()) ||
                grad.lpNorm<Eigen::Infinity>() < 1e-10;
    b = next;
    l = lnext;
  }
  // Back to the m scale: intercept = b0 - b1 mean / scale, slope = b1 / scale.
  Eigen::Matrix2d jac;
  jac << 1.0, -mean / scale, 0.0, 1.0 / scale;
  fit.intercept = b(0) - b(1) * mean / scale;
  fit.slope = b(1) / scale;
  fit.covariance = jac * info.inverse() * jac.transpose();
  if (fit.slope == 0.0) return bracket(pts.front().m, pts.back().m);
  fit.m50 = -fit.intercept / fit.slope;
  const Eigen::Vector2d g(-1.0 / fit.slope, fit.intercept / (fit.slope * fit.slope));
  const double se = std::sqrt(std::max(0.0, g.dot(fit.covariance * g)));
  const double z = boost::math::quantile(boost::math::normal(), 0.975);
  fit.m50_lo = fit.m50 - z * se;
  fit.m50_hi = fit.m50 + z * se;
  return fit;
}

TrendTest trend_test(const std::vector<BinomialPoint>& input, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("trend_test: alpha must lie in (0, 1)");
  std::vector<BinomialPoint> pts = input;
  std::sort(pts.begin(), pts.end(), [](const BinomialPoint& a, const BinomialPoint& b) { return a.m < b.m; });
  TrendTest t;
  t.critical_z = boost::math::quantile(boost::math::normal(), 1.0 - alpha);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const BinomialPoint& a = pts[i];
    const BinomialPoint& b = pts[i + 1];
    const double pa = static_cast<double>(a.successes) / a.trials;
    const double pb = static_cast<double>(b.successes) / b.trials;
    const double pooled = static_cast<double>(a.successes + b.successes) / (a.trials + b.trials);
    const double var = pooled * (1.0 - pooled) * (1.0 / a.trials + 1.0 / b.trials);
    if (var <= 0.0) continue;
    const double z = (pa - pb) / std::sqrt(var);
    t.max_z = std::max(t.max_z, z);
    if (z > t.critical_z) ++t.violations;
  }
  return t;
}

namespace {

using CellKey = std::tuple<int, int, int>;  // mode, row, m

CellKey key_of(const CellRecord& r) { return {static_cast<int>(r.mode), r.row, r.m}; }

std::string fingerprint(const ExperimentConfig& c) {
  // FNV-1a over the canonical config dump.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config_to_json(c).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string log_line(const CellRecord& r) {
  std::ostringstream os;
  os << static_cast<int>(r.mode) << ',' << r.row << ',' << r.m << ',' << r.successes << ',' << r.trials << ','
     << r.non_converged << '\n';
  return os.str();
}

// Reads the completed cells of a resume log, dropping a torn final line.
std::map<CellKey, CellRecord> read_resume_log(const std::filesystem::path& path, const std::string& header) {
  std::map<CellKey, CellRecord> done;
  if (!std::filesystem::exists(path)) return done;
  std::string content;
  {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    content = ss.str();
  }
  const std::size_t last_nl = content.rfind('\n');
  const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  if (keep != content.size()) {
    std::filesystem::resize_file(path, keep);
    content.resize(keep);
  }
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) return done;
  if (line != header)
    throw std::runtime_error("resume log " + path.string() + " was written for a different configuration");
  while (std::getline(in, line)) {
    CellRecord r;
    int mode = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%d,%d", &mode, &r.row, &r.m, &r.successes, &r.trials,
                    &r.non_converged) != 6)
      throw std::runtime_error("resume log " + path.string() + " has a malformed line: " + line);
    r.mode = static_cast<SensingMode>(mode);
    done[key_of(r)] = r;
  }
  return done;
}

}  // namespace

SweepResult sweep(const ExperimentConfig& c, const SweepOptions& opts) {
  SweepResult result;
  result.config = c;
  const std::vector<SweepRow> rows = resolve_rows(c);

  struct Task {
    const SweepRow* row;
    int m;
  };
  std::vector<Task> tasks;
  for (const SweepRow& row : rows)
    for (int m : row.m_grid) tasks.push_back({&row, m});

  const std::string header = "#pocs-resume " + fingerprint(c);
  std::map<CellKey, CellRecord> done;
  std::ofstream log;
  if (!opts.resume_log.empty()) {
    done = read_resume_log(opts.resume_log, header);
    if (opts.resume_log.has_parent_path()) std::filesystem::create_directories(opts.resume_log.parent_path());
    const bool fresh = !std::filesystem::exists(opts.resume_log) || std::filesystem::file_size(opts.resume_log) == 0;
    log.open(opts.resume_log, std::ios::app | std::ios::binary);
    if (!log) throw std::runtime_error("cannot open resume log " + opts.resume_log.string());
    if (fresh) log << header << '\n' << std::flush;
  }

  std::vector<Task> pending;
  for (const Task& t : tasks) {
    const auto it = done.find({static_cast<int>(t.row->mode), t.row->index, t.m});
    if (it == done.end() || it->second.trials != c.trials) pending.push_back(t);
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  auto work = [&]() {
    for (std::size_t i = next++; i < pending.size() && !failed; i = next++) {
      try {
        const Task& t = pending[i];
        CellRecord r{t.row->mode, t.row->index, t.m, 0, c.trials, 0};
        for (int trial = 0; trial < c.trials; ++trial) {
          const TrialOutcome o = run_trial(c, *t.row, t.m, trial);
          r.successes += o.success;
          r.non_converged += !o.converged;
        }
        std::lock_guard<std::mutex> lock(mu);
        if (log.is_open()) log << log_line(r) << std::flush;
        done[key_of(r)] = r;
        if (opts.on_cell) opts.on_cell(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(opts.workers, static_cast<int>(pending.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  for (const SweepRow& row : rows) {
    RowSummary s;
    s.row = row;
    std::vector<BinomialPoint> pts;
    for (int m : row.m_grid) {
      const CellRecord& r = done.at({static_cast<int>(row.mode), row.index, m});
      result.cells.push_back(r);
      pts.push_back({static_cast<double>(m), r.successes, r.trials});
      s.successes += r.successes;
      s.trials += r.trials;
      s.non_converged += r.non_converged;
    }
    s.fit = logistic_fit(pts);
    s.trend = trend_test(pts);
    result.rows.push_back(std::move(s));
  }
  return result;
}

SweepResult amplitude_sweep(const ExperimentConfig& c, const SweepOptions& opts) {
  if (c.parameter != RowParameter::l1_norm && c.parameter != RowParameter::nuclear_norm)
    throw ConfigError("/parameter", "amplitude sweeps vary \"l1_norm\" or \"nuclear_norm\"");
  return sweep(c, opts);
}

void write_csv(const SweepResult& r, std::ostream& os) {
  const ExperimentConfig& c = r.config;
  const bool sparse = c.problem == Problem::sparse;
  std::map<std::pair<int, int>, const SweepRow*> rows;
  for (const RowSummary& s : r.rows) rows[{static_cast<int>(s.row.mode), s.row.index}] = &s.row;
  os << "# schema: " << kSweepCsvSchema << '\n';
  os << "problem,mode,n,p,q,s,r,norm_param,m,successes,trials,non_converged\n";
  char norm[32];
  for (const CellRecord& cell : r.cells) {
    const SweepRow& row = *rows.at({static_cast<int>(cell.mode), cell.row});
    std::snprintf(norm, sizeof norm, "%.17g", row.norm);
    os << to_string(c.problem) << ',' << to_string(cell.mode) << ',';
    if (sparse)
      os << c.n << ",,," << row.level << ",,";
    else
      os << c.p * c.q << ',' << c.p << ',' << c.q << ",," << row.level << ',';
    os << norm << ',' << cell.m << ',' << cell.successes << ',' << cell.trials << ',' << cell.non_converged
       << '\n';
  }
}

json summary_json(const SweepResult& r) {
  json j;
  j["schema"] = kSweepSummarySchema;
  j["config"] = config_to_json(r.config);
  json rows = json::array();
  for (const RowSummary& s : r.rows) {
    json row;
    row["mode"] = to_string(s.row.mode);
    row["value"] = r.config.values[s.row.index];
    row["level"] = s.row.level;
    row["norm"] = s.row.norm;
    row["theory"] = {{"value", s.row.theory.value},
                     {"tau_star", s.row.theory.tau_star},
                     {"method", to_string(s.row.theory.method)},
                     {"error_estimate", s.row.theory.error_estimate}};
    row["m_grid"] = s.row.m_grid;
    row["successes"] = s.successes;
    row["trials"] = s.trials;
    row["non_converged"] = s.non_converged;
    row["non_converged_rate"] = s.trials > 0 ? static_cast<double>(s.non_converged) / s.trials : 0.0;
    json cov = json::array();
    for (int a = 0; a < 2; ++a)
      cov.push_back(json::array({finite_or_null(s.fit.covariance(a, 0)), finite_or_null(s.fit.covariance(a, 1))}));
    row["fit"] = {{"m50", finite_or_null(s.fit.m50)},
                  {"m50_lo", finite_or_null(s.fit.m50_lo)},
                  {"m50_hi", finite_or_null(s.fit.m50_hi)},
                  {"intercept", s.fit.intercept},
                  {"slope", s.fit.slope},
                  {"covariance", cov},
                  {"bracket_only", s.fit.bracket_only}};
    row["m50_over_theory"] = finite_or_null(s.fit.m50 / s.row.theory.value);
    row["trend"] = {{"violations", s.trend.violations},
                    {"max_z", s.trend.max_z},
                    {"critical_z", s.trend.critical_z}};
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

}  // namespace pocs
