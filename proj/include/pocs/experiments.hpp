#ifndef POCS_EXPERIMENTS_HPP
#define POCS_EXPERIMENTS_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pocs/config_error.hpp"
#include "pocs/solvers.hpp"
#include "pocs/thresholds.hpp"

namespace pocs {

inline constexpr const char* kSweepConfigSchema = "pocs.sweep-config/1";
inline constexpr const char* kSweepCsvSchema = "pocs.sweep-csv/1";
inline constexpr const char* kSweepSummarySchema = "pocs.sweep-summary/1";

// Master seed used when none is given.
inline constexpr std::uint64_t kDefaultSeed = 1;

enum class Problem { sparse, lowrank };
// Phase-only measurements, or the linear Gaussian baseline.
enum class SensingMode { phase_only, linear };
// What varies along the rows of a sweep.
enum class RowParameter { sparsity, l1_norm, rank, nuclear_norm };

std::string to_string(Problem p);
std::string to_string(SensingMode m);
std::string to_string(RowParameter r);

struct AutoGrid {
  double lo = 0.5;
  double hi = 1.5;
  int points = 11;
};

struct ExperimentConfig {
  std::string name = "sweep";
  Problem problem = Problem::sparse;
  std::vector<SensingMode> modes{SensingMode::phase_only};
  int n = 0;
  int p = 0;
  int q = 0;
  RowParameter parameter = RowParameter::sparsity;
  std::vector<double> values;
  // Sparsity (or rank) held fixed when rows vary the l1 (or nuclear) norm.
  int fixed_level = 0;
  // Explicit m grid shared by all rows; empty selects `auto_grid` around each row's theory value.
  std::vector<int> m_grid;
  AutoGrid auto_grid;
  int trials = 100;
  double success_threshold = 1e-3;
  std::uint64_t seed = kDefaultSeed;
  SolveOptions solver;

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

// One (mode, row) of a sweep with its resolved signal parameters and m grid.
struct SweepRow {
  SensingMode mode = SensingMode::phase_only;
  int index = 0;       // position in config.values
  int level = 0;       // s or r
  double norm = 0.0;   // |x|_1 or |X|_nu
  ThresholdResult theory;
  std::vector<int> m_grid;
};

std::vector<SweepRow> resolve_rows(const ExperimentConfig& c);

struct TrialOutcome {
  bool success = false;
  double distance = 0.0;
  bool converged = false;
};

TrialOutcome run_trial(const ExperimentConfig& c, const SweepRow& row, int m, int trial);

struct CellRecord {
  SensingMode mode = SensingMode::phase_only;
  int row = 0;
  int m = 0;
  int successes = 0;
  int trials = 0;
  int non_converged = 0;
};

struct BinomialPoint {
  double m;
  int successes;
  int trials;
};

// P(success | m) = 1 / (1 + exp(-(intercept + slope m))).
struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  double m50 = 0.0;
  // 95% Wald interval for m50 (delta method); for bracket-only fits, the bracket.
  double m50_lo = 0.0;
  double m50_hi = 0.0;
  // No finite maximum-likelihood estimate (separated or one-sided data).
  bool bracket_only = false;
};

LogisticFit logistic_fit(const std::vector<BinomialPoint>& points);

// Adjacent-pair one-sided two-proportion z tests for a decrease of the success
// rate with m.
struct TrendTest {
  int violations = 0;
  double max_z = 0.0;
  double critical_z = 0.0;
  bool nondecreasing() const { return violations == 0; }
};

TrendTest trend_test(const std::vector<BinomialPoint>& points, double alpha = 0.01);

struct RowSummary {
  SweepRow row;
  LogisticFit fit;
  TrendTest trend;
  int successes = 0;
  int trials = 0;
  int non_converged = 0;
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<CellRecord> cells;  // sorted by (mode, row, m)
  std::vector<RowSummary> rows;
};

struct SweepOptions {
  int workers = 1;
  // Append-only cell log; cells already present are not recomputed.
  std::filesystem::path resume_log;
  std::function<void(const CellRecord&)> on_cell;
};

SweepResult sweep(const ExperimentConfig& c, const SweepOptions& opts = {});

// Rows vary |x|_1 (or |X|_nu) at fixed sparsity (or rank).
SweepResult amplitude_sweep(const ExperimentConfig& c, const SweepOptions& opts = {});

void write_csv(const SweepResult& r, std::ostream& os);
nlohmann::json summary_json(const SweepResult& r);

}  // namespace pocs

#endif  // POCS_EXPERIMENTS_HPP
