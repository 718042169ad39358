#ifndef POCS_CURVES_HPP
#define POCS_CURVES_HPP

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "pocs/config_error.hpp"

namespace pocs {

inline constexpr const char* kRatioConfigSchema = "pocs.ratio-config/1";
inline constexpr const char* kRatioCsvSchema = "pocs.ratio-csv/1";

// sp: R_sp(u, v) over u.  lr: R_lr(u, v, w) over u.
// sparse_fixed_n: zeta_hat_po / zeta_ln over s at fixed n with |x|_1 = a sqrt(s) + b.
enum class CurveFamily { sp, lr, sparse_fixed_n };

std::string to_string(CurveFamily f);

struct CurveSpec {
  std::string label;
  double v = 1.0;
  double w = 1.0;
  double a = 1.0;
  double b = 0.0;
};

struct RatioCurveConfig {
  std::string name = "ratio";
  CurveFamily family = CurveFamily::sp;
  std::vector<CurveSpec> curves;
  double u_min = 1e-3;
  double u_max = 1.0;
  int points = 60;
  bool log_spacing = true;
  int n = 1000;
  int s_min = 1;
  int s_max = 1000;
  int s_step = 1;

  void validate() const;
};

RatioCurveConfig ratio_config_from_json(const nlohmann::json& j);

struct RatioPoint {
  std::string curve;
  double x;
  double ratio;
};

std::vector<double> ratio_grid(const RatioCurveConfig& c);
std::vector<RatioPoint> ratio_curve(const RatioCurveConfig& c);

void write_ratio_csv(const RatioCurveConfig& c, const std::vector<RatioPoint>& pts, std::ostream& os);

}  // namespace pocs

#endif  // POCS_CURVES_HPP
