#include "pocs/curves.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "json_fields.hpp"
#include "pocs/thresholds.hpp"

namespace pocs {

namespace {

using nlohmann::json;
using detail::number_at;
using detail::read_optional;
using detail::required;

const std::vector<std::pair<const char*, CurveFamily>> kFamilies{
    {"sp", CurveFamily::sp}, {"lr", CurveFamily::lr}, {"sparse_fixed_n", CurveFamily::sparse_fixed_n}};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string default_label(CurveFamily f, const CurveSpec& c) {
  switch (f) {
    case CurveFamily::sp: return "v=" + fmt(c.v);
    case CurveFamily::lr: return "v=" + fmt(c.v) + " w=" + fmt(c.w);
    case CurveFamily::sparse_fixed_n: return "l1=" + fmt(c.a) + "*sqrt(s)+" + fmt(c.b);
  }
  return "";
}

}  // namespace

std::string to_string(CurveFamily f) {
  for (const auto& [name, value] : kFamilies)
    if (value == f) return name;
  return "unknown";
}

void RatioCurveConfig::validate() const {
  if (curves.empty()) throw ConfigError("/curves", "must be nonempty");
  if (family == CurveFamily::sparse_fixed_n) {
    if (n < 1) throw ConfigError("/n", "must be >= 1");
    if (s_min < 1 || s_min > n) throw ConfigError("/s/min", "must lie in [1, n]");
    if (s_max < s_min || s_max > n) throw ConfigError("/s/max", "must lie in [s/min, n]");
    if (s_step < 1) throw ConfigError("/s/step", "must be >= 1");
    for (std::size_t i = 0; i < curves.size(); ++i) {
      const CurveSpec& c = curves[i];
      const std::string path = "/curves/" + std::to_string(i);
      // |x|_1 = a sqrt(s) + b must stay in [1, sqrt(s)] for every s >= 1.
      if (!(c.a >= 0.0 && c.a <= 1.0)) throw ConfigError(path + "/a", "must lie in [0, 1]");
      if (std::abs(c.a + c.b - 1.0) > 1e-12) throw ConfigError(path + "/b", "a + b must equal 1");
    }
  } else {
    if (!(u_min > 0.0 && u_min <= 1.0)) throw ConfigError("/u/min", "must lie in (0, 1]");
    if (!(u_max >= u_min && u_max <= 1.0)) throw ConfigError("/u/max", "must lie in [u/min, 1]");
    if (points < 1) throw ConfigError("/u/points", "must be >= 1");
    for (std::size_t i = 0; i < curves.size(); ++i) {
      const CurveSpec& c = curves[i];
      const std::string path = "/curves/" + std::to_string(i);
      if (!(c.v > 0.0 && c.v <= 1.0)) throw ConfigError(path + "/v", "must lie in (0, 1]");
      if (family == CurveFamily::lr && !(c.w > 0.0 && c.w <= 1.0))
        throw ConfigError(path + "/w", "must lie in (0, 1]");
    }
  }
}

RatioCurveConfig ratio_config_from_json(const json& j) {
  detail::check_schema(j, kRatioConfigSchema);
  RatioCurveConfig c;
  if (j.contains("name")) c.name = detail::string_at(j["name"], "/name");
  c.family = detail::enum_from(required(j, "family", ""), "/family", kFamilies);
  const json& curves = required(j, "curves", "");
  if (!curves.is_array()) throw ConfigError("/curves", "expected an array");
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const std::string path = "/curves/" + std::to_string(i);
    if (!curves[i].is_object()) throw ConfigError(path, "expected an object");
    CurveSpec s;
    read_optional(curves[i], "v", path, s.v);
    read_optional(curves[i], "w", path, s.w);
    read_optional(curves[i], "a", path, s.a);
    read_optional(curves[i], "b", path, s.b);
    s.label = curves[i].contains("label") ? detail::string_at(curves[i]["label"], path + "/label")
                                          : default_label(c.family, s);
    c.curves.push_back(s);
  }
  if (c.family == CurveFamily::sparse_fixed_n) {
    c.n = number_at<int>(required(j, "n", ""), "/n");
    c.s_max = c.n;
    if (j.contains("s")) {
      read_optional(j["s"], "min", "/s", c.s_min);
      read_optional(j["s"], "max", "/s", c.s_max);
      read_optional(j["s"], "step", "/s", c.s_step);
    }
  } else if (j.contains("u")) {
    const json& u = j["u"];
    if (!u.is_object()) throw ConfigError("/u", "expected an object");
    read_optional(u, "min", "/u", c.u_min);
    read_optional(u, "max", "/u", c.u_max);
    read_optional(u, "points", "/u", c.points);
    if (u.contains("spacing")) {
      const std::string sp = detail::string_at(u["spacing"], "/u/spacing");
      if (sp != "log" && sp != "linear") throw ConfigError("/u/spacing", "expected \"log\" or \"linear\"");
      c.log_spacing = sp == "log";
    }
  }
  c.validate();
  return c;
}

std::vector<double> ratio_grid(const RatioCurveConfig& c) {
  std::vector<double> xs;
  if (c.family == CurveFamily::sparse_fixed_n) {
    for (int s = c.s_min; s <= c.s_max; s += c.s_step) xs.push_back(s);
    if (xs.back() != c.s_max) xs.push_back(c.s_max);
    return xs;
  }
  for (int k = 0; k < c.points; ++k) {
    if (c.points == 1) {
      xs.push_back(c.u_min);
      break;
    }
    const double t = static_cast<double>(k) / (c.points - 1);
    xs.push_back(c.log_spacing ? c.u_min * std::pow(c.u_max / c.u_min, t) : c.u_min + (c.u_max - c.u_min) * t);
  }
  xs.back() = c.points == 1 ? c.u_min : c.u_max;
  return xs;
}

std::vector<RatioPoint> ratio_curve(const RatioCurveConfig& c) {
  c.validate();
  const std::vector<double> xs = ratio_grid(c);
  std::vector<RatioPoint> out;
  for (const CurveSpec& spec : c.curves) {
    for (double x : xs) {
      double r = 0.0;
      switch (c.family) {
        case CurveFamily::sp: r = ratio_sp(x, spec.v); break;
        case CurveFamily::lr: r = ratio_lr(x, spec.v, spec.w); break;
        case CurveFamily::sparse_fixed_n: {
          const int s = static_cast<int>(x);
          const double l1 = std::min(spec.a * std::sqrt(x) + spec.b, std::sqrt(x));
          r = zeta_hat_po_sparse(c.n, s, std::max(l1, 1.0)).value / zeta_ln_sparse(c.n, s).value;
          break;
        }
      }
      out.push_back({spec.label, x, r});
    }
  }
  return out;
}

void write_ratio_csv(const RatioCurveConfig& c, const std::vector<RatioPoint>& pts, std::ostream& os) {
  os << "# schema: " << kRatioCsvSchema << '\n';
  os << "curve," << (c.family == CurveFamily::sparse_fixed_n ? "s" : "u") << ",ratio\n";
  char buf[64];
  for (const RatioPoint& p : pts) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", p.x, p.ratio);
    os << '"' << p.curve << '"' << buf;
  }
}

}  // namespace pocs
