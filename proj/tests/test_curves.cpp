#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pocs/curves.hpp"
#include "pocs/thresholds.hpp"

using namespace pocs;

TEST(Curves, LogGridEndsExactly) {
  RatioCurveConfig c;
  c.curves = {CurveSpec{}};
  c.points = 7;
  const std::vector<double> g = ratio_grid(c);
  ASSERT_EQ(g.size(), 7u);
  EXPECT_EQ(g.front(), 1e-3);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_NEAR(g[3], std::sqrt(1e-3), 1e-15);
}

TEST(Curves, SpCurveMatchesRatio) {
  const RatioCurveConfig c = ratio_config_from_json(
      {{"schema", kRatioConfigSchema}, {"family", "sp"}, {"u", {{"points", 5}}}, {"curves", {{{"v", 0.6}}}}});
  const std::vector<RatioPoint> pts = ratio_curve(c);
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_EQ(pts[0].ratio, ratio_sp(1e-3, 0.6));
  EXPECT_NEAR(pts.back().ratio, 1.0, 1e-6);
  EXPECT_EQ(pts[0].curve, "v=0.6");
}

TEST(Curves, LrCurveLastPointIsOne) {
  RatioCurveConfig c;
  c.family = CurveFamily::lr;
  c.curves = {CurveSpec{"a", 1.0, 0.6, 1.0, 0.0}};
  c.points = 3;
  const std::vector<RatioPoint> pts = ratio_curve(c);
  EXPECT_EQ(pts[0].ratio, ratio_lr(1e-3, 1.0, 0.6));
  EXPECT_NEAR(pts.back().ratio, 1.0, 1e-6);
}

TEST(Curves, FixedNFamily) {
  const RatioCurveConfig c = ratio_config_from_json({{"schema", kRatioConfigSchema},
                                                     {"family", "sparse_fixed_n"},
                                                     {"n", 100},
                                                     {"s", {{"min", 1}, {"max", 10}, {"step", 4}}},
                                                     {"curves", {{{"a", 0.7}, {"b", 0.3}}}}});
  const std::vector<RatioPoint> pts = ratio_curve(c);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts.back().x, 10.0);
  const double l1 = 0.7 * std::sqrt(5.0) + 0.3;
  EXPECT_EQ(pts[1].ratio, zeta_hat_po_sparse(100, 5, l1).value / zeta_ln_sparse(100, 5).value);
  for (const RatioPoint& p : pts) EXPECT_LT(p.ratio, 1.0);
}

TEST(Curves, ConfigErrorsCarryPath) {
  try {
    ratio_config_from_json({{"schema", kRatioConfigSchema}, {"family", "sp"}, {"curves", {{{"v", 1.5}}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "/curves/0/v");
  }
  try {
    ratio_config_from_json({{"schema", kRatioConfigSchema}, {"family", "xx"}, {"curves", {{{"v", 1.0}}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "/family");
  }
}

TEST(Curves, CsvLayout) {
  RatioCurveConfig c;
  c.curves = {CurveSpec{"v=1", 1.0, 1.0, 1.0, 0.0}};
  c.points = 2;
  std::ostringstream os;
  write_ratio_csv(c, ratio_curve(c), os);
  std::istringstream in(os.str());
  std::string l;
  std::getline(in, l);
  EXPECT_EQ(l, std::string("# schema: ") + kRatioCsvSchema);
  std::getline(in, l);
  EXPECT_EQ(l, "curve,u,ratio");
  std::getline(in, l);
  EXPECT_EQ(l.rfind("\"v=1\",0.001,", 0), 0u);
}
