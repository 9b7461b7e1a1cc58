#include "dqwgeom/curvature.hpp"
#include "fields.hpp"
#include "time_only_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dqwgeom;
using namespace dqwtest;

namespace {

const char* kWorked = "arccos(1/(1+0.1*sin(t)))";

std::vector<double> profile(const ThetaSpec& spec, const Lattice& lat) {
  std::vector<double> th(lat.J);
  for (int j = 0; j < lat.J; ++j) th[j] = eval_theta(spec, lat, j, 0);
  return th;
}

ScalarField gauge_field(const Lattice& lat, double h) {
  ScalarField l(lat);
  for (int j = 0; j < lat.J; ++j)
    for (int p = 0; p < lat.P; ++p)
      l.at(j, p) = h * (std::sin(2 * M_PI * p / lat.P + 0.3 * j) + 0.5 * std::cos(4 * M_PI * p / lat.P - 0.2 * j));
  return l;
}

double max_gap(const CurvatureField& a, const CurvatureField& b) {
  double m = 0.0;
  for (int j = std::max(a.rho.j_begin(), b.rho.j_begin()); j < std::min(a.rho.j_end(), b.rho.j_end()); ++j)
    for (int p = 0; p < a.rho.P(); ++p) m = std::max(m, std::abs(a.rho.at(j, p) - b.rho.at(j, p)));
  return m;
}

}  // namespace

TEST(SlowCurvature, ConstantAngleIsFlat) {
  for (double th : {0.0, 0.3, -1.1}) {
    const Lattice lat = make_lattice(16, 12, 0.1);
    const WalkConnection wc = build_connection(ScalarField(lat, th));
    const CurvatureField rho = rho_slow(wc.time, wc.space);
    EXPECT_FALSE(rho.rho.empty());
    EXPECT_LE(rho.max_abs(), 1e-13) << th;
    EXPECT_LE(rho.max_imag(), 1e-13) << th;
  }
}

TEST(SlowCurvature, TimeOnlyReducesToDerivativeOfB0) {
  const ThetaSpec spec = parse_theta(kWorked);
  const Lattice lat = make_lattice(8, 40, 0.05);
  const TimeOnlyOracle oracle(profile(spec, lat));
  const WalkConnection wc = build_connection(sample_theta(spec, lat));
  const CurvatureField rho = rho_slow(wc.time, wc.space);
  for (int j = rho.rho.j_begin(); j < rho.rho.j_end(); ++j) {
    const double direct = 0.5 * (wc.space.B0.at(j + 2, 1)(0, 0) - wc.space.B0.at(j, 1)(0, 0)).real();
    const double printed = -0.5 * (oracle.b0_printed(j + 2) - oracle.b0_printed(j));
    EXPECT_NEAR(rho.rho.at(j, 1), direct, 1e-15);
    EXPECT_NEAR(rho.rho.at(j, 1), printed, 1e-13);
    EXPECT_EQ(rho.imag.at(j, 1), 0.0);
  }
}

TEST(SlowCurvature, ContinuumSignIsPositive) {
  ASSERT_EQ(kContinuumSign, 1.0);
  const ThetaSpec spec = parse_theta(kWorked);
  const ContinuousOracle oracle = ContinuousOracle::from_theta(spec);
  const ConvergenceRow row = probe_rho_slow(spec, 0.0125, 1.0);
  ASSERT_EQ(row.status, "ok");
  const double half_r = 0.5 * oracle.riemann_0101(1.0);
  EXPECT_LT(half_r, 0.0);
  EXPECT_NEAR(row.rho_scaled / half_r, 1.0, 0.05);
}

TEST(SlowCurvature, GaugeGapIsSecondOrder) {
  const ThetaSpec spec = parse_theta(kWorked);
  const Lattice lat = make_lattice(64, 40, 0.05);
  const WalkConnection wc = build_connection(sample_theta(spec, lat));
  const CurvatureField base = rho_slow(wc.time, wc.space);
  const double g1 = max_gap(rho_slow_transformed(wc.time, wc.space, gauge_field(lat, 0.1)), base);
  const double g2 = max_gap(rho_slow_transformed(wc.time, wc.space, gauge_field(lat, 0.05)), base);
  ASSERT_GT(g2, 0.0);
  EXPECT_GE(std::log2(g1 / g2), 1.9);
}

TEST(StarCurvature, VanishesForBoostedReference) {
  const Lattice lat = make_lattice(32, 14, 0.1);
  std::mt19937_64 rng(11);
  const WalkConnection wc = build_connection(band_limited(lat, rng, 0.4, 0.3));
  const CurvatureField self = rho_star(wc.time, wc.space, wc.time, wc.space);
  EXPECT_EQ(self.max_abs(), 0.0);
  const BoostedConnection ref = boost_connection(wc.time, wc.space, band_limited(lat, rng, 0.0, 0.5));
  EXPECT_LT(rho_star(wc.time, wc.space, ref.time, ref.space).max_abs(), 1e-12);
}

TEST(Coordinates, TimeOnlyFactor) {
  const ThetaSpec spec = parse_theta(kWorked);
  const Lattice lat = make_lattice(8, 20, 0.05);
  const WalkConnection wc = build_connection(sample_theta(spec, lat));
  const ScalarField one(lat, 1.0);
  const ScalarField r = mixed_to_coordinate(one, wc.geometry);
  for (int j = r.j_begin(); j < r.j_end(); ++j)
    EXPECT_NEAR(r.at(j, 2), 1.0 / std::abs(std::cos(eval_theta(spec, lat, j, 2))), 1e-12);
}

TEST(Coordinates, ScalarCurvature) {
  const Lattice lat = make_lattice(8, 10, 0.1);
  const WalkConnection wc = build_connection(ScalarField(lat, 0.3));
  const ScalarField s = ricci_scalar(mixed_to_coordinate(ScalarField(lat, 0.0), wc.geometry), wc.geometry);
  for (int p = 0; p < lat.P; ++p) EXPECT_EQ(s.at(3, p), 0.0);
  // a = cosh(t - t0) has R_0101 = a, so the scalar curvature is -2 everywhere.
  for (double t : {0.5, 1.0, 2.5}) EXPECT_NEAR(continuum_scalar_curvature(std::cosh(t), std::cosh(t)), -2.0, 1e-14);
}

TEST(Oracle, CentralDifferences) {
  const ContinuousOracle o([](double t) { return std::cosh(t - 0.5); });
  EXPECT_NEAR(o.omega_101(1.2), std::sinh(0.7), 1e-10);
  EXPECT_NEAR(o.riemann_0101(1.2), std::cosh(0.7), 1e-9);
  EXPECT_THROW(ContinuousOracle::from_theta(parse_theta("0.3 + x")), ConfigError);
}

TEST(Convergence, TableShape) {
  const ConvergenceTable t = convergence_study(parse_theta(kWorked), {0.1, 0.05, 0.025, 0.0125}, 1.0);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_FALSE(t.rows[0].order.has_value());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(t.rows[i].status, "ok");
    EXPECT_EQ(t.rows[i].slice, static_cast<int>(std::lround(1.0 / t.rows[i].eps)));
    if (i > 0) {
      EXPECT_LT(t.rows[i].error, t.rows[i - 1].error);
      ASSERT_TRUE(t.rows[i].order.has_value());
      EXPECT_GT(*t.rows[i].order, 0.8);
    }
  }
  ASSERT_TRUE(t.extrapolated.has_value());
  EXPECT_NEAR(*t.extrapolated / t.rows[0].oracle, 1.0, 0.01);
}

TEST(Convergence, RejectsBadInput) {
  EXPECT_THROW(convergence_study(parse_theta("0.3 + 0.1*sin(x)"), {0.1, 0.05}, 1.0), ConfigError);
  EXPECT_THROW(convergence_study(parse_theta(kWorked), {0.1, 0.1}, 1.0), ConfigError);
  EXPECT_THROW(convergence_study(parse_theta(kWorked), {0.05, 0.1}, 1.0), ConfigError);
}

TEST(Convergence, ConstantAngleHasNoCurvature) {
  const ConvergenceTable t = convergence_study(constant_theta(0.4), {0.1, 0.05}, 1.0);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.oracle, 0.0);
    EXPECT_LT(std::abs(r.rho_scaled), 1e-9);
  }
}
