#pragma once

// The two discrete Riemann curvatures, their coordinate contraction, and the
// continuous-limit convergence harness.

#include "dqwgeom/lorentz.hpp"
#include "dqwgeom/theta.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dqwgeom {

/// rho_s / eps^2 tends to kContinuumSign * R_0101 / 2 (R_0101 = d^2 a / dt^2 for a(t) = 1/cos theta).
inline constexpr double kContinuumSign = 1.0;

struct CurvatureField {
  ScalarField rho;   // real part
  ScalarField imag;  // imaginary residue, diagnostic only

  double max_abs() const {
    double m = 0.0;
    for (int j = rho.j_begin(); j < rho.j_end(); ++j)
      for (int p = 0; p < rho.P(); ++p)
        if (std::isfinite(rho.at(j, p))) m = std::max(m, std::abs(rho.at(j, p)));
    return m;
  }
  double max_imag() const {
    double m = 0.0;
    for (int j = imag.j_begin(); j < imag.j_end(); ++j)
      for (int p = 0; p < imag.P(); ++p)
        if (std::isfinite(imag.at(j, p))) m = std::max(m, std::abs(imag.at(j, p)));
    return m;
  }
};

namespace detail {

/// (X0-- / X1-- - X0++ / X1++) / 2 with numerators and denominators from separate fields.
inline ComplexField half_ratio_difference(const MatrixField& num, const MatrixField& den) {
  const int jb = std::max(num.j_begin(), den.j_begin());
  const int je = std::min(num.j_end(), den.j_end());
  return map_sites<complex_t>(num.lattice(), jb, je, [&](int j, int p) {
    const Mat2& n = num.at(j, p);
    const Mat2& d = den.at(j, p);
    if (d(0, 0) == 0.0 || d(1, 1) == 0.0)
      throw NumericError("rho_slow: vanishing diagonal denominator at " + site_str(j, p));
    return 0.5 * (n(0, 0) / d(0, 0) - n(1, 1) / d(1, 1));
  });
}

inline CurvatureField split_complex(const ComplexField& z) {
  CurvatureField c{map_sites<double>(z.lattice(), z.j_begin(), z.j_end(), [&](int j, int p) { return z.at(j, p).real(); }),
                   map_sites<double>(z.lattice(), z.j_begin(), z.j_end(), [&](int j, int p) { return z.at(j, p).imag(); })};
  return c;
}

inline CurvatureField slow_curvature(const MatrixField& a0_num, const MatrixField& a1_den, const MatrixField& b0_num,
                                     const MatrixField& b1_den) {
  const ComplexField time_part = d_p(half_ratio_difference(a0_num, a1_den));
  const ComplexField space_part = d_j(half_ratio_difference(b0_num, b1_den));
  return split_complex(zip_sites(space_part, time_part, [](complex_t s, complex_t t) { return s - t; }));
}

}  // namespace detail

/// rho_s = D_j[(B0-- / B1-- - B0++ / B1++)/2] - D_p[(A0-- / A1-- - A0++ / A1++)/2], in b_alpha.
inline CurvatureField rho_slow(const TimeConnection& a, const SpaceConnection& b) {
  return detail::slow_curvature(a.A0, a.A1, b.B0, b.B1);
}

/// rho_s(Lambda): boosted zeroth components over the unboosted first components.
inline CurvatureField rho_slow_transformed(const TimeConnection& a, const SpaceConnection& b,
                                          const ScalarField& lambda, double cap = kDefaultLambdaCap) {
  const BoostedConnection boosted = boost_connection(a, b, lambda, cap);
  return detail::slow_curvature(boosted.time.A0, a.A1, boosted.space.B0, b.B1);
}

/// rho*(0) = -D_p L_j(A*, A) + D_j L_p(B*, B) for a reference connection (A*, B*).
inline CurvatureField rho_star(const TimeConnection& a, const SpaceConnection& b, const TimeConnection& a_ref,
                               const SpaceConnection& b_ref) {
  const ScalarField lj = recover_DjLambda(a_ref, a);
  const ScalarField lp = recover_DpLambda(b_ref, b);
  const ScalarField rho = zip_sites(d_j(lp), d_p(lj), [](double s, double t) { return s - t; });
  return {rho, map_sites<double>(rho.lattice(), rho.j_begin(), rho.j_end(), [](int, int) { return 0.0; })};
}

/// Coordinate component R_{0101} = rho (E^0_0 E^1_1 - E^0_1 E^1_0).
inline ScalarField mixed_to_coordinate(const ScalarField& rho, const GeometryField& geom) {
  return zip_sites(rho, geom, [](double v, const GeometrySite& g) {
    if (g.degenerate()) return std::numeric_limits<double>::quiet_NaN();
    return v * (g.E(0, 0) * g.E(1, 1) - g.E(0, 1) * g.E(1, 0));
  });
}

/// Scalar curvature in 2D: g^{mu alpha} g^{nu beta} R_{mu nu alpha beta} = 2 R_{0101} det(g^{..}),
/// with det(g^{..}) = g^00 g^11 - (g^01)^2. Flat (R = 0) gives 0.
inline ScalarField ricci_scalar(const ScalarField& r_coord, const GeometryField& geom) {
  return zip_sites(r_coord, geom, [](double v, const GeometrySite& g) {
    if (g.degenerate()) return std::numeric_limits<double>::quiet_NaN();
    return 2.0 * v * (g.g00 * g.g11 - g.g01 * g.g01);
  });
}

inline double continuum_scalar_curvature(double r0101, double a) {
  // metric diag(1, -a^2): R_coord = R_0101 * a, det(g^..) = -1/a^2
  return 2.0 * (r0101 * a) * (-1.0 / (a * a));
}

/// Continuum reference for ds^2 = dt^2 - a(t)^2 dx^2: omega_101 = da/dt, R_0101 = d^2a/dt^2,
/// both by Richardson-extrapolated central differences of a(t).
class ContinuousOracle {
 public:
  explicit ContinuousOracle(std::function<double(double)> a, double h = 1e-2) : a_(std::move(a)), h_(h) {}

  /// a(t) = 1 / cos(theta(t)) for a time-profile theta.
  static ContinuousOracle from_theta(const ThetaSpec& spec) {
    if (spec.kind == ThetaSpec::Kind::Full)
      throw ConfigError("continuous oracle needs theta depending on t only");
    return ContinuousOracle([spec](double t) {
      const double th = spec.kind == ThetaSpec::Kind::Constant ? spec.value : eval_expr(*spec.tree, t, 0.0);
      return 1.0 / std::cos(th);
    });
  }

  double a(double t) const { return a_(t); }
  double omega_101(double t) const { return richardson([&](double h) { return (a_(t + h) - a_(t - h)) / (2 * h); }); }
  double riemann_0101(double t) const {
    return richardson([&](double h) { return (a_(t + h) - 2 * a_(t) + a_(t - h)) / (h * h); });
  }

 private:
  // Second-order central differences, three levels of Richardson elimination.
  template <typename F>
  double richardson(F&& f) const {
    double d[4];
    for (int k = 0; k < 4; ++k) d[k] = f(h_ / std::pow(2.0, k));
    for (int level = 1; level < 4; ++level) {
      const double factor = std::pow(4.0, level);
      for (int k = 3; k >= level; --k) d[k] = (factor * d[k] - d[k - 1]) / (factor - 1.0);
    }
    return d[3];
  }

  std::function<double(double)> a_;
  double h_;
};

struct ConvergenceRow {
  double eps = 0.0;
  int slice = 0;
  double rho_scaled = 0.0;  // rho_s / eps^2 at the probe
  double oracle = 0.0;      // kContinuumSign * R_0101(t_probe) / 2
  double error = 0.0;
  std::optional<double> order;  // observed order against the previous row
  std::string status = "ok";
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double t_probe = 0.0;
  /// Richardson extrapolation of rho_s / eps^2 from the last two rows (first-order error model).
  std::optional<double> extrapolated;
};

/// rho_s at one probe time for a t-only theta on a fresh lattice of spacing eps.
inline ConvergenceRow probe_rho_slow(const ThetaSpec& theta, double eps, double t_probe, int P = 8) {
  ConvergenceRow row;
  row.eps = eps;
  row.slice = static_cast<int>(std::lround(t_probe / eps));
  const Lattice lat = make_lattice(P, row.slice + 6, eps);
  const WalkConnection wc = build_connection(sample_theta(theta, lat));
  const CurvatureField rho = rho_slow(wc.time, wc.space);
  if (!rho.rho.valid(row.slice)) {
    row.status = "probe outside valid range";
    return row;
  }
  const double v = rho.rho.at(row.slice, 0);
  if (!std::isfinite(v)) {
    row.status = "degenerate site at probe";
    return row;
  }
  row.rho_scaled = v / (eps * eps);
  return row;
}

inline ConvergenceTable convergence_study(const ThetaSpec& theta, const std::vector<double>& eps_list, double t_probe) {
  if (theta.kind == ThetaSpec::Kind::Full) throw ConfigError("convergence_study: theta must depend on t only");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("convergence_study: eps_list must be decreasing");
  const ContinuousOracle oracle = ContinuousOracle::from_theta(theta);
  const double reference = kContinuumSign * 0.5 * oracle.riemann_0101(t_probe);
  ConvergenceTable table;
  table.t_probe = t_probe;
  std::optional<ConvergenceRow> prev;
  for (double eps : eps_list) {
    ConvergenceRow row = probe_rho_slow(theta, eps, t_probe);
    row.oracle = reference;
    if (row.status == "ok") {
      row.error = std::abs(row.rho_scaled - reference);
      if (prev && prev->error > 0.0 && row.error > 0.0)
        row.order = std::log(prev->error / row.error) / std::log(prev->eps / row.eps);
    }
    table.rows.push_back(row);
    prev = row.status == "ok" ? std::optional<ConvergenceRow>(row) : std::nullopt;
  }
  std::vector<const ConvergenceRow*> ok;
  for (const auto& r : table.rows)
    if (r.status == "ok") ok.push_back(&r);
  if (ok.size() >= 2) {
    const ConvergenceRow& coarse = *ok[ok.size() - 2];
    const ConvergenceRow& fine = *ok.back();
    const double ratio = coarse.eps / fine.eps;
    table.extrapolated = (ratio * fine.rho_scaled - coarse.rho_scaled) / (ratio - 1.0);
  }
  return table;
}

}  // namespace dqwgeom
