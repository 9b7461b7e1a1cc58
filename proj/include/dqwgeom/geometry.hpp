#pragma once

// Per-site operators of the two-step equation of motion and the discrete
// metric structure read off from the eigen-structure of W sigma3.

#include "dqwgeom/core.hpp"
#include "dqwgeom/walk.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace dqwgeom {

/// W of the equation of motion D_j psi = (W sigma3) D_p psi + (W+L-1)/2 psi + W D_pp psi.
inline Mat2 local_W(const ThetaSource& th, int j, int p) {
  const double c1 = std::cos(th(j + 1, p));
  const double s1 = std::sin(th(j + 1, p));
  const double cp = std::cos(th(j, p + 1));
  const double cm = std::cos(th(j, p - 1));
  Mat2 w;
  w << complex_t(c1 * cp, 0.0), complex_t(0.0, s1 * cm), complex_t(0.0, s1 * cp), complex_t(c1 * cm, 0.0);
  return w;
}

/// L as produced by composing two steps; the (L,L) entry carries s_{j,p-1}.
inline Mat2 local_L(const ThetaSource& th, int j, int p) {
  const double c1 = std::cos(th(j + 1, p));
  const double s1 = std::sin(th(j + 1, p));
  const double sp = std::sin(th(j, p + 1));
  const double sm = std::sin(th(j, p - 1));
  Mat2 l;
  l << complex_t(s1 * sm, 0.0), complex_t(0.0, -c1 * sp), complex_t(0.0, -c1 * sm), complex_t(s1 * sp, 0.0);
  return l;
}

/// psi_{j+2,p} = plus psi_{j,p+2} + zero psi_{j,p} + minus psi_{j,p-2}.
struct TwoStepCoefficients {
  Mat2 plus;
  Mat2 zero;
  Mat2 minus;
};

/// Composes coin and shift twice at one site, with projectors onto the L and R components.
inline TwoStepCoefficients two_step_coefficients(const ThetaSource& th, int j, int p) {
  Mat2 proj_l = Mat2::Zero();
  Mat2 proj_r = Mat2::Zero();
  proj_l(0, 0) = 1.0;
  proj_r(1, 1) = 1.0;
  const Mat2 outer = coin(th(j + 1, p));
  // psi_{j+2,p} = U_{j+1,p} (P_L psi_{j+1,p+1} + P_R psi_{j+1,p-1})
  const Mat2 from_right = outer * proj_l * coin(th(j, p + 1));  // acts on T psi at p+1
  const Mat2 from_left = outer * proj_r * coin(th(j, p - 1));   // acts on T psi at p-1
  TwoStepCoefficients m;
  m.plus = from_right * proj_l;
  m.zero = from_right * proj_r + from_left * proj_l;
  m.minus = from_left * proj_r;
  return m;
}

enum class Degeneracy { None, ComplexEigenvalues, EqualEigenvalues };

inline const char* degeneracy_name(Degeneracy d) {
  switch (d) {
    case Degeneracy::None: return "none";
    case Degeneracy::ComplexEigenvalues: return "complex_eigenvalues";
    case Degeneracy::EqualEigenvalues: return "equal_eigenvalues";
  }
  return "?";
}

struct EigenPair {
  double x_minus = 0.0;
  double x_plus = 0.0;
  Degeneracy flag = Degeneracy::None;
};

/// Sites whose volume density mu = (x_+ - x_-)/2 falls below this are treated as equal roots.
/// The roots are velocities bounded by 1, so the threshold is absolute.
inline constexpr double kMinVolumeDensity = 1e-12;

/// Roots of x^2 + c_{j+1,p} (c_{j,p-1} - c_{j,p+1}) x - c_{j,p-1} c_{j,p+1}, ascending.
inline EigenPair eigenvalues_from_cosines(double c_next, double c_left, double c_right) {
  const double b = c_next * (c_left - c_right);
  const double prod = c_left * c_right;
  const double disc = b * b + 4.0 * prod;
  EigenPair e;
  if (disc < 0.0) {
    e.flag = Degeneracy::ComplexEigenvalues;
    e.x_minus = e.x_plus = -0.5 * b;
    return e;
  }
  if (0.5 * std::sqrt(disc) <= kMinVolumeDensity) {
    e.flag = Degeneracy::EqualEigenvalues;
    e.x_minus = e.x_plus = -0.5 * b;
    return e;
  }
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  const double r1 = q;
  const double r2 = -prod / q;
  e.x_minus = std::min(r1, r2);
  e.x_plus = std::max(r1, r2);
  return e;
}

inline EigenPair eigenvalues(const ThetaSource& th, int j, int p) {
  return eigenvalues_from_cosines(std::cos(th(j + 1, p)), std::cos(th(j, p - 1)), std::cos(th(j, p + 1)));
}

/// Assigns the roots to the b_- / b_+ branches: b_- carries the root of sign opposite to
/// c_{j,p-1} + c_{j,p+1}, so that W sigma3 b_- = -c_j b_- when theta depends on j only.
inline std::pair<double, double> branch_eigenvalues(const EigenPair& e, double c_left, double c_right) {
  if (c_left + c_right >= 0.0) return {e.x_minus, e.x_plus};
  return {e.x_plus, e.x_minus};
}

struct GeometrySite {
  double x_minus = 0.0;
  double x_plus = 0.0;
  double w_minus = 0.0;  // eigenvalue of W sigma3 on b_-
  double w_plus = 0.0;   // eigenvalue of W sigma3 on b_+
  Eigen::Matrix2d e = Eigen::Matrix2d::Zero();  // e(mu, a) = e^mu_a
  Eigen::Matrix2d E = Eigen::Matrix2d::Zero();  // E(a, mu) = E^a_mu
  double g00 = 0.0;
  double g01 = 0.0;
  double g11 = 0.0;
  double mu = 0.0;
  Mat2 Ws3 = Mat2::Zero();
  Mat2 r = Mat2::Zero();
  Mat2 r_inv = Mat2::Zero();
  Degeneracy flag = Degeneracy::None;

  bool degenerate() const { return flag != Degeneracy::None; }
};

/// 2-bein, inverse 2-bein, inverse metric and volume density from the two velocities.
inline GeometrySite zweibein_and_metric(double x_minus, double x_plus) {
  GeometrySite g;
  g.x_minus = x_minus;
  g.x_plus = x_plus;
  g.e << 1.0, 0.0, 0.5 * (x_plus + x_minus), 0.5 * (x_plus - x_minus);
  g.g00 = 1.0;
  g.g01 = 0.5 * (x_plus + x_minus);
  g.g11 = x_plus * x_minus;
  g.mu = 0.5 * (x_plus - x_minus);
  if (!(g.mu > kMinVolumeDensity)) {
    g.flag = Degeneracy::EqualEigenvalues;
    g.E.setConstant(std::numeric_limits<double>::quiet_NaN());
    return g;
  }
  g.E << 1.0, 0.0, -(x_plus + x_minus) / (x_plus - x_minus), 1.0 / g.mu;
  return g;
}

namespace detail {

inline Spinor eigenvector(const Mat2& a, double w) {
  const Spinor v1(a(0, 1), complex_t(w) - a(0, 0));
  const Spinor v2(complex_t(w) - a(1, 1), a(1, 0));
  return v1.squaredNorm() >= v2.squaredNorm() ? v1 : v2;
}

/// Rotates v so that v(k) is real and non-negative (falls back to the other entry if v(k) ~ 0).
inline Spinor fix_phase(Spinor v, int k) {
  int idx = k;
  if (std::abs(v(k)) <= 1e-12 * v.norm()) idx = 1 - k;
  const double mag = std::abs(v(idx));
  if (mag > 0.0) v *= std::conj(v(idx)) / mag;
  return v;
}

}  // namespace detail

struct DiagonalizingBasis {
  Mat2 r;
  Mat2 r_inv;
};

/// Columns of r are the eigenvectors b_- (eigenvalue w_minus) and b_+ of W sigma3, each
/// normalised so that mu * |b|^2 = 1. Phases: b_- has a real non-negative lower entry,
/// b_+ a real non-negative upper entry.
inline DiagonalizingBasis diagonalizing_basis(const Mat2& ws3, double mu, double w_minus, double w_plus) {
  if (!(mu > kMinVolumeDensity) || w_minus == w_plus)
    throw NumericError("diagonalizing_basis: degenerate site (mu = " + detail::fmt_number(mu) + ")");
  Spinor bm = detail::fix_phase(detail::eigenvector(ws3, w_minus), 1);
  Spinor bp = detail::fix_phase(detail::eigenvector(ws3, w_plus), 0);
  bm /= std::sqrt(mu * bm.squaredNorm());
  bp /= std::sqrt(mu * bp.squaredNorm());
  DiagonalizingBasis out;
  out.r.col(0) = bm;
  out.r.col(1) = bp;
  const complex_t det = out.r(0, 0) * out.r(1, 1) - out.r(0, 1) * out.r(1, 0);
  out.r_inv << out.r(1, 1) / det, -out.r(0, 1) / det, -out.r(1, 0) / det, out.r(0, 0) / det;
  return out;
}

inline Mat2 nan_matrix() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return Mat2::Constant(complex_t(nan, nan));
}

/// Full geometry at one site. Degenerate sites carry NaN in r, r_inv and E.
inline GeometrySite geometry_site(const ThetaSource& th, int j, int p) {
  const double c_left = std::cos(th(j, p - 1));
  const double c_right = std::cos(th(j, p + 1));
  const EigenPair ev = eigenvalues_from_cosines(std::cos(th(j + 1, p)), c_left, c_right);
  GeometrySite g = zweibein_and_metric(ev.x_minus, ev.x_plus);
  g.Ws3 = local_W(th, j, p) * sigma3();
  if (ev.flag != Degeneracy::None) g.flag = ev.flag;
  if (g.degenerate()) {
    g.r = g.r_inv = nan_matrix();
    g.w_minus = g.w_plus = std::numeric_limits<double>::quiet_NaN();
    g.E.setConstant(std::numeric_limits<double>::quiet_NaN());
    return g;
  }
  const auto [wm, wp] = branch_eigenvalues(ev, c_left, c_right);
  g.w_minus = wm;
  g.w_plus = wp;
  const DiagonalizingBasis b = diagonalizing_basis(g.Ws3, g.mu, wm, wp);
  g.r = b.r;
  g.r_inv = b.r_inv;
  return g;
}

using GeometryField = Field<GeometrySite>;

/// Geometry on slices [0, J-1): slice j reads theta on slices j and j+1.
inline GeometryField build_geometry(const ScalarField& theta) {
  const ThetaSource th(theta);
  return map_sites<GeometrySite>(theta.lattice(), theta.j_begin(), theta.j_end() - 1,
                                 [&](int j, int p) { return geometry_site(th, j, p); });
}

template <typename F>
auto project(const GeometryField& g, F&& f) {
  using R = std::decay_t<decltype(f(std::declval<const GeometrySite&>()))>;
  return map_sites<R>(g.lattice(), g.j_begin(), g.j_end(), [&](int j, int p) { return R(f(g.at(j, p))); });
}

inline std::size_t count_degenerate(const GeometryField& g) {
  std::size_t n = 0;
  for (int j = g.j_begin(); j < g.j_end(); ++j)
    for (int p = 0; p < g.P(); ++p) n += g.at(j, p).degenerate() ? 1 : 0;
  return n;
}

}  // namespace dqwgeom
