#pragma once

// Local Lorentz transformations in b_alpha and exact recovery of D_j Lambda, D_p Lambda
// from a connection and its transform.

#include "dqwgeom/connection.hpp"

#include <cmath>
#include <string>

namespace dqwgeom {

inline constexpr double kDefaultLambdaCap = 20.0;

inline void check_lambda(const ScalarField& lambda, double cap = kDefaultLambdaCap) {
  for (int j = lambda.j_begin(); j < lambda.j_end(); ++j)
    for (int p = 0; p < lambda.P(); ++p) {
      const double v = lambda.at(j, p);
      if (!std::isfinite(v) || std::abs(v) > cap)
        throw NumericError("Lorentz field |Lambda| = " + detail::fmt_number(std::abs(v)) + " exceeds cap " +
                           detail::fmt_number(cap) + " at " + site_str(j, p));
    }
}

/// r = exp(Lambda sigma_z) as a basis-change field.
inline MatrixField lorentz_matrix(const ScalarField& lambda) {
  return map_sites<Mat2>(lambda.lattice(), lambda.j_begin(), lambda.j_end(), [&](int j, int p) -> Mat2 {
    const double l = lambda.at(j, p);
    Mat2 m = Mat2::Zero();
    m(0, 0) = std::exp(l);
    m(1, 1) = std::exp(-l);
    return m;
  });
}

/// psi^- -> e^Lambda psi^-, psi^+ -> e^-Lambda psi^+.
inline Field<Spinor> boost_spinor(const Field<Spinor>& psi, const ScalarField& lambda,
                                  double cap = kDefaultLambdaCap) {
  check_lambda(lambda, cap);
  const int jb = std::max(psi.j_begin(), lambda.j_begin());
  const int je = std::min(psi.j_end(), lambda.j_end());
  return map_sites<Spinor>(psi.lattice(), jb, je, [&](int j, int p) -> Spinor {
    const double l = lambda.at(j, p);
    const Spinor& v = psi.at(j, p);
    return Spinor(std::exp(l) * v(0), std::exp(-l) * v(1));
  });
}

/// M(Lambda) = r^-1 M r: off-diagonal entries pick up e^{-2 Lambda} and e^{+2 Lambda}.
inline MatrixField boost_mass(const MatrixField& M, const ScalarField& lambda, double cap = kDefaultLambdaCap) {
  check_lambda(lambda, cap);
  const int jb = std::max(M.j_begin(), lambda.j_begin());
  const int je = std::min(M.j_end(), lambda.j_end());
  return map_sites<Mat2>(M.lattice(), jb, je, [&](int j, int p) -> Mat2 {
    const double l = lambda.at(j, p);
    Mat2 out = M.at(j, p);
    out(0, 1) *= std::exp(-2.0 * l);
    out(1, 0) *= std::exp(2.0 * l);
    return out;
  });
}

struct BoostedConnection {
  TimeConnection time;
  SpaceConnection space;
};

/// Generic basis change with r = exp(Lambda sigma_z); stays in b_alpha.
inline BoostedConnection boost_connection(const TimeConnection& a, const SpaceConnection& b,
                                          const ScalarField& lambda, double cap = kDefaultLambdaCap) {
  check_lambda(lambda, cap);
  const MatrixField r = lorentz_matrix(lambda);
  BoostedConnection out{transform_time_connection(a, r), transform_space_connection(b, r)};
  out.time.basis = a.basis;
  out.space.basis = b.basis;
  return out;
}

/// L_j(A', A) = asinh(Delta A0 / (A1-- A1++)) / 2 with
/// Delta A0 = A1++ (A0'-- - A0--) - A1-- (A0'++ - A0++). Equals D_j Lambda when A' = A(Lambda).
inline double recover_dj_lambda_at(const Mat2& a0_new, const Mat2& a0, const Mat2& a1) {
  const complex_t denom = a1(0, 0) * a1(1, 1);
  if (std::abs(denom) == 0.0 || !is_finite(denom))
    throw NumericError("recover_DjLambda: (A1)-- (A1)++ vanishes");
  const complex_t delta = a1(1, 1) * (a0_new(0, 0) - a0(0, 0)) - a1(0, 0) * (a0_new(1, 1) - a0(1, 1));
  return 0.5 * std::asinh((delta / denom).real());
}

inline ScalarField recover_DjLambda(const TimeConnection& a_new, const TimeConnection& a) {
  const int jb = std::max({a_new.A0.j_begin(), a.A0.j_begin(), a.A1.j_begin()});
  const int je = std::min({a_new.A0.j_end(), a.A0.j_end(), a.A1.j_end()});
  return map_sites<double>(a.A0.lattice(), jb, je, [&](int j, int p) {
    try {
      return recover_dj_lambda_at(a_new.A0.at(j, p), a.A0.at(j, p), a.A1.at(j, p));
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at " + site_str(j, p));
    }
  });
}

struct TanhTerms {
  complex_t S_mm, C_mm, S_pp, C_pp;
  complex_t T_mm() const { return S_mm / C_mm; }
  complex_t T_pp() const { return S_pp / C_pp; }
};

/// S and C such that T-- = tanh(2 D_p Lambda) and T++ = tanh(-2 D_p Lambda).
inline TanhTerms tanh_terms(const Mat2& b0_new, const Mat2& b1_new, const Mat2& b0, const Mat2& b1,
                            const Mat2& b2) {
  const complex_t xm = b0_new(0, 0) - b0(0, 0) + b2(0, 0) / 2.0;
  const complex_t xp = b0_new(1, 1) - b0(1, 1) + b2(1, 1) / 2.0;
  TanhTerms t;
  t.S_mm = -b1(0, 0) * xm + b2(0, 0) * b1_new(0, 0) / 2.0;
  t.C_mm = b2(0, 0) * xm - b1(0, 0) * b1_new(0, 0) / 2.0;
  t.S_pp = -b1(1, 1) * xp + b2(1, 1) * b1_new(1, 1) / 2.0;
  t.C_pp = b2(1, 1) * xp - b1(1, 1) * b1_new(1, 1) / 2.0;
  return t;
}

/// L_p(B', B) = atanh((T-- - T++)/2) / 2. Equals D_p Lambda when B' = B(Lambda).
inline double recover_dp_lambda_at(const Mat2& b0_new, const Mat2& b1_new, const Mat2& b0, const Mat2& b1,
                                   const Mat2& b2) {
  const TanhTerms t = tanh_terms(b0_new, b1_new, b0, b1, b2);
  if (std::abs(t.C_mm) == 0.0 || std::abs(t.C_pp) == 0.0)
    throw NumericError("recover_DpLambda: C-- or C++ vanishes");
  const double arg = (0.5 * (t.T_mm() - t.T_pp())).real();
  if (!(std::abs(arg) < 1.0))
    throw NumericError("recover_DpLambda: atanh argument " + detail::fmt_number(arg) + " outside (-1, 1)");
  return 0.5 * std::atanh(arg);
}

inline ScalarField recover_DpLambda(const SpaceConnection& b_new, const SpaceConnection& b) {
  const int jb = std::max({b_new.B0.j_begin(), b_new.B1.j_begin(), b.B0.j_begin(), b.B1.j_begin(), b.B2.j_begin()});
  const int je = std::min({b_new.B0.j_end(), b_new.B1.j_end(), b.B0.j_end(), b.B1.j_end(), b.B2.j_end()});
  return map_sites<double>(b.B0.lattice(), jb, je, [&](int j, int p) {
    try {
      return recover_dp_lambda_at(b_new.B0.at(j, p), b_new.B1.at(j, p), b.B0.at(j, p), b.B1.at(j, p),
                                  b.B2.at(j, p));
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at " + site_str(j, p));
    }
  });
}

}  // namespace dqwgeom
