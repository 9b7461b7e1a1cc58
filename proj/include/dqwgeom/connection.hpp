#pragma once

// Discrete space-time connection (A, B): basis-change laws, the residual operator N,
// its split into mass and diagonal part, and the trace-free solve for A0 and B0.

#include "dqwgeom/calculus.hpp"
#include "dqwgeom/geometry.hpp"

#include <utility>

namespace dqwgeom {

/// Time connection: D_j(A) psi = A1 D_j psi + A0 psi.
struct TimeConnection {
  Basis basis = Basis::Original;
  MatrixField A0;
  MatrixField A1;
};

/// Space connection: D_p(B) psi = B1 D_p psi + B0 psi + B2 D_pp psi.
struct SpaceConnection {
  Basis basis = Basis::Original;
  MatrixField B0;
  MatrixField B1;
  MatrixField B2;
};

inline Basis other_basis(Basis b) { return b == Basis::Original ? Basis::Diagonal : Basis::Original; }

inline MatrixField invert(const MatrixField& r) {
  return map_sites<Mat2>(r.lattice(), r.j_begin(), r.j_end(), [&](int j, int p) -> Mat2 {
    return r.at(j, p).inverse();
  });
}

/// Rewrites A in the basis b' = r b:
///   A0' = r^-1 A0 r + r^-1 A1 D_j r,   A1' = r^-1 A1 r (1 + 2 r^-1 D_j r).
inline TimeConnection transform_time_connection(const TimeConnection& a, const MatrixField& r) {
  const MatrixField dr = d_j(r);
  const int jb = std::max({a.A0.j_begin(), a.A1.j_begin(), dr.j_begin()});
  const int je = std::min({a.A0.j_end(), a.A1.j_end(), dr.j_end()});
  const Lattice& lat = r.lattice();
  TimeConnection out{other_basis(a.basis), MatrixField(lat, jb, je), MatrixField(lat, jb, je)};
  const Mat2 id = Mat2::Identity();
  parallel_slices(jb, je, [&](int j) {
    for (int p = 0; p < lat.P; ++p) {
      const Mat2 ri = r.at(j, p).inverse();
      const Mat2& rr = r.at(j, p);
      const Mat2& d = dr.at(j, p);
      out.A0.at(j, p) = ri * a.A0.at(j, p) * rr + ri * a.A1.at(j, p) * d;
      out.A1.at(j, p) = ri * a.A1.at(j, p) * rr * (id + 2.0 * ri * d);
    }
  });
  return out;
}

/// Rewrites B in the basis b' = r b:
///   B0' = r^-1 B0 r + r^-1 B1 D_p r + r^-1 B2 D_pp r
///   B1' = r^-1 B1 r (1 + 2 r^-1 D_pp r) + 2 r^-1 B2 D_p r
///   B2' = r^-1 B2 r (1 + 2 r^-1 D_pp r) + 2 r^-1 B1 D_p r
inline SpaceConnection transform_space_connection(const SpaceConnection& b, const MatrixField& r) {
  const MatrixField dp = d_p(r);
  const MatrixField dpp = d_pp(r);
  const int jb = std::max({b.B0.j_begin(), b.B1.j_begin(), b.B2.j_begin(), r.j_begin()});
  const int je = std::min({b.B0.j_end(), b.B1.j_end(), b.B2.j_end(), r.j_end()});
  const Lattice& lat = r.lattice();
  SpaceConnection out{other_basis(b.basis), MatrixField(lat, jb, je), MatrixField(lat, jb, je),
                      MatrixField(lat, jb, je)};
  const Mat2 id = Mat2::Identity();
  parallel_slices(jb, je, [&](int j) {
    for (int p = 0; p < lat.P; ++p) {
      const Mat2 ri = r.at(j, p).inverse();
      const Mat2& rr = r.at(j, p);
      const Mat2& b0 = b.B0.at(j, p);
      const Mat2& b1 = b.B1.at(j, p);
      const Mat2& b2 = b.B2.at(j, p);
      const Mat2 stretch = id + 2.0 * ri * dpp.at(j, p);
      out.B0.at(j, p) = ri * b0 * rr + ri * b1 * dp.at(j, p) + ri * b2 * dpp.at(j, p);
      out.B1.at(j, p) = ri * b1 * rr * stretch + 2.0 * ri * b2 * dp.at(j, p);
      out.B2.at(j, p) = ri * b2 * rr * stretch + 2.0 * ri * b1 * dp.at(j, p);
    }
  });
  return out;
}

/// N in b_alpha: (W+L-1)/2 - r^-1 D_j r + (W sigma3) r^-1 (D_p r + sigma3 D_pp r),
/// with W+L-1 and W sigma3 taken in b_alpha components. Valid where D_j r is.
inline MatrixField compute_N(const MatrixField& W, const MatrixField& L, const MatrixField& r) {
  const MatrixField dj = d_j(r);
  const MatrixField dp = d_p(r);
  const MatrixField dpp = d_pp(r);
  const int jb = std::max({W.j_begin(), L.j_begin(), dj.j_begin()});
  const int je = std::min({W.j_end(), L.j_end(), dj.j_end()});
  const Mat2 s3 = sigma3();
  const Mat2 id = Mat2::Identity();
  return map_sites<Mat2>(r.lattice(), jb, je, [&](int j, int p) -> Mat2 {
    const Mat2 ri = r.at(j, p).inverse();
    const Mat2& rr = r.at(j, p);
    const Mat2 ws3 = ri * W.at(j, p) * s3 * rr;
    return 0.5 * ri * (W.at(j, p) + L.at(j, p) - id) * rr - ri * dj.at(j, p) +
           ws3 * ri * (dp.at(j, p) + s3 * dpp.at(j, p));
  });
}

struct MassSplit {
  MatrixField M;  // anti-diagonal
  MatrixField O;  // diagonal
};

/// i M = off-diagonal part of N, O = diagonal part.
inline Mat2 mass_of(const Mat2& n) {
  Mat2 m = Mat2::Zero();
  m(0, 1) = -I * n(0, 1);
  m(1, 0) = -I * n(1, 0);
  return m;
}
inline Mat2 diagonal_of(const Mat2& n) {
  Mat2 o = Mat2::Zero();
  o(0, 0) = n(0, 0);
  o(1, 1) = n(1, 1);
  return o;
}

inline MassSplit split_mass(const MatrixField& N) {
  return {map_sites<Mat2>(N.lattice(), N.j_begin(), N.j_end(), [&](int j, int p) { return mass_of(N.at(j, p)); }),
          map_sites<Mat2>(N.lattice(), N.j_begin(), N.j_end(),
                          [&](int j, int p) { return diagonal_of(N.at(j, p)); })};
}

struct TraceFreeSolution {
  complex_t a;  // A0 = diag(a, -a)
  complex_t b;  // B0 = diag(b, -b)
};

/// Solves w_- b - a = O_--, -w_+ b + a = O_++ for the trace-free diagonal A0 and B0.
inline TraceFreeSolution solve_A0_B0(const Mat2& O, double w_minus, double w_plus) {
  if (!(w_minus != w_plus) || !std::isfinite(w_minus) || !std::isfinite(w_plus))
    throw NumericError("solve_A0_B0: W sigma3 has coinciding diagonal entries in b_alpha");
  TraceFreeSolution s;
  s.b = (O(0, 0) + O(1, 1)) / (w_minus - w_plus);
  s.a = w_minus * s.b - O(0, 0);
  return s;
}

inline Mat2 diag_pm(const complex_t& v) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = v;
  m(1, 1) = -v;
  return m;
}

/// Everything the walk defines on the lattice, with the connection in b_alpha.
struct WalkConnection {
  Lattice lattice;
  GeometryField geometry;  // [0, J-1)
  MatrixField W, L;        // [0, J-1), b_A components
  MatrixField r, r_inv;    // [0, J-1)
  MatrixField Ws3;         // [0, J-3), b_alpha components
  MatrixField N, M, O;     // [0, J-3), b_alpha
  TimeConnection time;     // b_alpha, [0, J-3)
  SpaceConnection space;   // b_alpha, [0, J-3)
};

inline TimeConnection identity_time_connection(const Lattice& lat, int jb, int je) {
  return {Basis::Original, MatrixField(lat, jb, je, Mat2::Zero()), MatrixField(lat, jb, je, Mat2::Identity())};
}

inline SpaceConnection canonical_space_connection(const Lattice& lat, int jb, int je) {
  return {Basis::Original, MatrixField(lat, jb, je, Mat2::Zero()), MatrixField(lat, jb, je, Mat2::Identity()),
          MatrixField(lat, jb, je, sigma3())};
}

/// Builds geometry, N, M and the b_alpha connection from a sampled theta field.
/// Degenerate sites propagate as NaN; the geometry field records why.
inline WalkConnection build_connection(const ScalarField& theta) {
  WalkConnection wc;
  const Lattice& lat = theta.lattice();
  wc.lattice = lat;
  const ThetaSource th(theta);
  const int jb = theta.j_begin();
  const int je = theta.j_end() - 1;
  wc.geometry = build_geometry(theta);
  wc.W = map_sites<Mat2>(lat, jb, je, [&](int j, int p) { return local_W(th, j, p); });
  wc.L = map_sites<Mat2>(lat, jb, je, [&](int j, int p) { return local_L(th, j, p); });
  wc.r = project(wc.geometry, [](const GeometrySite& g) { return g.r; });
  wc.r_inv = project(wc.geometry, [](const GeometrySite& g) { return g.r_inv; });

  // A1 = 1, B1 = 1, B2 = sigma3 in b_A; their b_alpha components follow from the laws.
  const TimeConnection a_orig = identity_time_connection(lat, jb, je);
  const SpaceConnection b_orig = canonical_space_connection(lat, jb, je);
  TimeConnection a_alpha = transform_time_connection(a_orig, wc.r);
  SpaceConnection b_alpha = transform_space_connection(b_orig, wc.r);

  wc.N = compute_N(wc.W, wc.L, wc.r);
  MassSplit split = split_mass(wc.N);
  wc.M = std::move(split.M);
  wc.O = std::move(split.O);
  const int cjb = wc.N.j_begin();
  const int cje = wc.N.j_end();
  wc.Ws3 = map_sites<Mat2>(lat, cjb, cje, [&](int j, int p) -> Mat2 {
    return wc.r_inv.at(j, p) * wc.geometry.at(j, p).Ws3 * wc.r.at(j, p);
  });

  MatrixField A0(lat, cjb, cje), B0(lat, cjb, cje);
  parallel_slices(cjb, cje, [&](int j) {
    for (int p = 0; p < lat.P; ++p) {
      const GeometrySite& g = wc.geometry.at(j, p);
      if (g.degenerate()) {
        A0.at(j, p) = B0.at(j, p) = nan_matrix();
        continue;
      }
      const TraceFreeSolution s = solve_A0_B0(wc.O.at(j, p), g.w_minus, g.w_plus);
      A0.at(j, p) = diag_pm(s.a);
      B0.at(j, p) = diag_pm(s.b);
    }
  });

  wc.time.basis = Basis::Diagonal;
  wc.time.A0 = std::move(A0);
  wc.time.A1 = std::move(a_alpha.A1);
  wc.space.basis = Basis::Diagonal;
  wc.space.B0 = std::move(B0);
  wc.space.B1 = std::move(b_alpha.B1);
  wc.space.B2 = std::move(b_alpha.B2);
  return wc;
}

/// The same connection and mass in b_A components (inverse basis change with r^-1).
struct OriginalBasisConnection {
  TimeConnection time;
  SpaceConnection space;
  MatrixField M;
};

inline OriginalBasisConnection to_original_basis(const WalkConnection& wc) {
  OriginalBasisConnection out;
  out.time = transform_time_connection(wc.time, wc.r_inv);
  out.space = transform_space_connection(wc.space, wc.r_inv);
  out.M = map_sites<Mat2>(wc.lattice, wc.M.j_begin(), wc.M.j_end(), [&](int j, int p) -> Mat2 {
    return wc.r.at(j, p) * wc.M.at(j, p) * wc.r_inv.at(j, p);
  });
  return out;
}

// Covariant derivatives of a spinor field at one site.

inline Spinor covariant_time(const Mat2& A0, const Mat2& A1, const Field<Spinor>& psi, int j, int p) {
  return A1 * d_j_at(psi, j, p) + A0 * psi(j, p);
}

inline Spinor covariant_space(const Mat2& B0, const Mat2& B1, const Mat2& B2, const Field<Spinor>& psi, int j,
                              int p) {
  return B1 * d_p_at(psi, j, p) + B0 * psi(j, p) + B2 * d_pp_at(psi, j, p);
}

}  // namespace dqwgeom
