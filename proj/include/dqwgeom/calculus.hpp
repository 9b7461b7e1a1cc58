#pragma once

// Stride-2 lattice derivatives. They act entrywise on any field whose value type
// supports +, - and scaling by double (scalars, complex numbers, 2x2 matrices).

#include "dqwgeom/core.hpp"

#include <tuple>

namespace dqwgeom {

/// (D_j f)_{j,p} = (f_{j+2,p} - f_{j,p}) / 2. Result is valid on [j_begin, j_end - 2).
template <typename T>
Field<T> d_j(const Field<T>& f) {
  return map_sites<T>(f.lattice(), f.j_begin(), f.j_end() - 2, [&](int j, int p) -> T {
    return T(0.5 * (f.at(j + 2, p) - f.at(j, p)));
  });
}

/// (D_p f)_{j,p} = (f_{j,p+2} - f_{j,p-2}) / 4, periodic in p.
template <typename T>
Field<T> d_p(const Field<T>& f) {
  return map_sites<T>(f.lattice(), f.j_begin(), f.j_end(), [&](int j, int p) -> T {
    return T(0.25 * (f(j, p + 2) - f(j, p - 2)));
  });
}

/// (D_pp f)_{j,p} = (f_{j,p+2} + f_{j,p-2} - 2 f_{j,p}) / 4, periodic in p.
template <typename T>
Field<T> d_pp(const Field<T>& f) {
  return map_sites<T>(f.lattice(), f.j_begin(), f.j_end(), [&](int j, int p) -> T {
    return T(0.25 * (f(j, p + 2) + f(j, p - 2) - 2.0 * f(j, p)));
  });
}

/// Single-site versions for straight-line evaluations.
template <typename T>
T d_j_at(const Field<T>& f, int j, int p) {
  return T(0.5 * (f(j + 2, p) - f(j, p)));
}
template <typename T>
T d_p_at(const Field<T>& f, int j, int p) {
  return T(0.25 * (f(j, p + 2) - f(j, p - 2)));
}
template <typename T>
T d_pp_at(const Field<T>& f, int j, int p) {
  return T(0.25 * (f(j, p + 2) + f(j, p - 2) - 2.0 * f(j, p)));
}

/// Inverts the three stencils: returns (f_{j+2,p}, f_{j,p+2}, f_{j,p-2}).
template <typename T>
std::tuple<T, T, T> reconstruct(const T& f, const T& dj, const T& dp, const T& dpp) {
  return {T(f + 2.0 * dj), T(f + 2.0 * dp + 2.0 * dpp), T(f - 2.0 * dp + 2.0 * dpp)};
}

/// Entrywise combination of two fields on the intersection of their validity ranges.
template <typename T, typename U, typename F>
auto zip_sites(const Field<T>& a, const Field<U>& b, F&& f) {
  using R = std::decay_t<decltype(f(a.at(a.j_begin(), 0), b.at(b.j_begin(), 0)))>;
  const int jb = std::max(a.j_begin(), b.j_begin());
  const int je = std::min(a.j_end(), b.j_end());
  return map_sites<R>(a.lattice(), jb, je, [&](int j, int p) { return R(f(a.at(j, p), b.at(j, p))); });
}

}  // namespace dqwgeom
