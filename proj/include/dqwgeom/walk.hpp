#pragma once

#include "dqwgeom/core.hpp"
#include "dqwgeom/theta.hpp"

#include <string>
#include <vector>

namespace dqwgeom {

enum class Basis { Original, Diagonal };

inline const char* basis_name(Basis b) { return b == Basis::Original ? "b_A" : "b_alpha"; }

/// One time slice of the walk state: (psi^L, psi^R) or (psi^-, psi^+) per site.
struct SpinorSlice {
  Basis basis = Basis::Original;
  std::vector<Spinor> values;

  double norm2() const {
    double s = 0.0;
    for (const auto& v : values) s += v.squaredNorm();
    return s;
  }
};

inline void require_basis(const SpinorSlice& s, Basis expected, const char* op) {
  if (s.basis != expected) {
    throw ConfigError(std::string(op) + ": spinor is in basis " + basis_name(s.basis) + ", expected " +
                      basis_name(expected));
  }
}

/// U(theta) = [[-cos, i sin], [-i sin, cos]].
inline Mat2 coin(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 u;
  u << complex_t(-c, 0.0), complex_t(0.0, s), complex_t(0.0, -s), complex_t(c, 0.0);
  return u;
}

/// Angle source for stepping: either a sampled field or the spec itself.
class ThetaSource {
 public:
  ThetaSource(const ThetaSpec& spec, const Lattice& lat) : spec_(&spec), lat_(lat) {}
  explicit ThetaSource(const ScalarField& grid) : grid_(&grid), lat_(grid.lattice()) {}

  double operator()(int j, int p) const {
    return grid_ ? (*grid_)(j, p) : eval_theta(*spec_, lat_, j, p);
  }

 private:
  const ThetaSpec* spec_ = nullptr;
  const ScalarField* grid_ = nullptr;
  Lattice lat_;
};

/// psi_{j+1} = U_j T psi_j with (T psi)_p = (psi^L_{p+1}, psi^R_{p-1}), periodic in p.
inline SpinorSlice step(const SpinorSlice& psi, const ThetaSource& theta, const Lattice& lat, int j) {
  require_basis(psi, Basis::Original, "step");
  if (static_cast<int>(psi.values.size()) != lat.P)
    throw ConfigError("step: slice has " + std::to_string(psi.values.size()) + " sites, lattice has " +
                      std::to_string(lat.P));
  SpinorSlice out{Basis::Original, std::vector<Spinor>(psi.values.size())};
  for (int p = 0; p < lat.P; ++p) {
    Spinor shifted;
    shifted << psi.values[wrap_p(p + 1, lat.P)](0), psi.values[wrap_p(p - 1, lat.P)](1);
    out.values[p] = coin(theta(j, p)) * shifted;
  }
  return out;
}

/// Stroboscopic map psi_j -> psi_{j+2}, computed as two single steps.
inline SpinorSlice two_step(const SpinorSlice& psi, const ThetaSource& theta, const Lattice& lat, int j) {
  return step(step(psi, theta, lat, j), theta, lat, j + 1);
}

struct WalkHistory {
  std::vector<SpinorSlice> slices;
  std::vector<double> norms;  // flat norm^2 per slice
};

inline WalkHistory run(const SpinorSlice& psi0, const ThetaSource& theta, const Lattice& lat, int n_steps) {
  if (n_steps < 0) throw ConfigError("n_steps must be non-negative");
  if (n_steps > lat.J - 1)
    throw ConfigError("n_steps=" + std::to_string(n_steps) + " exceeds the " + std::to_string(lat.J) +
                      " stored slices (max " + std::to_string(lat.J - 1) + ")");
  WalkHistory h;
  h.slices.reserve(static_cast<std::size_t>(n_steps) + 1);
  h.slices.push_back(psi0);
  h.norms.push_back(psi0.norm2());
  for (int j = 0; j < n_steps; ++j) {
    h.slices.push_back(step(h.slices.back(), theta, lat, j));
    h.norms.push_back(h.slices.back().norm2());
  }
  return h;
}

}  // namespace dqwgeom
