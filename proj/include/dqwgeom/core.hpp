#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dqwgeom {

using complex_t = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Spinor = Eigen::Vector2cd;

inline constexpr complex_t I{0.0, 1.0};

/// Raised for invalid parameters and malformed input (exit code 2 in the CLI).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numeric evaluation fails at a lattice site (exit code 3 in the CLI).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range field access or stencil validity violation.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

inline std::string site_str(int j, int p) {
  return "(j=" + std::to_string(j) + ", p=" + std::to_string(p) + ")";
}

struct Lattice {
  int P = 0;
  int J = 0;
  double eps = 0.0;
};

inline Lattice make_lattice(int P, int J, double eps) {
  if (P < 4) throw ConfigError("P must be at least 4 (got " + std::to_string(P) + ")");
  if (P % 2 != 0) throw ConfigError("P must be even (got " + std::to_string(P) + ")");
  if (J < 3) throw ConfigError("J too small: need at least 3 time slices (got " + std::to_string(J) + ")");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  return Lattice{P, J, eps};
}

inline int wrap_p(int p, int P) {
  const int m = p % P;
  return m < 0 ? m + P : m;
}

inline Mat2 sigma3() {
  Mat2 s;
  s << 1.0, 0.0, 0.0, -1.0;
  return s;
}

inline Mat2 sigma1() {
  Mat2 s;
  s << 0.0, 1.0, 1.0, 0.0;
  return s;
}

/// Values on a J x P grid with a half-open validity range [j_begin, j_end) in time.
/// Space is periodic; time is stored, never wrapped.
template <typename T>
class Field {
 public:
  Field() = default;
  Field(const Lattice& lat, int j_begin, int j_end, const T& init = T{})
      : lat_(lat), j_begin_(std::max(0, j_begin)), j_end_(std::min(lat.J, j_end)),
        data_(static_cast<std::size_t>(lat.J) * lat.P, init) {
    if (j_end_ < j_begin_) j_end_ = j_begin_;
  }
  explicit Field(const Lattice& lat, const T& init = T{}) : Field(lat, 0, lat.J, init) {}

  const Lattice& lattice() const { return lat_; }
  int P() const { return lat_.P; }
  int J() const { return lat_.J; }
  int j_begin() const { return j_begin_; }
  int j_end() const { return j_end_; }
  bool empty() const { return j_end_ <= j_begin_; }
  bool valid(int j) const { return j >= j_begin_ && j < j_end_; }

  const T& at(int j, int p) const { return data_[index(j, p)]; }
  T& at(int j, int p) { return data_[index(j, p)]; }

  /// Periodic in p, still range-checked in j.
  const T& operator()(int j, int p) const { return data_[index(j, wrap_p(p, lat_.P))]; }
  T& operator()(int j, int p) { return data_[index(j, wrap_p(p, lat_.P))]; }

 private:
  std::size_t index(int j, int p) const {
    if (!valid(j)) {
      throw RangeError("time slice " + std::to_string(j) + " outside valid range [" +
                       std::to_string(j_begin_) + ", " + std::to_string(j_end_) + ")");
    }
    if (p < 0 || p >= lat_.P) {
      throw RangeError("site p=" + std::to_string(p) + " outside [0, " + std::to_string(lat_.P) + ")");
    }
    return static_cast<std::size_t>(j) * lat_.P + p;
  }

  Lattice lat_{};
  int j_begin_ = 0;
  int j_end_ = 0;
  std::vector<T> data_;
};

using ScalarField = Field<double>;
using ComplexField = Field<complex_t>;
using MatrixField = Field<Mat2>;

/// Thread cap from DQW_GEOM_THREADS (default: hardware concurrency).
inline unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DQW_GEOM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

/// Runs body(j) for j in [begin, end). Slices are independent; exceptions are rethrown
/// in slice order so the reported failure is deterministic.
inline void parallel_slices(int begin, int end, const std::function<void(int)>& body) {
  const int n = end - begin;
  if (n <= 0) return;
  const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(n));
  if (workers <= 1) {
    for (int j = begin; j < end; ++j) body(j);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int j = begin + static_cast<int>(w); j < end; j += static_cast<int>(workers)) {
        try {
          body(j);
        } catch (...) {
          errors[static_cast<std::size_t>(j - begin)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Per-site map into a new field over [j_begin, j_end).
template <typename T, typename F>
Field<T> map_sites(const Lattice& lat, int j_begin, int j_end, F&& f) {
  Field<T> out(lat, j_begin, j_end);
  parallel_slices(out.j_begin(), out.j_end(), [&](int j) {
    for (int p = 0; p < lat.P; ++p) out.at(j, p) = f(j, p);
  });
  return out;
}

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const complex_t& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
template <typename Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace dqwgeom
