#include "dqwgeom/core.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>

using namespace dqwgeom;

TEST(Lattice, ValidParameters) {
  const Lattice lat = make_lattice(8, 4, 0.1);
  EXPECT_EQ(lat.P, 8);
  EXPECT_EQ(lat.J, 4);
  EXPECT_DOUBLE_EQ(lat.eps, 0.1);
}

TEST(Lattice, OddPNamesParityRule) {
  try {
    make_lattice(7, 4, 0.1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("P must be even"), std::string::npos);
  }
}

TEST(Lattice, TooFewSlices) {
  try {
    make_lattice(8, 2, 0.1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("J too small"), std::string::npos);
  }
}

TEST(Lattice, RejectsNonPositiveEps) {
  EXPECT_THROW(make_lattice(8, 4, 0.0), ConfigError);
  EXPECT_THROW(make_lattice(8, 4, -1.0), ConfigError);
  EXPECT_THROW(make_lattice(2, 4, 0.1), ConfigError);
}

TEST(WrapP, Examples) {
  EXPECT_EQ(wrap_p(-1, 8), 7);
  EXPECT_EQ(wrap_p(9, 8), 1);
  EXPECT_EQ(wrap_p(3, 8), 3);
  EXPECT_EQ(wrap_p(-17, 8), 7);
}

TEST(WrapP, PeriodicAndParityPreserving) {
  for (int P : {4, 6, 8, 64}) {
    for (int p = -3 * P; p <= 3 * P; ++p) {
      const int w = wrap_p(p, P);
      EXPECT_GE(w, 0);
      EXPECT_LT(w, P);
      EXPECT_EQ(wrap_p(p + P, P), w);
      // even P keeps the sublattice of p
      EXPECT_EQ(((w - p) % 2 + 2) % 2, 0);
    }
  }
}

TEST(Field, RangeChecksAndPeriodicAccess) {
  const Lattice lat = make_lattice(8, 6, 0.1);
  ScalarField f(lat, 1, 4, 0.0);
  for (int j = 1; j < 4; ++j)
    for (int p = 0; p < 8; ++p) f.at(j, p) = 10.0 * j + p;
  EXPECT_TRUE(f.valid(1));
  EXPECT_FALSE(f.valid(4));
  EXPECT_DOUBLE_EQ(f(2, -1), 27.0);
  EXPECT_DOUBLE_EQ(f(2, 9), 21.0);
  EXPECT_THROW(f.at(0, 0), RangeError);
  EXPECT_THROW(f.at(4, 0), RangeError);
  EXPECT_THROW(f.at(1, 8), RangeError);
  EXPECT_THROW(f(5, 0), RangeError);
}

TEST(Field, RangeClampedToLattice) {
  const Lattice lat = make_lattice(4, 3, 1.0);
  ScalarField f(lat, -2, 10);
  EXPECT_EQ(f.j_begin(), 0);
  EXPECT_EQ(f.j_end(), 3);
  ScalarField g(lat, 2, 1);
  EXPECT_TRUE(g.empty());
}

TEST(Parallel, VisitsEverySliceOnce) {
  setenv("DQW_GEOM_THREADS", "4", 1);
  std::vector<std::atomic<int>> hits(50);
  parallel_slices(0, 50, [&](int j) { hits[j]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  unsetenv("DQW_GEOM_THREADS");
}

TEST(Parallel, FirstFailingSliceIsReported) {
  setenv("DQW_GEOM_THREADS", "3", 1);
  try {
    parallel_slices(0, 20, [](int j) {
      if (j == 7 || j == 13) throw NumericError("slice " + std::to_string(j));
    });
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_STREQ(e.what(), "slice 7");
  }
  unsetenv("DQW_GEOM_THREADS");
}

TEST(Parallel, ThreadCapFromEnvironment) {
  setenv("DQW_GEOM_THREADS", "1", 1);
  EXPECT_EQ(thread_count(), 1u);
  unsetenv("DQW_GEOM_THREADS");
  EXPECT_GE(thread_count(), 1u);
}
