#include "dqwgeom/driver.hpp"
#include "time_only_oracle.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace dqwgeom;

namespace {

namespace fs = std::filesystem;

RunConfig config(const std::string& body) { return parse_config(body, DQW_TEST_DATA_DIR); }

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw std::runtime_error("no column " + name);
  return static_cast<std::size_t>(it - t.columns.begin());
}

double num(const Table& t, std::size_t row, const std::string& name) {
  const Cell& c = t.rows[row][column(t, name)];
  if (const auto* d = std::get_if<double>(&c)) return *d;
  return static_cast<double>(std::get<long long>(c));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / ("dqw_driver_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(DQW_GEOM_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(InitialState, Kinds) {
  const Lattice lat = make_lattice(16, 4, 0.1);
  InitialSpec ini;
  ini.p0 = -1;
  ini.left = {0.6, 0.0};
  ini.right = {0.0, 0.8};
  const SpinorSlice point = make_initial_state(ini, lat);
  EXPECT_EQ(point.values[15], Spinor(complex_t(0.6, 0), complex_t(0, 0.8)));
  EXPECT_NEAR(point.norm2(), 1.0, 1e-15);

  ini.kind = InitialKind::Gaussian;
  ini.p0 = 1;
  ini.width = 2.0;
  const SpinorSlice g = make_initial_state(ini, lat);
  EXPECT_NEAR(g.norm2(), 1.0, 1e-14);
  EXPECT_NEAR(g.values[0].norm(), g.values[2].norm(), 1e-15);  // symmetric about p0
  EXPECT_GT(g.values[1].norm(), g.values[0].norm());

  ini.kind = InitialKind::Uniform;
  EXPECT_NEAR(make_initial_state(ini, lat).norm2(), 1.0, 1e-14);

  ini.kind = InitialKind::Random;
  ini.seed = 9;
  const SpinorSlice r1 = make_initial_state(ini, lat), r2 = make_initial_state(ini, lat);
  EXPECT_NEAR(r1.norm2(), 1.0, 1e-14);
  for (int p = 0; p < lat.P; ++p) EXPECT_EQ(r1.values[p], r2.values[p]);
  ini.seed = 10;
  EXPECT_NE(make_initial_state(ini, lat).values[0], r1.values[0]);
}

TEST(InitialState, FromFile) {
  const Lattice lat = make_lattice(8, 4, 0.1);
  InitialSpec ini;
  ini.kind = InitialKind::File;
  ini.file = "state_pair.csv";
  const SpinorSlice s = make_initial_state(ini, lat, DQW_TEST_DATA_DIR);
  EXPECT_EQ(s.values[0], Spinor(complex_t(0.6, 0), 0.0));
  EXPECT_EQ(s.values[3], Spinor(0.0, complex_t(0, 0.8)));
  EXPECT_EQ(s.values[1], Spinor::Zero());
  for (const char* bad : {"state_bad_site.csv", "state_bad_number.csv", "missing.csv"}) {
    ini.file = bad;
    EXPECT_THROW(make_initial_state(ini, lat, DQW_TEST_DATA_DIR), ConfigError) << bad;
  }
}

TEST(Simulate, FreeWalkKeepsNorm) {
  const RunConfig c = config("[lattice]\nP = 16\nJ = 11\n[theta]\nexpr = 0\n[initial]\nkind = gaussian\n");
  const auto tables = run_simulate(c);
  ASSERT_EQ(tables.size(), 1u);
  const Table& t = tables[0];
  ASSERT_EQ(t.rows.size(), 11u);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    EXPECT_EQ(num(t, k, "step"), static_cast<double>(k));
    EXPECT_NEAR(num(t, k, "norm2"), 1.0, 1e-15);
  }
}

TEST(Simulate, StateDump) {
  RunConfig c = config("[lattice]\nP = 8\nJ = 5\n[theta]\nexpr = 0.3+0.2*sin(x-t)\n[mode]\nn_steps = 3\n"
                       "[output]\ndump_states = true\n");
  const auto tables = run_simulate(c);
  ASSERT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables[1].name, "states");
  EXPECT_EQ(tables[1].rows.size(), 4u * 8u);
  EXPECT_LT(std::abs(num(tables[0], 3, "drift")), 1e-14);
}

TEST(Geometry, TableMatchesLibrary) {
  const RunConfig c = config("[lattice]\nP = 8\nJ = 6\n[theta]\nexpr = 0.4+0.3*sin(x+t)\n[mode]\nmode = geometry\n");
  const Table t = run_mode(c).at(0);
  EXPECT_EQ(t.name, "geometry");
  ASSERT_EQ(t.rows.size(), 5u * 8u);
  const GeometryField g = build_geometry(sample_theta(c.theta, c.lattice));
  for (std::size_t k = 0; k < t.rows.size(); k += 7) {
    const int j = static_cast<int>(num(t, k, "j")), p = static_cast<int>(num(t, k, "p"));
    EXPECT_EQ(num(t, k, "mu"), g.at(j, p).mu);
    EXPECT_EQ(num(t, k, "g01"), g.at(j, p).g01);
    EXPECT_EQ(std::get<std::string>(t.rows[k][column(t, "degenerate")]), "none");
  }
}

TEST(Curvature, TimeOnlyColumnMatchesClosedForm) {
  const RunConfig c = config("[lattice]\nP = 8\nJ = 30\neps = 0.05\n[theta]\nfamily = scale_factor_sine\n"
                             "[mode]\nmode = curvature\nlambda_star = 0.2*sin(x)*cos(t)\n");
  std::vector<double> th(c.lattice.J);
  for (int j = 0; j < c.lattice.J; ++j) th[j] = eval_theta(c.theta, c.lattice, j, 0);
  const dqwtest::TimeOnlyOracle oracle(th);
  const Table t = run_mode(c).at(0);
  ASSERT_FALSE(t.rows.empty());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const int j = static_cast<int>(num(t, k, "j"));
    EXPECT_NEAR(num(t, k, "rho_s"), -0.5 * (oracle.b0_printed(j + 2) - oracle.b0_printed(j)), 1e-13);
    EXPECT_LT(std::abs(num(t, k, "rho_star")), 1e-12);
  }
}

TEST(Converge, ErrorDecreases) {
  const RunConfig c = config("[lattice]\nP = 8\nJ = 10\n[theta]\nfamily = scale_factor_sine\n"
                             "[mode]\nmode = converge\neps_list = 0.1, 0.05, 0.025\n");
  const Table t = run_mode(c).at(0);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_GT(num(t, 0, "error"), num(t, 1, "error"));
  EXPECT_GT(num(t, 1, "error"), num(t, 2, "error"));
  EXPECT_EQ(std::get<std::string>(t.rows[0][column(t, "order")]), "");
}

TEST(Output, FieldSelection) {
  const RunConfig c = config("[lattice]\nP = 8\nJ = 6\n[theta]\nexpr = 0.3\n[mode]\nmode = geometry\n");
  Table t = run_mode(c).at(0);
  select_fields(t, {"mu", "x_plus"});
  EXPECT_EQ(t.columns, (std::vector<std::string>{"j", "p", "mu", "x_plus"}));
  EXPECT_EQ(t.rows[0].size(), 4u);
  try {
    select_fields(t, {"volume"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("available: j, p, mu, x_plus"), std::string::npos) << e.what();
  }
}

TEST(Output, CsvAndJson) {
  Table t{"demo", {{"mode", "geometry"}, {"P", "8"}}, {"j", "value", "note"}, {}, 1};
  t.rows.push_back({1LL, 0.1, std::string("ok")});
  t.rows.push_back({2LL, std::numeric_limits<double>::quiet_NaN(), std::string("")});
  std::ostringstream csv;
  write_csv(t, csv);
  EXPECT_EQ(csv.str(), "# mode=geometry P=8\nj,value,note\n1,0.10000000000000001,ok\n2,nan,\n");
  const auto j = to_json(t);
  EXPECT_EQ(j["metadata"]["P"], "8");
  EXPECT_EQ(j["columns"][1], "value");
  EXPECT_EQ(j["data"][0][1].get<double>(), 0.1);
  EXPECT_TRUE(j["data"][1][1].is_null());

  const fs::path dir = scratch("write");
  const auto paths = write_tables({t}, (dir / "nested").string(), OutputFormat::Json);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(nlohmann::json::parse(slurp(paths[0]))["data"].size(), 2u);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "ok.ini") << "[lattice]\nP = 8\nJ = 6\n[theta]\nexpr = 0.3\n[output]\nformat = json\n";
  std::ofstream(dir / "bad.ini") << "[lattice]\nP = 7\nJ = 6\n[theta]\nexpr = 0.3\n";
  std::ofstream(dir / "numeric.ini") << "[lattice]\nP = 8\nJ = 6\n[theta]\nexpr = arccos(1.5+t)\n";

  const std::string out = (dir / "out").string();
  EXPECT_EQ(run_cli((dir / "ok.ini").string() + " --out " + out + " --mode geometry --quiet"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "geometry.json"));

  EXPECT_EQ(run_cli((dir / "bad.ini").string() + " --out " + out + "_bad"), 2);
  const auto err = nlohmann::json::parse(slurp(out + "_bad/error.json"));
  EXPECT_EQ(err["kind"], "config");
  EXPECT_EQ(err["exit_code"], 2);
  EXPECT_NE(err["messages"][0].get<std::string>().find("even"), std::string::npos);

  EXPECT_EQ(run_cli((dir / "numeric.ini").string() + " --out " + out + "_num"), 3);
  const auto num_err = nlohmann::json::parse(slurp(out + "_num/error.json"));
  EXPECT_EQ(num_err["kind"], "numeric");
  EXPECT_NE(num_err["messages"][0].get<std::string>().find("j=0"), std::string::npos);

  EXPECT_EQ(run_cli((dir / "missing.ini").string() + " --out " + out + "_missing"), 2);
  EXPECT_EQ(run_cli((dir / "ok.ini").string() + " --mode fly"), 2);
  EXPECT_EQ(run_cli(""), 2);
}
