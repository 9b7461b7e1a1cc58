// dqw-geom <config-path> [--mode override] [--out dir] [--quiet]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime numeric error.
// DQW_GEOM_THREADS caps the worker threads used by per-site maps.

#include "dqwgeom/driver.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void write_error_report(const std::string& dir, const std::string& kind, int code,
                        const std::vector<std::string>& messages) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["exit_code"] = code;
  j["messages"] = messages;
  try {
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/error.json") << j.dump(1) << '\n';
  } catch (const std::exception&) {
    // the report still goes to stderr
  }
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete geometry of a two-step quantum walk"};
  std::string config_path;
  std::string mode;
  std::string out_dir;
  bool quiet = false;
  app.add_option("config", config_path, "INI run configuration")->required();
  app.add_option("--mode", mode, "override [mode] mode")
      ->check(CLI::IsMember({"simulate", "geometry", "connection", "curvature", "converge"}));
  app.add_option("--out", out_dir, "override [output] dir");
  app.add_flag("--quiet", quiet, "no progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const std::string fallback_dir = out_dir.empty() ? "out" : out_dir;
  dqwgeom::RunConfig cfg;
  try {
    cfg = dqwgeom::load_config(config_path, mode.empty() ? std::nullopt : dqwgeom::parse_mode(mode));
    if (!out_dir.empty()) cfg.out_dir = out_dir;
  } catch (const dqwgeom::ConfigErrors& e) {
    write_error_report(fallback_dir, "config", kExitConfig, e.messages());
    return kExitConfig;
  } catch (const dqwgeom::ConfigError& e) {
    write_error_report(fallback_dir, "config", kExitConfig, {e.what()});
    return kExitConfig;
  } catch (const dqwgeom::NumericError& e) {
    // constant theta expressions are evaluated while loading
    write_error_report(fallback_dir, "numeric", kExitNumeric, {e.what()});
    return kExitNumeric;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    std::vector<dqwgeom::Table> tables = dqwgeom::run_mode(cfg);
    for (auto& t : tables) dqwgeom::select_fields(t, cfg.fields);
    const auto paths = dqwgeom::write_tables(tables, cfg.out_dir, cfg.format);
    if (!quiet) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << "dqw-geom: mode " << dqwgeom::mode_name(cfg.mode) << ", P=" << cfg.lattice.P
                << " J=" << cfg.lattice.J << ", " << secs << " s\n";
      for (const auto& p : paths) std::cout << "  wrote " << p << '\n';
    }
  } catch (const dqwgeom::ConfigError& e) {
    write_error_report(cfg.out_dir, "config", kExitConfig, {e.what()});
    return kExitConfig;
  } catch (const std::exception& e) {
    write_error_report(cfg.out_dir, "numeric", kExitNumeric, {e.what()});
    return kExitNumeric;
  }
  return 0;
}
