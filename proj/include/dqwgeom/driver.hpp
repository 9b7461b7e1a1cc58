#pragma once

// Run modes behind the command-line tool and their tabular output.

#include "dqwgeom/config.hpp"
#include "dqwgeom/curvature.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <variant>

namespace dqwgeom {

using Cell = std::variant<long long, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::size_t key_columns = 0;  // leading columns kept by a field filter
};

// -- initial states

namespace detail {

inline std::vector<Spinor> read_state_file(const std::string& path, int P) {
  std::ifstream in(path);
  if (!in) throw ConfigError("[initial] cannot read state file '" + path + "'");
  std::vector<Spinor> v(static_cast<std::size_t>(P), Spinor::Zero());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split_list(line);
    if (parts.size() != 5) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 5 columns");
    double x[5];
    for (int k = 0; k < 5; ++k) {
      try {
        std::size_t used = 0;
        x[k] = std::stod(parts[k], &used);
        if (used != parts[k].size()) throw std::invalid_argument(parts[k]);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": '" + parts[k] + "' is not a number");
      }
    }
    const int p = static_cast<int>(x[0]);
    if (p != x[0] || p < 0 || p >= P)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": site index out of [0, P)");
    v[p] = Spinor(complex_t(x[1], x[2]), complex_t(x[3], x[4]));
  }
  return v;
}

inline void normalize(std::vector<Spinor>& v) {
  double s = 0.0;
  for (const auto& x : v) s += x.squaredNorm();
  if (!(s > 0.0)) throw ConfigError("[initial] state has zero norm");
  const double k = 1.0 / std::sqrt(s);
  for (auto& x : v) x *= k;
}

}  // namespace detail

/// Point and file states keep their amplitudes; gaussian, uniform and random are normalised.
inline SpinorSlice make_initial_state(const InitialSpec& ini, const Lattice& lat, const std::string& base_dir = ".") {
  SpinorSlice s{Basis::Original, std::vector<Spinor>(static_cast<std::size_t>(lat.P), Spinor::Zero())};
  const Spinor amp(ini.left, ini.right);
  switch (ini.kind) {
    case InitialKind::Point:
      s.values[wrap_p(ini.p0, lat.P)] = amp;
      break;
    case InitialKind::Gaussian:
      for (int p = 0; p < lat.P; ++p) {
        // periodic distance to p0
        int d = wrap_p(p - ini.p0, lat.P);
        if (d > lat.P / 2) d -= lat.P;
        s.values[p] = std::exp(-0.5 * d * d / (ini.width * ini.width)) * amp;
      }
      detail::normalize(s.values);
      break;
    case InitialKind::Uniform:
      for (auto& v : s.values) v = amp;
      detail::normalize(s.values);
      break;
    case InitialKind::Random: {
      std::mt19937_64 rng(ini.seed.value_or(0));
      std::normal_distribution<double> g;
      for (auto& v : s.values) {
        const double a = g(rng), b = g(rng), c = g(rng), d = g(rng);
        v = Spinor(complex_t(a, b), complex_t(c, d));
      }
      detail::normalize(s.values);
      break;
    }
    case InitialKind::File: {
      const std::string path = ini.file.empty() || ini.file[0] == '/' ? ini.file : base_dir + "/" + ini.file;
      s.values = detail::read_state_file(path, lat.P);
      break;
    }
  }
  return s;
}

// -- modes

namespace detail {

inline std::vector<std::pair<std::string, std::string>> common_metadata(const RunConfig& cfg) {
  return {{"mode", mode_name(cfg.mode)},
          {"P", std::to_string(cfg.lattice.P)},
          {"J", std::to_string(cfg.lattice.J)},
          {"eps", fmt_number(cfg.lattice.eps)},
          {"theta", cfg.theta.source}};
}

inline std::string range_str(int jb, int je) {
  return "[" + std::to_string(jb) + "," + std::to_string(je) + ")";
}

template <typename T, typename F>
void site_rows(Table& t, const Field<T>& f, F&& row) {
  for (int j = f.j_begin(); j < f.j_end(); ++j)
    for (int p = 0; p < f.P(); ++p) {
      std::vector<Cell> r{static_cast<long long>(j), static_cast<long long>(p)};
      row(r, j, p);
      t.rows.push_back(std::move(r));
    }
}

inline void push_complex(std::vector<Cell>& r, complex_t z) {
  r.emplace_back(z.real());
  r.emplace_back(z.imag());
}

}  // namespace detail

inline std::vector<Table> run_simulate(const RunConfig& cfg) {
  const Lattice& lat = cfg.lattice;
  const ScalarField theta = sample_theta(cfg.theta, lat);
  const SpinorSlice psi0 = make_initial_state(cfg.initial, lat, cfg.base_dir);
  const WalkHistory h = run(psi0, ThetaSource(theta), lat, cfg.n_steps);

  Table norms{"norms", detail::common_metadata(cfg), {"step", "norm2", "drift"}, {}, 1};
  norms.metadata.emplace_back("valid_j", detail::range_str(0, cfg.n_steps + 1));
  double drift = 0.0;
  for (std::size_t k = 0; k < h.norms.size(); ++k) {
    const double d = h.norms[k] - h.norms[0];
    drift = std::max(drift, std::abs(d));
    norms.rows.push_back({static_cast<long long>(k), h.norms[k], d});
  }
  norms.metadata.emplace_back("max_drift", detail::fmt_number(drift));
  std::vector<Table> out{std::move(norms)};

  if (cfg.dump_states) {
    Table st{"states", detail::common_metadata(cfg),
             {"j", "p", "left_re", "left_im", "right_re", "right_im"}, {}, 2};
    st.metadata.emplace_back("valid_j", detail::range_str(0, cfg.n_steps + 1));
    for (std::size_t j = 0; j < h.slices.size(); ++j)
      for (int p = 0; p < lat.P; ++p) {
        std::vector<Cell> r{static_cast<long long>(j), static_cast<long long>(p)};
        detail::push_complex(r, h.slices[j].values[p](0));
        detail::push_complex(r, h.slices[j].values[p](1));
        st.rows.push_back(std::move(r));
      }
    out.push_back(std::move(st));
  }
  return out;
}

inline std::vector<Table> run_geometry(const RunConfig& cfg) {
  const GeometryField g = build_geometry(sample_theta(cfg.theta, cfg.lattice));
  Table t{"geometry", detail::common_metadata(cfg),
          {"j", "p", "x_minus", "x_plus", "g00", "g01", "g11", "mu", "degenerate"}, {}, 2};
  t.metadata.emplace_back("valid_j", detail::range_str(g.j_begin(), g.j_end()));
  t.metadata.emplace_back("degenerate_sites", std::to_string(count_degenerate(g)));
  detail::site_rows(t, g, [&](std::vector<Cell>& r, int j, int p) {
    const GeometrySite& s = g.at(j, p);
    for (double v : {s.x_minus, s.x_plus, s.g00, s.g01, s.g11, s.mu}) r.emplace_back(v);
    r.emplace_back(std::string(degeneracy_name(s.flag)));
  });
  return {std::move(t)};
}

inline std::vector<Table> run_connection(const RunConfig& cfg) {
  const WalkConnection wc = build_connection(sample_theta(cfg.theta, cfg.lattice));
  Table t{"connection",
          detail::common_metadata(cfg),
          {"j", "p", "A0_mm_re", "A0_mm_im", "B0_mm_re", "B0_mm_im", "M_mp_re", "M_mp_im", "M_pm_re", "M_pm_im",
           "mass2_re", "mass2_im"},
          {},
          2};
  t.metadata.emplace_back("basis", "b_alpha");
  t.metadata.emplace_back("valid_j", detail::range_str(wc.time.A0.j_begin(), wc.time.A0.j_end()));
  t.metadata.emplace_back("degenerate_sites", std::to_string(count_degenerate(wc.geometry)));
  detail::site_rows(t, wc.time.A0, [&](std::vector<Cell>& r, int j, int p) {
    const Mat2& m = wc.M.at(j, p);
    detail::push_complex(r, wc.time.A0.at(j, p)(0, 0));
    detail::push_complex(r, wc.space.B0.at(j, p)(0, 0));
    detail::push_complex(r, m(0, 1));
    detail::push_complex(r, m(1, 0));
    detail::push_complex(r, m(0, 1) * m(1, 0));
  });
  return {std::move(t)};
}

inline std::vector<Table> run_curvature(const RunConfig& cfg) {
  const Lattice& lat = cfg.lattice;
  const WalkConnection wc = build_connection(sample_theta(cfg.theta, lat));
  const CurvatureField rs = rho_slow(wc.time, wc.space);
  const ScalarField r_coord = mixed_to_coordinate(rs.rho, wc.geometry);
  const ScalarField scalar = ricci_scalar(r_coord, wc.geometry);

  std::optional<CurvatureField> rstar, rs_lambda;
  if (cfg.lambda_star) {
    const ScalarField lam = sample_theta(*cfg.lambda_star, lat);
    const BoostedConnection ref = boost_connection(wc.time, wc.space, lam, cfg.lambda_cap);
    rstar = rho_star(wc.time, wc.space, ref.time, ref.space);
    rs_lambda = rho_slow_transformed(wc.time, wc.space, lam, cfg.lambda_cap);
  }

  std::vector<std::string> cols{"j", "p", "rho_s", "rho_s_imag", "R_coord", "scalar"};
  if (rstar) {
    cols.push_back("rho_star");
    cols.push_back("rho_s_lambda");
  }
  Table t{"curvature", detail::common_metadata(cfg), cols, {}, 2};
  if (cfg.lambda_star) t.metadata.emplace_back("lambda_star", cfg.lambda_star->source);
  int jb = rs.rho.j_begin(), je = rs.rho.j_end();
  if (rstar) {
    jb = std::max({jb, rstar->rho.j_begin(), rs_lambda->rho.j_begin()});
    je = std::min({je, rstar->rho.j_end(), rs_lambda->rho.j_end()});
  }
  t.metadata.emplace_back("valid_j", detail::range_str(jb, je));
  t.metadata.emplace_back("max_rho_s_imag", detail::fmt_number(rs.max_imag()));
  t.metadata.emplace_back("degenerate_sites", std::to_string(count_degenerate(wc.geometry)));
  for (int j = jb; j < je; ++j)
    for (int p = 0; p < lat.P; ++p) {
      std::vector<Cell> r{static_cast<long long>(j), static_cast<long long>(p), rs.rho.at(j, p), rs.imag.at(j, p),
                          r_coord.at(j, p), scalar.at(j, p)};
      if (rstar) {
        r.emplace_back(rstar->rho.at(j, p));
        r.emplace_back(rs_lambda->rho.at(j, p));
      }
      t.rows.push_back(std::move(r));
    }
  return {std::move(t)};
}

inline std::vector<Table> run_converge(const RunConfig& cfg) {
  const ConvergenceTable ct = convergence_study(cfg.theta, cfg.eps_list, cfg.t_probe);
  Table t{"convergence",
          {{"mode", "converge"}, {"theta", cfg.theta.source}, {"t_probe", detail::fmt_number(cfg.t_probe)}},
          {"eps", "slice", "rho_scaled", "oracle", "error", "order", "status"},
          {},
          1};
  t.metadata.emplace_back("continuum_sign", detail::fmt_number(kContinuumSign));
  t.metadata.emplace_back("extrapolated", ct.extrapolated ? detail::fmt_number(*ct.extrapolated) : "none");
  for (const auto& row : ct.rows)
    t.rows.push_back({row.eps, static_cast<long long>(row.slice), row.rho_scaled, row.oracle, row.error,
                      row.order ? Cell(*row.order) : Cell(std::string("")), row.status});
  return {std::move(t)};
}

inline std::vector<Table> run_mode(const RunConfig& cfg) {
  switch (cfg.mode) {
    case Mode::Simulate: return run_simulate(cfg);
    case Mode::Geometry: return run_geometry(cfg);
    case Mode::Connection: return run_connection(cfg);
    case Mode::Curvature: return run_curvature(cfg);
    case Mode::Converge: return run_converge(cfg);
  }
  return {};
}

/// Keeps the key columns plus the requested ones. Unknown names are a config error.
inline void select_fields(Table& t, const std::vector<std::string>& fields) {
  if (fields.empty()) return;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < t.key_columns; ++c) keep.push_back(c);
  std::vector<std::string> unknown;
  for (const auto& f : fields) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), f);
    if (it == t.columns.end()) {
      unknown.push_back(f);
      continue;
    }
    const auto idx = static_cast<std::size_t>(it - t.columns.begin());
    if (std::find(keep.begin(), keep.end(), idx) == keep.end()) keep.push_back(idx);
  }
  if (!unknown.empty()) {
    std::string avail;
    for (const auto& c : t.columns) avail += (avail.empty() ? "" : ", ") + c;
    std::string bad;
    for (const auto& u : unknown) bad += (bad.empty() ? "" : ", ") + u;
    throw ConfigError("[output] fields: unknown column(s) " + bad + " for table " + t.name + " (available: " +
                      avail + ")");
  }
  std::vector<std::string> cols;
  for (auto k : keep) cols.push_back(t.columns[k]);
  for (auto& row : t.rows) {
    std::vector<Cell> r;
    for (auto k : keep) r.push_back(row[k]);
    row = std::move(r);
  }
  t.columns = std::move(cols);
}

// -- writers

namespace detail {

inline std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return fmt_number(*d);
  return std::get<std::string>(c);
}

}  // namespace detail

inline void write_csv(const Table& t, std::ostream& out) {
  out << '#';
  for (const auto& [k, v] : t.metadata) out << ' ' << k << '=' << v;
  out << '\n';
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << detail::cell_text(row[c]);
    out << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.metadata) j["metadata"][k] = v;
  j["columns"] = t.columns;
  j["data"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& c : row) {
      if (const auto* i = std::get_if<long long>(&c)) r.push_back(*i);
      else if (const auto* d = std::get_if<double>(&c)) r.push_back(std::isfinite(*d) ? nlohmann::ordered_json(*d) : nullptr);
      else r.push_back(std::get<std::string>(c));
    }
    j["data"].push_back(std::move(r));
  }
  return j;
}

/// Writes one file per table into dir; returns the paths.
inline std::vector<std::string> write_tables(const std::vector<Table>& tables, const std::string& dir,
                                             OutputFormat format) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& t : tables) {
    const std::string path = dir + "/" + t.name + (format == OutputFormat::Csv ? ".csv" : ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (format == OutputFormat::Csv) write_csv(t, out);
    else out << to_json(t).dump(1) << '\n';
    paths.push_back(path);
  }
  return paths;
}

}  // namespace dqwgeom
