#pragma once

// Run configuration: an INI file with sections [lattice], [theta], [initial], [mode], [output].

#include "dqwgeom/core.hpp"
#include "dqwgeom/theta.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dqwgeom {

enum class Mode { Simulate, Geometry, Connection, Curvature, Converge };
enum class InitialKind { Point, Gaussian, Uniform, Random, File };
enum class OutputFormat { Csv, Json };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Simulate: return "simulate";
    case Mode::Geometry: return "geometry";
    case Mode::Connection: return "connection";
    case Mode::Curvature: return "curvature";
    case Mode::Converge: return "converge";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  static const std::map<std::string, Mode> table{{"simulate", Mode::Simulate},
                                                 {"geometry", Mode::Geometry},
                                                 {"connection", Mode::Connection},
                                                 {"curvature", Mode::Curvature},
                                                 {"converge", Mode::Converge}};
  const auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

struct InitialSpec {
  InitialKind kind = InitialKind::Point;
  int p0 = 0;
  complex_t left{1.0, 0.0};
  complex_t right{0.0, 0.0};
  double width = 4.0;                  // gaussian, in sites
  std::optional<std::uint64_t> seed;  // random
  std::string file;                    // file: rows "p, left_re, left_im, right_re, right_im"
};

struct RunConfig {
  Lattice lattice;
  ThetaSpec theta;
  std::string theta_source;  // "expr" or the family name
  InitialSpec initial;
  Mode mode = Mode::Simulate;
  int n_steps = 0;  // defaults to J - 1 when the config omits it
  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
  double t_probe = 1.0;
  std::optional<ThetaSpec> lambda_star;
  double lambda_cap = 20.0;
  std::string out_dir = "out";
  OutputFormat format = OutputFormat::Csv;
  std::vector<std::string> fields;  // empty: every column of the mode
  bool dump_states = false;
  std::string base_dir;  // directory of the config file, for relative paths
};

/// All schema violations found in one pass.
class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> messages)
      : ConfigError(join(messages)), messages_(std::move(messages)) {}
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& m) {
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) s += (i ? "; " : "") + m[i];
    return s;
  }
  std::vector<std::string> messages_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Reads typed keys from one section and records problems instead of throwing.
class SectionReader {
 public:
  SectionReader(const boost::property_tree::ptree* node, std::string name, std::vector<std::string>& errors)
      : node_(node), name_(std::move(name)), errors_(errors) {}

  bool has(const std::string& key) const { return node_ && node_->find(key) != node_->not_found(); }

  std::optional<std::string> text(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return trim(node_->get<std::string>(key));
  }

  template <typename T>
  std::optional<T> number(const std::string& key) {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    std::istringstream in(*raw);
    in.imbue(std::locale::classic());
    T v{};
    in >> v;
    if (in.fail() || !(in >> std::ws).eof()) {
      errors_.push_back("[" + name_ + "] " + key + ": expected a " + (std::is_integral_v<T> ? "integer" : "number") +
                        ", got '" + *raw + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
    if (*raw == "false" || *raw == "0" || *raw == "no") return false;
    errors_.push_back("[" + name_ + "] " + key + ": expected true or false, got '" + *raw + "'");
    return std::nullopt;
  }

  void require(const std::string& key) {
    if (!has(key)) errors_.push_back("[" + name_ + "] missing required key '" + key + "'");
  }

  void reject_unknown() {
    if (!node_) return;
    for (const auto& kv : *node_)
      if (!seen_.count(kv.first)) errors_.push_back("[" + name_ + "] unknown key '" + kv.first + "'");
  }

  void error(const std::string& msg) { errors_.push_back("[" + name_ + "] " + msg); }

 private:
  const boost::property_tree::ptree* node_;
  std::string name_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

/// Builtin theta families as expressions in t and x.
inline std::optional<std::string> family_expression(const std::string& family, SectionReader& sec) {
  if (family == "constant") {
    const double v = sec.number<double>("value").value_or(0.0);
    return detail::fmt_number(v);
  }
  if (family == "scale_factor_sine") {
    const double amp = sec.number<double>("amplitude").value_or(0.1);
    const double omega = sec.number<double>("omega").value_or(1.0);
    return "arccos(1/(1+" + detail::fmt_number(amp) + "*sin(" + detail::fmt_number(omega) + "*t)))";
  }
  if (family == "cosh") {
    const double t0 = sec.number<double>("t0").value_or(0.0);
    return "arccos(1/cosh(t-" + detail::fmt_number(t0) + "))";
  }
  if (family == "wave") {
    const double base = sec.number<double>("base").value_or(0.3);
    const double amp = sec.number<double>("amplitude").value_or(0.1);
    const double k = sec.number<double>("k").value_or(1.0);
    const double omega = sec.number<double>("omega").value_or(1.0);
    return detail::fmt_number(base) + "+" + detail::fmt_number(amp) + "*sin(" + detail::fmt_number(omega) + "*t+" +
           detail::fmt_number(k) + "*x)";
  }
  return std::nullopt;
}

/// Drops '#' and ';' comments, whole-line or trailing. Neither character occurs in a valid value.
inline std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out, line;
  while (std::getline(in, line)) {
    const auto cut = line.find_first_of("#;");
    out += (cut == std::string::npos ? line : line.substr(0, cut)) + "\n";
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& theta_families() {
  static const std::vector<std::string> f{"constant", "scale_factor_sine", "cosh", "wave"};
  return f;
}

/// Parses INI text. base_dir resolves relative file paths.
inline RunConfig parse_config(const std::string& text, const std::string& base_dir = ".",
                              std::optional<Mode> mode_override = std::nullopt) {
  namespace pt = boost::property_tree;
  pt::ptree root;
  try {
    std::istringstream in(detail::strip_comments(text));
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigErrors({"syntax: line " + std::to_string(e.line()) + ": " + e.message()});
  }

  std::vector<std::string> errors;
  RunConfig cfg;
  cfg.base_dir = base_dir;
  static const std::set<std::string> sections{"lattice", "theta", "initial", "mode", "output"};
  for (const auto& kv : root) {
    if (kv.second.empty() && !kv.second.data().empty())
      errors.push_back("key '" + kv.first + "' outside any section");
    else if (!sections.count(kv.first))
      errors.push_back("unknown section [" + kv.first + "]");
  }
  auto section = [&](const char* name) -> const pt::ptree* {
    const auto it = root.find(name);
    return it == root.not_found() ? nullptr : &it->second;
  };

  // [lattice]
  {
    detail::SectionReader sec(section("lattice"), "lattice", errors);
    sec.require("P");
    sec.require("J");
    const auto P = sec.number<int>("P");
    const auto J = sec.number<int>("J");
    const double eps = sec.number<double>("eps").value_or(0.1);
    sec.reject_unknown();
    if (P && J) {
      try {
        cfg.lattice = make_lattice(*P, *J, eps);
      } catch (const ConfigError& e) {
        sec.error(e.what());
      }
    }
  }

  // [mode] before [theta]: converge restricts the theta kind.
  {
    detail::SectionReader sec(section("mode"), "mode", errors);
    if (const auto m = sec.text("mode")) {
      if (const auto parsed = parse_mode(*m))
        cfg.mode = *parsed;
      else
        sec.error("mode: unknown mode '" + *m + "' (simulate, geometry, connection, curvature, converge)");
    }
    if (mode_override) cfg.mode = *mode_override;
    if (const auto n = sec.number<int>("n_steps")) {
      if (*n < 0) sec.error("n_steps must be >= 0");
      else if (cfg.lattice.J > 0 && *n > cfg.lattice.J - 1)
        sec.error("n_steps = " + std::to_string(*n) + " exceeds J - 1 = " + std::to_string(cfg.lattice.J - 1));
      else cfg.n_steps = *n;
    } else if (cfg.lattice.J > 0) {
      cfg.n_steps = cfg.lattice.J - 1;
    }
    if (const auto list = sec.text("eps_list")) {
      cfg.eps_list.clear();
      for (const auto& item : detail::split_list(*list)) {
        try {
          std::size_t used = 0;
          const double v = std::stod(item, &used);
          if (used != item.size() || !(v > 0.0)) throw std::invalid_argument(item);
          cfg.eps_list.push_back(v);
        } catch (const std::exception&) {
          sec.error("eps_list: '" + item + "' is not a positive number");
        }
      }
      for (std::size_t i = 1; i < cfg.eps_list.size(); ++i)
        if (!(cfg.eps_list[i] < cfg.eps_list[i - 1])) {
          sec.error("eps_list must be strictly decreasing");
          break;
        }
    }
    if (const auto t = sec.number<double>("t_probe")) cfg.t_probe = *t;
    if (const auto cap = sec.number<double>("lambda_cap")) {
      if (!(*cap > 0.0)) sec.error("lambda_cap must be > 0");
      else cfg.lambda_cap = *cap;
    }
    if (const auto ls = sec.text("lambda_star")) {
      try {
        cfg.lambda_star = parse_theta(*ls);
      } catch (const ParseError& e) {
        sec.error(std::string("lambda_star: ") + e.what());
      }
    }
    sec.reject_unknown();
  }

  // [theta]
  {
    detail::SectionReader sec(section("theta"), "theta", errors);
    const auto expr = sec.text("expr");
    const auto family = sec.text("family");
    std::optional<std::string> src;
    if (expr && family) {
      sec.error("give either expr or family, not both");
    } else if (expr) {
      src = *expr;
      cfg.theta_source = "expr";
    } else if (family) {
      src = detail::family_expression(*family, sec);
      if (!src) sec.error("unknown family '" + *family + "' (constant, scale_factor_sine, cosh, wave)");
      cfg.theta_source = *family;
    } else {
      sec.error("missing required key 'expr' or 'family'");
    }
    // family_expression reads only its own parameters; the rest are reported as unknown
    sec.reject_unknown();
    if (src) {
      try {
        cfg.theta = parse_theta(*src);
      } catch (const ParseError& e) {
        sec.error(std::string(e.what()));
      }
    }
    if (cfg.mode == Mode::Converge && src && cfg.theta.kind == ThetaSpec::Kind::Full)
      sec.error("converge mode needs theta depending on t only");
  }

  // [initial]
  {
    detail::SectionReader sec(section("initial"), "initial", errors);
    InitialSpec& ini = cfg.initial;
    if (const auto k = sec.text("kind")) {
      static const std::map<std::string, InitialKind> kinds{{"point", InitialKind::Point},
                                                            {"gaussian", InitialKind::Gaussian},
                                                            {"uniform", InitialKind::Uniform},
                                                            {"random", InitialKind::Random},
                                                            {"file", InitialKind::File}};
      const auto it = kinds.find(*k);
      if (it == kinds.end()) sec.error("kind: unknown initial state '" + *k + "'");
      else ini.kind = it->second;
    }
    if (const auto p0 = sec.number<int>("p0")) ini.p0 = *p0;
    const double l_re = sec.number<double>("left").value_or(1.0);
    const double l_im = sec.number<double>("left_im").value_or(0.0);
    const double r_re = sec.number<double>("right").value_or(0.0);
    const double r_im = sec.number<double>("right_im").value_or(0.0);
    ini.left = {l_re, l_im};
    ini.right = {r_re, r_im};
    if (const auto w = sec.number<double>("width")) {
      if (!(*w > 0.0)) sec.error("width must be > 0");
      else ini.width = *w;
    }
    if (const auto s = sec.number<long long>("seed")) {
      if (*s < 0) sec.error("seed must be >= 0");
      else ini.seed = static_cast<std::uint64_t>(*s);
    }
    if (const auto f = sec.text("file")) ini.file = *f;
    sec.reject_unknown();
    if (ini.kind == InitialKind::Random && !ini.seed) sec.error("kind = random requires an explicit seed");
    if (ini.kind == InitialKind::File && ini.file.empty()) sec.error("kind = file requires 'file'");
    if (std::abs(ini.left) == 0.0 && std::abs(ini.right) == 0.0 && ini.kind != InitialKind::Random &&
        ini.kind != InitialKind::File)
      sec.error("left and right amplitudes are both zero");
  }

  // [output]
  {
    detail::SectionReader sec(section("output"), "output", errors);
    if (const auto d = sec.text("dir")) cfg.out_dir = *d;
    if (const auto f = sec.text("format")) {
      if (*f == "csv") cfg.format = OutputFormat::Csv;
      else if (*f == "json") cfg.format = OutputFormat::Json;
      else sec.error("format: expected csv or json, got '" + *f + "'");
    }
    if (const auto f = sec.text("fields")) cfg.fields = detail::split_list(*f);
    if (const auto d = sec.boolean("dump_states")) cfg.dump_states = *d;
    sec.reject_unknown();
  }

  if (!errors.empty()) throw ConfigErrors(std::move(errors));
  return cfg;
}

inline RunConfig load_config(const std::string& path, std::optional<Mode> mode_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigErrors({"cannot read config file '" + path + "'"});
  std::stringstream buf;
  buf << in.rdbuf();
  const auto slash = path.find_last_of('/');
  return parse_config(buf.str(), slash == std::string::npos ? "." : path.substr(0, slash), mode_override);
}

}  // namespace dqwgeom
