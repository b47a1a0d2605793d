#include "lrei/config.hpp"

#include "lrei/integrate.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace lrei {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

[[noreturn]] void fail(int line, const std::string& what) {
  if (line > 0)
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
  throw ConfigError("config: " + what);
}

double to_double(const std::string& s, int line, const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    fail(line, "invalid number for '" + key + "': " + s);
  }
}

long to_long(const std::string& s, int line, const std::string& key) {
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    fail(line, "invalid integer for '" + key + "': " + s);
  }
}

bool to_bool(const std::string& s, int line, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(line, "invalid boolean for '" + key + "': " + s);
}

Eigen::Vector3d to_vec3(const std::string& s, int line, const std::string& key) {
  const auto parts = split(s, ',');
  if (parts.size() != 3) fail(line, "'" + key + "' needs three comma-separated values");
  return {to_double(parts[0], line, key), to_double(parts[1], line, key),
          to_double(parts[2], line, key)};
}

}  // namespace

StateSpec parse_state_spec(const std::string& text) {
  const std::string s = trim(text);
  auto parse_token = [](const std::string& t) -> StateToken {
    if (t == "af1" || t == "af2" || t == "ghz" || t == "w") return {t, 0};
    if (t.starts_with("basis:")) {
      try {
        return {"basis", std::stol(t.substr(6))};
      } catch (...) {
        throw ConfigError("bad basis index in state '" + t + "'");
      }
    }
    throw ConfigError("unknown state token '" + t +
                      "'; expected af1, af2, ghz, w, or basis:<index>");
  };

  StateSpec spec;
  if (s.starts_with("mix:")) {
    spec.kind = StateSpec::Kind::Mix;
    std::string body = trim(s.substr(4));
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      throw ConfigError("mix spec must look like mix:[(state,weight),...]");
    body = body.substr(1, body.size() - 2);
    size_t pos = 0;
    while (pos < body.size()) {
      const size_t open = body.find('(', pos);
      if (open == std::string::npos) break;
      const size_t close = body.find(')', open);
      if (close == std::string::npos)
        throw ConfigError("mix spec: unbalanced parenthesis");
      const auto parts = split(body.substr(open + 1, close - open - 1), ',');
      if (parts.size() != 2) throw ConfigError("mix spec: each entry is (state,weight)");
      spec.components.push_back(parse_token(parts[0]));
      try {
        spec.weights.push_back(std::stod(parts[1]));
      } catch (...) {
        throw ConfigError("mix spec: bad weight '" + parts[1] + "'");
      }
      pos = close + 1;
    }
    if (spec.components.empty()) throw ConfigError("mix spec: no components");
    return spec;
  }
  if (s.starts_with("werner:")) {
    spec.kind = StateSpec::Kind::Werner;
    std::string body = trim(s.substr(7));
    if (body.size() < 2 || body.front() != '(' || body.back() != ')')
      throw ConfigError("werner spec must look like werner:(state,p)");
    const auto parts = split(body.substr(1, body.size() - 2), ',');
    if (parts.size() != 2) throw ConfigError("werner spec: expected (state,p)");
    spec.components.push_back(parse_token(parts[0]));
    try {
      spec.werner_p = std::stod(parts[1]);
    } catch (...) {
      throw ConfigError("werner spec: bad p '" + parts[1] + "'");
    }
    if (!(spec.werner_p > 0.0 && spec.werner_p < 1.0))
      throw ConfigError("werner spec: p must be in (0,1)");
    return spec;
  }
  spec.kind = StateSpec::Kind::Pure;
  spec.components.push_back(parse_token(s));
  return spec;
}

PureState realize_pure(const StateToken& token, int n) {
  if (token.kind == "af1") return af_state(1, n);
  if (token.kind == "af2") return af_state(2, n);
  if (token.kind == "ghz") return ghz_state(n);
  if (token.kind == "w") return w_state(n);
  if (token.kind == "basis") return basis_state(token.basis_index, n);
  throw ConfigError("unknown state token kind '" + token.kind + "'");
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value, int line) {
  if (key == "model") cfg.model = value;
  else if (key == "n_sites") cfg.n_sites = static_cast<int>(to_long(value, line, key));
  else if (key == "lattice") cfg.lattice = value;
  else if (key == "periodic") cfg.periodic = to_bool(value, line, key);
  else if (key == "rows") cfg.rows = static_cast<int>(to_long(value, line, key));
  else if (key == "cols") cfg.cols = static_cast<int>(to_long(value, line, key));
  else if (key == "edges") {
    cfg.edges.clear();
    for (const auto& part : split(value, ',')) {
      if (part.empty()) continue;
      const auto ends = split(part, '-');
      if (ends.size() != 2) fail(line, "edge '" + part + "' must look like i-j");
      cfg.edges.push_back({static_cast<int>(to_long(ends[0], line, key)),
                           static_cast<int>(to_long(ends[1], line, key))});
    }
  } else if (key == "J") cfg.J = to_double(value, line, key);
  else if (key == "dmi") {
    cfg.dmi.clear();
    for (const auto& part : split(value, ';'))
      if (!part.empty()) cfg.dmi.push_back(to_vec3(part, line, key));
  } else if (key == "b_field") cfg.b_field = to_vec3(value, line, key);
  else if (key == "kappa") cfg.kappa = to_double(value, line, key);
  else if (key == "units") cfg.units = value;
  else if (key == "initial_state") cfg.initial_state = value;
  else if (key == "scheme") cfg.scheme = value;
  else if (key == "h") cfg.h = to_double(value, line, key);
  else if (key == "t_final") cfg.t_final = to_double(value, line, key);
  else if (key == "observables") {
    cfg.observables.clear();
    std::istringstream iss(value);
    std::string tok;
    while (iss >> tok) cfg.observables.push_back(tok);
  } else if (key == "output") cfg.output = value;
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(value, line, key));
  else if (key == "engine") cfg.engine = value;
  else fail(line, "unknown key '" + key + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream iss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(iss, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    apply_override(cfg, key, value, line_no);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return parse_config_text(oss.str());
}

void ExperimentConfig::validate() const {
  if (model != "qll" && model != "qllg")
    throw ConfigError("model must be qll or qllg");
  if (n_sites < 1) throw ConfigError("n_sites must be >= 1");
  if (n_sites > max_sites_limit())
    throw ConfigError("n_sites exceeds the site guard (" +
                      std::to_string(max_sites_limit()) +
                      "); set LREI_MAX_SITES to override");
  if (lattice != "chain" && lattice != "triangular" && lattice != "custom")
    throw ConfigError("lattice must be chain, triangular, or custom");
  if (lattice == "triangular" && (rows < 1 || cols < 1 || rows * cols != n_sites))
    throw ConfigError("triangular lattice needs rows*cols == n_sites");
  if (!(std::isfinite(J) && std::isfinite(kappa) && b_field.allFinite()))
    throw ConfigError("physical parameters must be finite");
  for (const auto& d : dmi)
    if (!d.allFinite()) throw ConfigError("dmi must be finite");
  if (kappa < 0) throw ConfigError("kappa must be >= 0");
  if (units != "natural" && units != "mev_ps")
    throw ConfigError("units must be natural or mev_ps");
  try {
    parse_scheme(scheme);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(h > 0)) throw ConfigError("h must be > 0");
  if (!(t_final > 0)) throw ConfigError("t_final must be > 0");
  if (h > t_final * (1 + 1e-12)) throw ConfigError("h must be <= t_final");
  if (engine != "lrei" && engine != "dense")
    throw ConfigError("engine must be lrei or dense");
  if (engine == "dense" && n_sites > 10)
    throw ConfigError("dense engine is limited to n_sites <= 10");
  parse_state_spec(initial_state);
}

SpinLattice ExperimentConfig::make_lattice() const {
  if (lattice == "chain") return chain_lattice(n_sites, periodic);
  if (lattice == "triangular") return triangular_lattice(rows, cols, periodic);
  return custom_lattice(n_sites, edges);
}

HamiltonianParams ExperimentConfig::make_params(size_t n_edges) const {
  HamiltonianParams p =
      units == "natural" ? HamiltonianParams::natural() : HamiltonianParams::mev_ps();
  p.J = J;
  p.b_field = b_field;
  if (!dmi.empty() && dmi.size() != 1 && dmi.size() != n_edges)
    throw ConfigError("dmi list must be uniform or match the edge count");
  p.dmi = dmi;
  return p;
}

ModelKind ExperimentConfig::make_model() const {
  ModelKind m;
  m.model = model == "qll" ? Model::QLL : Model::QLLG;
  m.kappa = kappa;
  m.hbar = units == "natural" ? 1.0 : kHbarMeVps;
  return m;
}

}  // namespace lrei
