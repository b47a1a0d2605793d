#pragma once

#include "lrei/dynamics.hpp"
#include "lrei/spinsys.hpp"
#include "lrei/states.hpp"
#include "lrei/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lrei {

// One pure-state token of the state mini-language.
struct StateToken {
  std::string kind;  // af1 | af2 | ghz | w | basis
  Index basis_index = 0;
};

// Parsed initial-state specification:
//   af1 | af2 | ghz | w | basis:<k> | mix:[(state,weight),...] |
//   werner:(state,p)
struct StateSpec {
  enum class Kind { Pure, Mix, Werner } kind = Kind::Pure;
  std::vector<StateToken> components;
  std::vector<double> weights;
  double werner_p = 0.0;
};

StateSpec parse_state_spec(const std::string& text);
PureState realize_pure(const StateToken& token, int n);

struct ExperimentConfig {
  std::string model = "qllg";  // qll | qllg
  int n_sites = 4;
  std::string lattice = "chain";  // chain | triangular | custom
  bool periodic = false;
  int rows = 0, cols = 0;                      // triangular
  std::vector<std::pair<int, int>> edges;      // custom
  double J = 1.0;
  std::vector<Eigen::Vector3d> dmi;            // empty, uniform, or per edge
  Eigen::Vector3d b_field{0, 0, 0};
  double kappa = 0.0;
  std::string units = "natural";  // natural | mev_ps
  std::string initial_state = "af1";
  std::string scheme = "rk4";
  double h = 0.01;
  double t_final = 1.0;
  std::vector<std::string> observables;  // selector strings, config order
  std::string output = "lrei_out.csv";
  std::uint64_t seed = 1;
  std::string engine = "lrei";  // lrei | dense

  void validate() const;  // throws ConfigError with field diagnostics

  SpinLattice make_lattice() const;
  HamiltonianParams make_params(size_t n_edges) const;
  ModelKind make_model() const;
};

// Flat key = value file; '#' starts a comment. Later keys win, so CLI
// overrides are applied by appending lines.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value, int line_no = 0);

}  // namespace lrei
