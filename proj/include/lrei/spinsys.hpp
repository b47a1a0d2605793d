#pragma once

#include "lrei/sparse.hpp"
#include "lrei/types.hpp"

#include <utility>
#include <vector>

namespace lrei {

enum class LatticePreset { Chain, Triangular, Custom };

struct SpinLattice {
  int n_sites = 0;
  std::vector<std::pair<int, int>> edges;  // ordered (i, j), i < j, 1-based
  LatticePreset preset = LatticePreset::Custom;
  bool periodic = false;

  void validate() const;
};

SpinLattice chain_lattice(int n, bool periodic);
SpinLattice triangular_lattice(int rows, int cols, bool periodic);
SpinLattice custom_lattice(int n, std::vector<std::pair<int, int>> edges);

struct HamiltonianParams {
  double J = 0.0;                       // exchange coupling (meV)
  std::vector<Eigen::Vector3d> dmi;     // per stored edge; size 1 = uniform
  Eigen::Vector3d b_field{0, 0, 0};     // Tesla
  double hbar = kHbarMeVps;
  double mu = -kBohrMagneton * kLandeG / kHbarMeVps;

  static HamiltonianParams mev_ps();
  static HamiltonianParams natural();

  Eigen::Vector3d dmi_for_edge(size_t edge_index) const;
};

// (hbar/2) * sigma_axis at tensor slot `site` of an n-site register,
// site 1 = most significant bit. axis: 0,1,2 = x,y,z.
SparseHermitian spin_operator(int site, int axis, int n, double hbar);

// H = (2J/hbar^2) sum_edges S_i.S_j + (2/hbar^2) sum_edges d_ij.(S_i x S_j)
//     - mu sum_i b.S_i, each unordered edge counted once.
SparseHermitian build_hamiltonian(const SpinLattice& lattice,
                                  const HamiltonianParams& params);

// M_v = (1/n) sum_i S_i^v
SparseHermitian magnetization_operator(int axis, int n, double hbar);

}  // namespace lrei
