#include "lrei/spinsys.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lrei {

void SpinLattice::validate() const {
  if (n_sites < 1) throw std::invalid_argument("lattice: n_sites < 1");
  std::set<std::pair<int, int>> seen;
  for (auto [i, j] : edges) {
    if (i < 1 || j < 1 || i > n_sites || j > n_sites)
      throw std::invalid_argument("lattice: edge site out of range");
    if (i == j) throw std::invalid_argument("lattice: self-loop edge");
    if (i > j) throw std::invalid_argument("lattice: edges must be stored with i < j");
    if (!seen.insert({i, j}).second)
      throw std::invalid_argument("lattice: duplicate edge");
  }
}

SpinLattice chain_lattice(int n, bool periodic) {
  SpinLattice lat;
  lat.n_sites = n;
  lat.preset = LatticePreset::Chain;
  lat.periodic = periodic;
  for (int i = 1; i < n; ++i) lat.edges.push_back({i, i + 1});
  if (periodic && n > 2) lat.edges.push_back({1, n});
  lat.validate();
  return lat;
}

SpinLattice triangular_lattice(int rows, int cols, bool periodic) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("triangular: bad grid");
  SpinLattice lat;
  lat.n_sites = rows * cols;
  lat.preset = LatticePreset::Triangular;
  lat.periodic = periodic;
  auto site = [cols](int r, int c) { return r * cols + c + 1; };
  std::set<std::pair<int, int>> edges;
  auto add = [&](int a, int b) {
    if (a == b) return;
    edges.insert({std::min(a, b), std::max(a, b)});
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const bool right_ok = c + 1 < cols || periodic;
      const bool down_ok = r + 1 < rows || periodic;
      const int cr = (c + 1) % cols, rd = (r + 1) % rows;
      if (right_ok && cols > 1) add(site(r, c), site(r, cr));
      if (down_ok && rows > 1) {
        add(site(r, c), site(rd, c));
        if (right_ok && cols > 1) add(site(r, c), site(rd, cr));
      }
    }
  }
  lat.edges.assign(edges.begin(), edges.end());
  lat.validate();
  return lat;
}

SpinLattice custom_lattice(int n, std::vector<std::pair<int, int>> edges) {
  SpinLattice lat;
  lat.n_sites = n;
  lat.preset = LatticePreset::Custom;
  for (auto& [i, j] : edges)
    if (i > j) std::swap(i, j);
  std::sort(edges.begin(), edges.end());
  lat.edges = std::move(edges);
  lat.validate();
  return lat;
}

HamiltonianParams HamiltonianParams::mev_ps() { return HamiltonianParams{}; }

HamiltonianParams HamiltonianParams::natural() {
  HamiltonianParams p;
  p.hbar = 1.0;
  p.mu = -kBohrMagneton * kLandeG;
  return p;
}

Eigen::Vector3d HamiltonianParams::dmi_for_edge(size_t edge_index) const {
  if (dmi.empty()) return Eigen::Vector3d::Zero();
  if (dmi.size() == 1) return dmi[0];
  return dmi.at(edge_index);
}

SparseHermitian spin_operator(int site, int axis, int n, double hbar) {
  OperatorBuilder b(n, max_sites_limit());
  if (site < 1 || site > n) throw std::invalid_argument("spin_operator: site out of range");
  b.add_site(hbar / 2.0, site, Local2::pauli(axis));
  return b.build();
}

SparseHermitian build_hamiltonian(const SpinLattice& lattice,
                                  const HamiltonianParams& params) {
  lattice.validate();
  if (!params.dmi.empty() && params.dmi.size() != 1 &&
      params.dmi.size() != lattice.edges.size())
    throw std::invalid_argument("build_hamiltonian: dmi list does not match edge count");
  if (!std::isfinite(params.J) || !std::isfinite(params.hbar) ||
      !params.b_field.allFinite())
    throw std::invalid_argument("build_hamiltonian: non-finite parameter");

  const int n = lattice.n_sites;
  const double hbar = params.hbar;
  const double spin2 = hbar * hbar / 4.0;  // scale of S_i^a S_j^b
  OperatorBuilder b(n, max_sites_limit());

  // (2J/hbar^2) S_i.S_j  ==  (J/2) sum_a sigma_i^a sigma_j^a
  for (auto [i, j] : lattice.edges) {
    const double cJ = 2.0 * params.J / (hbar * hbar) * spin2;
    for (int a = 0; a < 3; ++a)
      b.add_pair(cJ, i, j, Local2::pauli(a), Local2::pauli(a));
  }

  // (2/hbar^2) d_ij . (S_i x S_j)
  for (size_t e = 0; e < lattice.edges.size(); ++e) {
    const auto [i, j] = lattice.edges[e];
    const Eigen::Vector3d d = params.dmi_for_edge(e);
    if (d.isZero(0.0)) continue;
    const double cD = 2.0 / (hbar * hbar) * spin2;
    // (S_i x S_j)_a = eps_abc S_i^b S_j^c
    const int eps[3][2][2] = {{{1, 2}, {2, 1}}, {{2, 0}, {0, 2}}, {{0, 1}, {1, 0}}};
    for (int a = 0; a < 3; ++a) {
      if (d[a] == 0.0) continue;
      b.add_pair(cD * d[a], i, j, Local2::pauli(eps[a][0][0]), Local2::pauli(eps[a][0][1]));
      b.add_pair(-cD * d[a], i, j, Local2::pauli(eps[a][1][0]), Local2::pauli(eps[a][1][1]));
    }
  }

  // -mu sum_i b.S_i
  for (int i = 1; i <= n; ++i)
    for (int a = 0; a < 3; ++a)
      if (params.b_field[a] != 0.0)
        b.add_site(-params.mu * params.b_field[a] * hbar / 2.0, i, Local2::pauli(a));

  return b.build();
}

SparseHermitian magnetization_operator(int axis, int n, double hbar) {
  OperatorBuilder b(n, max_sites_limit());
  for (int i = 1; i <= n; ++i)
    b.add_site(hbar / (2.0 * n), i, Local2::pauli(axis));
  return b.build();
}

}  // namespace lrei
