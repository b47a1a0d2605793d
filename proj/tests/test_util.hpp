#pragma once

#include "lrei/sparse.hpp"
#include "lrei/spinsys.hpp"
#include "lrei/states.hpp"
#include "lrei/types.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <random>

namespace testutil {

using lrei::cxd;
using lrei::Index;
using lrei::Mat;
using lrei::RVec;
using lrei::Vec;

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Vec random_vec(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = cxd(nd(rng), nd(rng));
  return v;
}

inline Mat random_mat(Index n, Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat a(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = cxd(nd(rng), nd(rng));
  return a;
}

// Independent of the Householder code under test: Eigen's QR.
inline Mat random_orthonormal(Index n, Index r, std::mt19937_64& rng) {
  const Mat a = random_mat(n, r, rng);
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ() * Mat::Identity(n, r);
}

inline RVec random_spectrum(Index r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(0.2, 1.0);
  RVec lambda(r);
  for (Index i = 0; i < r; ++i) lambda[i] = ud(rng);
  std::sort(lambda.data(), lambda.data() + r, std::greater<double>());
  lambda /= lambda.sum();
  return lambda;
}

inline lrei::LowRankState random_state(Index n, Index r, std::mt19937_64& rng) {
  lrei::LowRankState s;
  s.v = random_orthonormal(n, r, rng);
  lrei::phase_normalize_columns(s.v);
  s.lambda = random_spectrum(r, rng);
  return s;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat pauli(int axis) {
  Mat s(2, 2);
  switch (axis) {
    case 0: s << 0, 1, 1, 0; break;
    case 1: s << 0, cxd(0, -1), cxd(0, 1), 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

// Dense Kronecker assembly of a spin operator, the brute-force way.
inline Mat dense_spin_operator(int site, int axis, int n, double hbar) {
  Mat out = Mat::Identity(1, 1);
  for (int i = 1; i <= n; ++i) {
    const Mat factor = (i == site) ? Mat(hbar / 2.0 * pauli(axis))
                                   : Mat(Mat::Identity(2, 2));
    out = kron(out, factor);
  }
  return out;
}

// || V1 V1^* - V2 V2^* ||_max, basis-independent subspace distance.
inline double projector_distance(const Mat& v1, const Mat& v2) {
  const Mat p1 = v1 * v1.adjoint();
  const Mat p2 = v2 * v2.adjoint();
  return (p1 - p2).cwiseAbs().maxCoeff();
}

// Independent dense partial trace over all sites except (k, l), iterating
// the kept-site patterns and summing diagonal rest-blocks entry by entry.
inline Mat partial_trace_2_ref(const Mat& rho, int k, int l, int n) {
  const Index dim = rho.rows();
  Mat out = Mat::Zero(4, 4);
  const Index mk = Index{1} << (n - k);
  const Index ml = Index{1} << (n - l);
  for (Index rest = 0; rest < dim; ++rest) {
    if ((rest & mk) || (rest & ml)) continue;  // rest pattern has holes at k,l
    for (int a = 0; a < 4; ++a) {
      Index row = rest;
      if (a & 2) row |= mk;
      if (a & 1) row |= ml;
      for (int b = 0; b < 4; ++b) {
        Index colidx = rest;
        if (b & 2) colidx |= mk;
        if (b & 1) colidx |= ml;
        out(a, b) += rho(row, colidx);
      }
    }
  }
  return out;
}

// Random sparse Hermitian Hamiltonian on n sites (for oracle comparisons).
inline lrei::SparseHermitian random_hamiltonian(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  lrei::SpinLattice lat = lrei::chain_lattice(n, true);
  lrei::HamiltonianParams p = lrei::HamiltonianParams::natural();
  p.J = ud(rng);
  p.dmi = {Eigen::Vector3d(ud(rng), ud(rng), ud(rng))};
  p.b_field = Eigen::Vector3d(ud(rng), ud(rng), ud(rng));
  return lrei::build_hamiltonian(lat, p);
}

}  // namespace testutil
