#pragma once

#include "lrei/dynamics.hpp"
#include "lrei/integrate.hpp"
#include "lrei/sparse.hpp"
#include "lrei/states.hpp"
#include "lrei/types.hpp"

namespace lrei::oracle {

// Dense O(N^3) reference path, compiled into its own library target so
// production binaries can exclude it. Hard size guard at N = 2^10.

inline constexpr Index kDenseGuard = Index{1} << 10;

struct DenseState {
  Mat rho;

  Index dim() const { return rho.rows(); }
  void validate(double tol_herm = 1e-12, double tol_trace = 1e-12,
                double tol_psd = 1e-10) const;
};

DenseState dense_from_lowrank(const LowRankState& s);

// Right-hand side: q-LL directly from the double commutator, q-LLG through
// the eigenbasis solve of the Sylvester-type equation.
Mat dense_rhs(const DenseState& rho, const SparseHermitian& h,
              const ModelKind& model);

// One conservative RK step of the dense eigenmode integration method:
// every stage is eigendecomposed and rebuilt with the initial spectrum
// before the RHS is evaluated; the combination is projected the same way.
DenseState ei_step(const DenseState& rho, const SparseHermitian& h,
                   const ModelKind& model, const RKTableau& tableau, double dt,
                   const RVec& lambda0);

// Convenience trajectory driver for the dense engine.
std::vector<DenseState> ei_evolve(const DenseState& rho0,
                                  const SparseHermitian& h,
                                  const ModelKind& model,
                                  const RKTableau& tableau, double dt,
                                  long n_steps);

// Closed-form rank-1 solution: rho(t) = E rho0 E^* / Tr(...) with
// E = exp(-(i/hbar)(1 - i kappa) H t); q-LLG evaluates at t/(1+kappa^2).
DenseState exact_rank1(const PureState& psi0, const SparseHermitian& h,
                       double kappa, double hbar, double t, Model model);

// phi <- exp(theta H) psi. Scaling-and-squaring on the densified matrix
// for N <= 2^8, Lanczos exp-action above.
Vec expm_action(const SparseHermitian& h, cxd theta, const Vec& psi);

// Top-r eigenpairs by full dense decomposition, with the same sorting and
// phase conventions as lanczos_topk.
std::pair<Mat, RVec> dense_partial_eig(const Mat& m, Index r);

// Brute-force two-site partial trace of a dense density matrix;
// sites are 1-based, site 1 = most significant bit.
Eigen::Matrix4cd partial_trace_2(const Mat& rho, int k, int l);

}  // namespace lrei::oracle
