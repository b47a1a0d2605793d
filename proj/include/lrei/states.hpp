#pragma once

#include "lrei/types.hpp"

#include <string>
#include <vector>

namespace lrei {

struct PureState {
  Vec amplitudes;
  std::string label;

  Index dim() const { return amplitudes.size(); }
};

// Factored density matrix rho = V diag(lambda) V^*. The eigenvalue vector
// is fixed for the lifetime of a simulation (spectrum projection).
struct LowRankState {
  Mat v;        // N x r, orthonormal columns
  RVec lambda;  // positive, sorted descending, sums to 1

  Index dim() const { return v.rows(); }
  Index rank() const { return v.cols(); }

  Mat dense() const;  // guarded reconstruction for tests / small n
  void validate(double tol = 1e-12) const;
};

// Scale each column so its largest-magnitude entry is real positive.
void phase_normalize_columns(Mat& v);

PureState af_state(int variant, int n);
PureState ghz_state(int n);
PureState w_state(int n);
PureState basis_state(Index index_one_based, int n);

// rho0 = sum_k w_k |psi_k><psi_k| in factored form via the Gram
// eigenproblem of the weighted component matrix. Eigenvalues below
// 1e-12 * max are dropped; the returned rank may be below the component
// count when states overlap.
LowRankState mix(const std::vector<PureState>& components,
                 const std::vector<double>& weights);

struct WernerSplit {
  LowRankState low_rank;  // rank-1 |psi><psi|
  double p;
};

// rho_W = p I/2^n + (1-p) |psi><psi|. The caller evolves the rank-1 part
// with damping (1-p)*kappa and reconstructs rho(t) from the pair.
WernerSplit werner_split(const PureState& psi, double p);

}  // namespace lrei
