#pragma once

#include "lrei/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace lrei {

// r Householder reflectors P_k = I - beta_k u_k u_k^* plus a column-phase
// diagonal, encoding the full unitary Q = P_1...P_r diag(phase, I) whose
// first r columns equal the factor the stack was built from. u_k is zero
// above row k.
struct HouseholderStack {
  Mat u;       // N x r
  RVec beta;   // r
  Vec phase;   // r, unit modulus

  Index dim() const { return u.rows(); }
  Index rank() const { return u.cols(); }

  // In-place B <- Q B and B <- Q^* B.
  void apply_q(Mat& b) const;
  void apply_q_adjoint(Mat& b) const;
};

// Build the stack from an orthonormal N x r factor; cost ~ 2 N r^2.
// Throws when a pivot norm falls below 1e-13 (rank-deficient input).
HouseholderStack householder_from_factor(const Mat& v_tilde);

// A (r x N) times the orthonormal complement of the stack's factor,
// returned as r x (N-r). No N x N or N x (N-r) intermediate is formed.
Mat apply_complement_right(const Mat& a, const HouseholderStack& stack);

// Complement times A ((N-r) x m), returned as N x m, via the zero-padded
// product Q [0; A].
Mat apply_complement_left(const Mat& a, const HouseholderStack& stack);

// Formal sum of low-rank products. Each term contributes
//   coeff * left * small * (right^* x)
// (small empty = identity). With hermitian_pairs set, the adjoint of each
// term is added as well, making the represented operator Hermitian by
// construction.
struct LowRankTerm {
  const Mat* left = nullptr;
  const Mat* right = nullptr;
  cxd coeff{1.0, 0.0};
  Mat small;  // r x r insert, empty for identity
};

struct LowRankSum {
  Index dim = 0;
  bool hermitian_pairs = false;
  std::vector<LowRankTerm> terms;

  void matvec(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> y) const;
  Mat dense() const;  // test support, guarded
};

Vec lowrank_matvec(const LowRankSum& sum, const Vec& x);

using MatVecFn = std::function<void(Eigen::Ref<const Vec>, Eigen::Ref<Vec>)>;

struct LanczosOptions {
  double tol = 1e-10;          // residual target relative to |lambda_1|
  int max_restarts_factor = 50;  // budget = factor * r restart cycles
  Index krylov_dim = 0;        // 0 -> max(2r+1, r+8), capped at N
  std::uint64_t seed = 0x9E3779B97F4A7C15ull;
  const Vec* start = nullptr;  // optional start vector (copied)
  bool verify = false;         // recompute true residuals before returning
};

struct LanczosResult {
  Mat v;           // N x r, phase-normalized
  RVec lambda;     // descending
  RVec residuals;  // per returned pair
  int restarts = 0;
};

class LanczosError : public std::runtime_error {
 public:
  LanczosError(const std::string& what, RVec best)
      : std::runtime_error(what), best_residuals(std::move(best)) {}
  RVec best_residuals;
};

// Thick-restart Lanczos with full reorthogonalization for the r
// algebraically largest eigenpairs of a Hermitian operator given only
// through its matvec. Exact invariant subspaces (happy breakdown) are
// handled by injecting a fresh orthogonal direction, which also resolves
// degenerate spectra.
LanczosResult lanczos_topk(const MatVecFn& op, Index n, Index r,
                           const LanczosOptions& opts = {});

}  // namespace lrei
