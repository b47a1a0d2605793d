#pragma once

#include "lrei/lowrank.hpp"
#include "lrei/sparse.hpp"
#include "lrei/states.hpp"
#include "lrei/types.hpp"

namespace lrei {

enum class Model { QLL, QLLG };

struct ModelKind {
  Model model = Model::QLLG;
  double kappa = 0.0;  // dimensionless damping, >= 0
  double hbar = kHbarMeVps;

  void validate() const {
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
      throw std::invalid_argument("ModelKind: kappa must be finite and >= 0");
    if (!(hbar > 0.0)) throw std::invalid_argument("ModelKind: hbar must be > 0");
  }
};

// X11 = cwd(D11, E11 + L11 + L11^*) with D11 = (i/hbar)(L G - G L),
// G = V^* H V; the denominator entry is 1 - i kappa (lambda_j - lambda_l).
Mat x11_qllg(const Mat& v_tilde, const RVec& lambda, const SparseHermitian& h,
             double kappa, double hbar);

// X12 = cwd(D12, E12 + L12), D12 = (i/hbar) L (V^* H) Vhat; the denominator
// entry is 1 - i kappa lambda_j along row j.
Mat x12_qllg(const Mat& v_tilde, const RVec& lambda, const SparseHermitian& h,
             double kappa, double hbar, const HouseholderStack& stack);

// q-LL blocks; no Sylvester structure, same complement machinery.
std::pair<Mat, Mat> x_blocks_qll(const Mat& v_tilde, const RVec& lambda,
                                 const SparseHermitian& h, double kappa,
                                 double hbar, const HouseholderStack& stack);

// rho_dot = Z V^* + V W^* with Z = V X11 + W and W = Vhat X12^*.
struct RhsFactors {
  Mat z;  // N x r
  Mat w;  // N x r
};

// Compact form used by the integrators: W plus the small X11 block
// (Z is implied as V X11 + W and never materialized).
struct RhsCompact {
  Mat x11;  // r x r
  Mat w;    // N x r
};

RhsCompact rhs_compact(const Mat& v_tilde, const RVec& lambda0,
                       const SparseHermitian& h, const ModelKind& model);

inline RhsCompact rhs_compact(const LowRankState& state,
                              const SparseHermitian& h,
                              const ModelKind& model) {
  return rhs_compact(state.v, state.lambda, h, model);
}

RhsFactors rhs(const LowRankState& state, const SparseHermitian& h,
               const ModelKind& model);

}  // namespace lrei
