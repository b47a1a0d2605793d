#include "lrei/dynamics.hpp"

#include "lrei/audit.hpp"
#include "lrei/kernels.hpp"

namespace lrei {

namespace {

// Hermitize exactly: (G + G^*)/2 entrywise.
Mat hermitize(const Mat& g) {
  return (g + Mat(g.adjoint())) * 0.5;
}

Mat x11_from_gram(const Mat& g, const RVec& lambda, Model model, double kappa,
                  double hbar) {
  const Index r = g.rows();
  Mat x11(r, r);
  const cxd iu(0.0, 1.0);
  for (Index l = 0; l < r; ++l) {
    for (Index j = 0; j < r; ++j) {
      const double d = lambda[j] - lambda[l];
      if (model == Model::QLLG) {
        x11(j, l) = (iu / hbar) * d * g(j, l) / (1.0 - iu * kappa * d);
      } else {
        x11(j, l) = ((iu / hbar) * d - (kappa / hbar) * d * d) * g(j, l);
      }
    }
  }
  return x11;
}

// Row scaling c_j turning V^* H Vhat into X12 (both models).
Vec x12_row_scale(const RVec& lambda, Model model, double kappa, double hbar) {
  const Index r = lambda.size();
  Vec c(r);
  const cxd iu(0.0, 1.0);
  for (Index j = 0; j < r; ++j) {
    if (model == Model::QLLG)
      c[j] = (iu / hbar) * lambda[j] / (1.0 - iu * kappa * lambda[j]);
    else
      c[j] = lambda[j] * (iu - kappa * lambda[j]) / hbar;
  }
  return c;
}

}  // namespace

Mat x11_qllg(const Mat& v_tilde, const RVec& lambda, const SparseHermitian& h,
             double kappa, double hbar) {
  Mat f(v_tilde.rows(), v_tilde.cols());
  h.matmat(v_tilde, f);
  const Mat g = hermitize(kernels::gemm_ah_b(v_tilde, f));
  return x11_from_gram(g, lambda, Model::QLLG, kappa, hbar);
}

Mat x12_qllg(const Mat& v_tilde, const RVec& lambda, const SparseHermitian& h,
             double kappa, double hbar, const HouseholderStack& stack) {
  const Index r = v_tilde.cols();
  Mat f(v_tilde.rows(), r);
  h.matmat(v_tilde, f);
  const Mat a = lambda.asDiagonal() * f.adjoint();  // Lambda V^* H, r x N
  Mat d12 = apply_complement_right(a, stack);
  const cxd iu(0.0, 1.0);
  for (Index j = 0; j < r; ++j)
    d12.row(j) *= (iu / hbar) / (1.0 - iu * kappa * lambda[j]);
  return d12;
}

std::pair<Mat, Mat> x_blocks_qll(const Mat& v_tilde, const RVec& lambda,
                                 const SparseHermitian& h, double kappa,
                                 double hbar, const HouseholderStack& stack) {
  const Index r = v_tilde.cols();
  Mat f(v_tilde.rows(), r);
  h.matmat(v_tilde, f);
  const Mat g = hermitize(kernels::gemm_ah_b(v_tilde, f));
  Mat x11 = x11_from_gram(g, lambda, Model::QLL, kappa, hbar);

  const Mat a = lambda.asDiagonal() * f.adjoint();
  Mat x12 = apply_complement_right(a, stack);
  const cxd iu(0.0, 1.0);
  for (Index j = 0; j < r; ++j)
    x12.row(j) *= (iu - kappa * lambda[j]) / hbar;
  return {std::move(x11), std::move(x12)};
}

RhsCompact rhs_compact(const Mat& v_tilde, const RVec& lambda0,
                       const SparseHermitian& h, const ModelKind& model) {
  model.validate();
  const Index n = v_tilde.rows(), r = v_tilde.cols();
  if (h.dim != n) throw std::invalid_argument("rhs: dimension mismatch");

  audit::BlockTag workspace_tag;
  Mat f(n, r);
  h.matmat(v_tilde, f);

  const Mat g = hermitize(kernels::gemm_ah_b(v_tilde, f));
  Mat x11 = x11_from_gram(g, lambda0, model.model, model.kappa, model.hbar);

  // One Householder factorization per evaluation, shared by the X12 and
  // complement-left products.
  const HouseholderStack stack = householder_from_factor(v_tilde);

  // f -> Q^* H V; bottom block holds (V^* H Vhat)^*.
  stack.apply_q_adjoint(f);
  // Column j of the bottom block picks up conj(c_j) so that after the
  // forward product f becomes W = Vhat X12^*.
  const Vec c = x12_row_scale(lambda0, model.model, model.kappa, model.hbar);
  f.topRows(r).setZero();
  for (Index j = 0; j < r; ++j)
    kernels::scal(std::conj(c[j]), f.col(j).data() + r, n - r);
  stack.apply_q(f);

  return {std::move(x11), std::move(f)};
}

RhsFactors rhs(const LowRankState& state, const SparseHermitian& h,
               const ModelKind& model) {
  RhsCompact c = rhs_compact(state, h, model);
  RhsFactors out;
  out.z = kernels::gemm_tall_small(state.v, c.x11);
  out.z += c.w;
  out.w = std::move(c.w);
  return out;
}

}  // namespace lrei
