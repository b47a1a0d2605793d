#pragma once

#include "lrei/types.hpp"

namespace lrei::kernels {

// Execution mode for the data-parallel kernels. Reductions are evaluated
// block-wise in a fixed order, so Serial and Parallel produce bitwise
// identical results for any thread count.
enum class ExecMode { Serial, Parallel };

ExecMode mode();
void set_mode(ExecMode m);

// Fixed reduction block length (elements). Part of the numerical contract:
// changing it changes low-order bits of every reduction.
inline constexpr Index kBlock = 4096;

// x^* y
cxd dotc(const cxd* x, const cxd* y, Index n);
inline cxd dotc(const Vec& x, const Vec& y) {
  return dotc(x.data(), y.data(), x.size());
}

double nrm2(const cxd* x, Index n);
inline double nrm2(const Vec& x) { return nrm2(x.data(), x.size()); }

// y += a x
void axpy(cxd a, const cxd* x, cxd* y, Index n);
inline void axpy(cxd a, const Vec& x, Vec& y) {
  axpy(a, x.data(), y.data(), x.size());
}

void scal(cxd a, cxd* x, Index n);
inline void scal(cxd a, Vec& x) { scal(a, x.data(), x.size()); }

// out[c] = U(:,c)^* x for c in [0, m)  (single fused pass over rows)
void multi_dotc(const Mat& U, Index m, const cxd* x, cxd* out);

// y += U(:,0..m-1) * t  (single fused pass over rows)
void gemv_acc(const Mat& U, Index m, const cxd* t, cxd* y);

// y -= U(:,0..m-1) * t
void gemv_sub(const Mat& U, Index m, const cxd* t, cxd* y);

// C = A^* B, A is N x p, B is N x q, C is p x q. Deterministic blocked
// reduction per entry; row pass is shared across columns.
Mat gemm_ah_b(const Mat& A, const Mat& B);

// C = A * S for tall A (N x r) and small S (r x q); row-parallel.
Mat gemm_tall_small(const Mat& A, const Mat& S);

// Reflector application B -= beta * u * (u^* B) on rows [k, n) of an
// n x m column-major block with leading dimension ld. Two fused passes.
void reflect_block(cxd* b, Index n, Index m, Index ld, const cxd* u,
                   double beta, Index k);
inline void reflect_block(Mat& B, const Vec& u, double beta, Index k) {
  reflect_block(B.data(), B.rows(), B.cols(), B.rows(), u.data(), beta, k);
}

}  // namespace lrei::kernels
