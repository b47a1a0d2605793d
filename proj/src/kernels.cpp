#include "lrei/kernels.hpp"

#include <atomic>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lrei::kernels {

namespace {

std::atomic<ExecMode> g_mode{
#ifdef _OPENMP
    ExecMode::Parallel
#else
    ExecMode::Serial
#endif
};

inline bool parallel_for(Index work) {
  // Small problems stay serial; bitwise result is unchanged either way.
  return g_mode.load(std::memory_order_relaxed) == ExecMode::Parallel &&
         work >= (Index{1} << 15);
}

inline Index nblocks(Index n) { return (n + kBlock - 1) / kBlock; }

}  // namespace

ExecMode mode() { return g_mode.load(std::memory_order_relaxed); }
void set_mode(ExecMode m) { g_mode.store(m, std::memory_order_relaxed); }

cxd dotc(const cxd* x, const cxd* y, Index n) {
  const Index nb = nblocks(n);
  if (nb <= 1) {
    cxd acc{};
    for (Index i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
    return acc;
  }
  std::vector<cxd> part(static_cast<size_t>(nb));
  const bool par = parallel_for(n);
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    cxd acc{};
    for (Index i = i0; i < i1; ++i) acc += std::conj(x[i]) * y[i];
    part[static_cast<size_t>(b)] = acc;
  }
  cxd acc{};
  for (Index b = 0; b < nb; ++b) acc += part[static_cast<size_t>(b)];
  return acc;
}

double nrm2(const cxd* x, Index n) {
  const Index nb = nblocks(n);
  std::vector<double> part(static_cast<size_t>(nb));
  const bool par = parallel_for(n);
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    double acc = 0;
    for (Index i = i0; i < i1; ++i) acc += std::norm(x[i]);
    part[static_cast<size_t>(b)] = acc;
  }
  double acc = 0;
  for (Index b = 0; b < nb; ++b) acc += part[static_cast<size_t>(b)];
  return std::sqrt(acc);
}

void axpy(cxd a, const cxd* x, cxd* y, Index n) {
  const bool par = parallel_for(n);
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal(cxd a, cxd* x, Index n) {
  const bool par = parallel_for(n);
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) x[i] *= a;
}

void multi_dotc(const Mat& U, Index m, const cxd* x, cxd* out) {
  const Index n = U.rows();
  const Index nb = nblocks(n);
  std::vector<cxd> part(static_cast<size_t>(nb * m));
  const bool par = parallel_for(n * m);
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    for (Index c = 0; c < m; ++c) {
      const cxd* u = U.col(c).data();
      cxd acc{};
      for (Index i = i0; i < i1; ++i) acc += std::conj(u[i]) * x[i];
      part[static_cast<size_t>(b * m + c)] = acc;
    }
  }
  for (Index c = 0; c < m; ++c) out[c] = cxd{};
  for (Index b = 0; b < nb; ++b)
    for (Index c = 0; c < m; ++c) out[c] += part[static_cast<size_t>(b * m + c)];
}

void gemv_acc(const Mat& U, Index m, const cxd* t, cxd* y) {
  const Index n = U.rows();
  const Index nb = nblocks(n);
  const bool par = parallel_for(n * m);
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    for (Index c = 0; c < m; ++c) {
      const cxd* u = U.col(c).data();
      const cxd tc = t[c];
      for (Index i = i0; i < i1; ++i) y[i] += u[i] * tc;
    }
  }
}

void gemv_sub(const Mat& U, Index m, const cxd* t, cxd* y) {
  const Index n = U.rows();
  const Index nb = nblocks(n);
  const bool par = parallel_for(n * m);
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    for (Index c = 0; c < m; ++c) {
      const cxd* u = U.col(c).data();
      const cxd tc = t[c];
      for (Index i = i0; i < i1; ++i) y[i] -= u[i] * tc;
    }
  }
}

Mat gemm_ah_b(const Mat& A, const Mat& B) {
  const Index n = A.rows(), p = A.cols(), q = B.cols();
  const Index nb = nblocks(n);
  Mat C(p, q);
  std::vector<cxd> part(static_cast<size_t>(nb * p * q));
  const bool par = parallel_for(n * p * q);
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    cxd* pp = part.data() + b * p * q;
    for (Index cq = 0; cq < q; ++cq) {
      const cxd* bc = B.col(cq).data();
      for (Index cp = 0; cp < p; ++cp) {
        const cxd* ac = A.col(cp).data();
        cxd acc{};
        for (Index i = i0; i < i1; ++i) acc += std::conj(ac[i]) * bc[i];
        pp[cq * p + cp] = acc;
      }
    }
  }
  C.setZero();
  for (Index b = 0; b < nb; ++b) {
    const cxd* pp = part.data() + b * p * q;
    for (Index cq = 0; cq < q; ++cq)
      for (Index cp = 0; cp < p; ++cp) C(cp, cq) += pp[cq * p + cp];
  }
  return C;
}

Mat gemm_tall_small(const Mat& A, const Mat& S) {
  const Index n = A.rows(), r = A.cols(), q = S.cols();
  Mat C = Mat::Zero(n, q);
  const Index nb = nblocks(n);
  const bool par = parallel_for(n * r);
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(n, i0 + kBlock);
    for (Index cq = 0; cq < q; ++cq) {
      cxd* cc = C.col(cq).data();
      for (Index cr = 0; cr < r; ++cr) {
        const cxd* ac = A.col(cr).data();
        const cxd s = S(cr, cq);
        for (Index i = i0; i < i1; ++i) cc[i] += ac[i] * s;
      }
    }
  }
  return C;
}

void reflect_block(cxd* bptr, Index n, Index m, Index ld, const cxd* u,
                   double beta, Index k) {
  if (beta == 0.0) return;
  const Index len = n - k;
  const Index nb = nblocks(len);
  const cxd* up = u + k;

  // w = u^* B on rows [k, n)
  std::vector<cxd> part(static_cast<size_t>(nb * m));
  const bool par = parallel_for(len * m);
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(len, i0 + kBlock);
    for (Index c = 0; c < m; ++c) {
      const cxd* bc = bptr + c * ld + k;
      cxd acc{};
      for (Index i = i0; i < i1; ++i) acc += std::conj(up[i]) * bc[i];
      part[static_cast<size_t>(b * m + c)] = acc;
    }
  }
  std::vector<cxd> w(static_cast<size_t>(m), cxd{});
  for (Index b = 0; b < nb; ++b)
    for (Index c = 0; c < m; ++c)
      w[static_cast<size_t>(c)] += part[static_cast<size_t>(b * m + c)];

  // B(i,c) -= beta * u[i] * w[c]
#pragma omp parallel for schedule(static) if (par)
  for (Index b = 0; b < nb; ++b) {
    const Index i0 = b * kBlock, i1 = std::min(len, i0 + kBlock);
    for (Index c = 0; c < m; ++c) {
      cxd* bc = bptr + c * ld + k;
      const cxd f = beta * w[static_cast<size_t>(c)];
      for (Index i = i0; i < i1; ++i) bc[i] -= f * up[i];
    }
  }
}

}  // namespace lrei::kernels
