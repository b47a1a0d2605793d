#include "lrei/lowrank.hpp"

#include "lrei/kernels.hpp"
#include "lrei/states.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace lrei {

namespace {
constexpr double kPivotTol = 1e-13;
constexpr double kBreakdownTol = 1e-13;
}  // namespace

void HouseholderStack::apply_q(Mat& b) const {
  const Index r = rank();
  for (Index i = 0; i < r; ++i) b.row(i) *= phase[i];
  for (Index k = r - 1; k >= 0; --k)
    kernels::reflect_block(b.data(), b.rows(), b.cols(), b.rows(),
                           u.col(k).data(), beta[k], k);
}

void HouseholderStack::apply_q_adjoint(Mat& b) const {
  const Index r = rank();
  for (Index k = 0; k < r; ++k)
    kernels::reflect_block(b.data(), b.rows(), b.cols(), b.rows(),
                           u.col(k).data(), beta[k], k);
  for (Index i = 0; i < r; ++i) b.row(i) *= std::conj(phase[i]);
}

HouseholderStack householder_from_factor(const Mat& v_tilde) {
  const Index n = v_tilde.rows(), r = v_tilde.cols();
  if (r < 1 || n < r)
    throw std::invalid_argument("householder_from_factor: bad factor shape");

  HouseholderStack s;
  s.u = Mat::Zero(n, r);
  s.beta = RVec::Zero(r);
  s.phase = Vec::Ones(r);

  Mat c = v_tilde;
  for (Index k = 0; k < r; ++k) {
    const cxd alpha = c(k, k);
    const double alpha_abs = std::abs(alpha);
    const double subnorm =
        (k + 1 < n) ? kernels::nrm2(c.col(k).data() + k + 1, n - k - 1) : 0.0;
    const double normx = std::hypot(alpha_abs, subnorm);
    if (normx < kPivotTol)
      throw std::invalid_argument(
          "householder_from_factor: rank-deficient factor at column " +
          std::to_string(k));

    if (subnorm == 0.0) {
      // column already reduced: P_k = I
      s.phase[k] = alpha / alpha_abs;
      continue;
    }

    const cxd sign = alpha_abs > 0.0 ? alpha / alpha_abs : cxd(1.0);
    s.u.col(k).segment(k, n - k) = c.col(k).segment(k, n - k);
    s.u(k, k) += sign * normx;
    s.beta[k] = 1.0 / (normx * (normx + alpha_abs));
    s.phase[k] = -sign;  // R diagonal becomes -sign * normx

    if (k + 1 < r)
      kernels::reflect_block(c.data() + (k + 1) * n, n, r - k - 1, n,
                             s.u.col(k).data(), s.beta[k], k);
  }
  return s;
}

Mat apply_complement_right(const Mat& a, const HouseholderStack& stack) {
  const Index n = stack.dim(), r = stack.rank();
  if (a.cols() != n)
    throw std::invalid_argument("apply_complement_right: dimension mismatch");
  Mat t = a.adjoint();
  stack.apply_q_adjoint(t);  // Q^* A^*
  return t.bottomRows(n - r).adjoint();
}

Mat apply_complement_left(const Mat& a, const HouseholderStack& stack) {
  const Index n = stack.dim(), r = stack.rank();
  if (a.rows() != n - r)
    throw std::invalid_argument("apply_complement_left: dimension mismatch");
  Mat b = Mat::Zero(n, a.cols());
  b.bottomRows(n - r) = a;
  stack.apply_q(b);
  return b;
}

void LowRankSum::matvec(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> y) const {
  if (x.size() != dim)
    throw std::invalid_argument("lowrank_matvec: dimension mismatch");
  y.setZero();
  Vec p, t;
  for (const LowRankTerm& term : terms) {
    const Index rl = term.right->cols();
    p.resize(rl);
    kernels::multi_dotc(*term.right, rl, x.data(), p.data());
    if (term.small.size())
      t = term.coeff * (term.small * p);
    else
      t = term.coeff * p;
    kernels::gemv_acc(*term.left, term.left->cols(), t.data(), y.data());
    if (hermitian_pairs) {
      const Index rr = term.left->cols();
      p.resize(rr);
      kernels::multi_dotc(*term.left, rr, x.data(), p.data());
      if (term.small.size())
        t = std::conj(term.coeff) * (term.small.adjoint() * p);
      else
        t = std::conj(term.coeff) * p;
      kernels::gemv_acc(*term.right, term.right->cols(), t.data(), y.data());
    }
  }
}

Mat LowRankSum::dense() const {
  if (dim > (Index{1} << 12))
    throw ResourceGuardError("LowRankSum::dense: dimension too large");
  Mat m = Mat::Zero(dim, dim);
  for (const LowRankTerm& term : terms) {
    Mat contrib;
    if (term.small.size())
      contrib = term.coeff * (*term.left) * term.small * term.right->adjoint();
    else
      contrib = term.coeff * (*term.left) * term.right->adjoint();
    m += contrib;
    if (hermitian_pairs) m += contrib.adjoint();
  }
  return m;
}

Vec lowrank_matvec(const LowRankSum& sum, const Vec& x) {
  Vec y(sum.dim);
  sum.matvec(x, y);
  return y;
}

LanczosResult lanczos_topk(const MatVecFn& op, Index n, Index r,
                           const LanczosOptions& opts) {
  if (r < 1 || r > n) throw std::invalid_argument("lanczos_topk: bad rank request");

  Index m = opts.krylov_dim > 0 ? opts.krylov_dim : std::max(2 * r + 1, r + 8);
  m = std::min(m, n);
  if (m < n) m = std::max(m, std::min(n, r + 2));

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  auto random_fill = [&](Vec& v) {
    for (Index i = 0; i < n; ++i) v[i] = cxd(nd(rng), nd(rng));
    v /= kernels::nrm2(v);
  };

  Mat basis(n, m);
  Mat proj = Mat::Zero(m, m);  // measured U^* M U (upper triangle + diag)
  Vec w(n);

  // Full reorthogonalization against columns [0, j] of the basis; the
  // measured coefficients go into column jcol of the projection. A second
  // pass runs only when the first one removed a large component.
  Vec h(m);
  auto reorth = [&](Index j, Vec& wv, Index jcol, bool record) {
    const double before = kernels::nrm2(wv);
    kernels::multi_dotc(basis, j + 1, wv.data(), h.data());
    kernels::gemv_sub(basis, j + 1, h.data(), wv.data());
    if (record)
      for (Index i = 0; i <= j; ++i) proj(i, jcol) += h[i];
    const double after = kernels::nrm2(wv);
    if (after < 0.7071 * before) {
      kernels::multi_dotc(basis, j + 1, wv.data(), h.data());
      kernels::gemv_sub(basis, j + 1, h.data(), wv.data());
      if (record)
        for (Index i = 0; i <= j; ++i) proj(i, jcol) += h[i];
    }
  };

  if (opts.start != nullptr && opts.start->size() == n) {
    basis.col(0) = *opts.start;
    const double nrm = kernels::nrm2(basis.col(0).data(), n);
    if (nrm > 0)
      basis.col(0) /= nrm;
    else
      random_fill(w), basis.col(0) = w;
  } else {
    random_fill(w);
    basis.col(0) = w;
  }

  Index k = 0;  // retained columns entering the extension phase
  int restarts = 0;
  const int max_restarts = opts.max_restarts_factor * static_cast<int>(r);
  RVec best_resid = RVec::Constant(r, std::numeric_limits<double>::infinity());

  while (true) {
    double beta_last = 0.0;
    for (Index j = k; j < m; ++j) {
      op(basis.col(j), w);
      reorth(j, w, j, true);
      const double beta = kernels::nrm2(w);
      if (j + 1 < m) {
        if (beta < kBreakdownTol) {
          // invariant subspace found; bring in a fresh direction
          random_fill(w);
          reorth(j, w, j, false);
          const double wn = kernels::nrm2(w);
          basis.col(j + 1) = w / wn;
        } else {
          basis.col(j + 1) = w / beta;
        }
      } else {
        beta_last = beta;
      }
    }

    Mat t_full = proj.topLeftCorner(m, m);
    for (Index j = 0; j < m; ++j) {
      t_full(j, j) = cxd(t_full(j, j).real(), 0.0);
      for (Index i = j + 1; i < m; ++i) t_full(i, j) = std::conj(t_full(j, i));
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(t_full);
    if (es.info() != Eigen::Success)
      throw LanczosError("lanczos_topk: projected eigensolve failed", best_resid);
    const RVec& theta = es.eigenvalues();  // ascending
    const Mat& y = es.eigenvectors();

    RVec resid(r);
    for (Index i = 0; i < r; ++i)
      resid[i] = beta_last * std::abs(y(m - 1, m - 1 - i));
    const double scale = std::max(std::abs(theta[m - 1]), 1e-300);
    bool converged = true;
    for (Index i = 0; i < r; ++i)
      if (resid[i] > opts.tol * scale) converged = false;
    if (resid.maxCoeff() < best_resid.maxCoeff()) best_resid = resid;

    ++restarts;

    if (converged || m == n) {
      Mat ykeep(m, r);
      for (Index i = 0; i < r; ++i) ykeep.col(i) = y.col(m - 1 - i);
      LanczosResult out;
      out.v = kernels::gemm_tall_small(basis, ykeep);
      out.lambda.resize(r);
      for (Index i = 0; i < r; ++i) out.lambda[i] = theta[m - 1 - i];
      out.residuals = resid;
      out.restarts = restarts;

      bool ok = true;
      if (opts.verify && m < n) {
        Vec mv(n);
        for (Index i = 0; i < r; ++i) {
          op(out.v.col(i), mv);
          kernels::axpy(-out.lambda[i], out.v.col(i).data(), mv.data(), n);
          out.residuals[i] = kernels::nrm2(mv);
          if (out.residuals[i] > opts.tol * scale) ok = false;
        }
      }
      if (ok || m == n) {
        phase_normalize_columns(out.v);
        return out;
      }
      converged = false;
    }

    if (restarts >= max_restarts)
      throw LanczosError("lanczos_topk: no convergence after " +
                             std::to_string(restarts) + " restarts",
                         best_resid);

    // thick restart: keep the leading Ritz vectors plus the residual
    Index kk = std::min(r + 3, m - 2);
    kk = std::max(kk, std::min(r, m - 2));
    Mat ykeep(m, kk);
    for (Index i = 0; i < kk; ++i) ykeep.col(i) = y.col(m - 1 - i);
    const Mat unew = kernels::gemm_tall_small(basis, ykeep);
    basis.leftCols(kk) = unew;
    if (beta_last >= kBreakdownTol) {
      basis.col(kk) = w / beta_last;
    } else {
      random_fill(w);
      Vec tmp = w;
      reorth(kk - 1, tmp, 0, false);
      basis.col(kk) = tmp / kernels::nrm2(tmp);
    }
    proj.setZero();
    for (Index i = 0; i < kk; ++i) proj(i, i) = theta[m - 1 - i];
    k = kk;
  }
}

}  // namespace lrei
