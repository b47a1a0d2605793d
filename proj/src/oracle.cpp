#include "lrei/oracle.hpp"

#include "lrei/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace lrei::oracle {

namespace {

void guard(Index n) {
  if (n > kDenseGuard)
    throw ResourceGuardError("oracle: dimension exceeds the dense guard");
}

// Entrywise X in a full eigenbasis: X(j,l) acts on G = V^* H V with
// Delta = lambda_j - lambda_l.
Mat x_from_gram_full(const Mat& g, const RVec& lambda, const ModelKind& model) {
  const Index n = g.rows();
  const cxd iu(0.0, 1.0);
  Mat x(n, n);
  for (Index l = 0; l < n; ++l) {
    for (Index j = 0; j < n; ++j) {
      const double d = lambda[j] - lambda[l];
      if (model.model == Model::QLLG)
        x(j, l) = (iu / model.hbar) * d * g(j, l) / (1.0 - iu * model.kappa * d);
      else
        x(j, l) = ((iu / model.hbar) * d - (model.kappa / model.hbar) * d * d) *
                  g(j, l);
    }
  }
  return x;
}

// Eigendecomposition sorted descending.
void eig_desc(const Mat& rho, Mat& v, RVec& lambda) {
  Eigen::SelfAdjointEigenSolver<Mat> es((rho + rho.adjoint().eval()) * 0.5);
  const Index n = rho.rows();
  v.resize(n, n);
  lambda.resize(n);
  for (Index i = 0; i < n; ++i) {
    v.col(i) = es.eigenvectors().col(n - 1 - i);
    lambda[i] = es.eigenvalues()[n - 1 - i];
  }
}

}  // namespace

void DenseState::validate(double tol_herm, double tol_trace, double tol_psd) const {
  if ((rho - rho.adjoint().eval()).cwiseAbs().maxCoeff() > tol_herm)
    throw std::invalid_argument("DenseState: not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > tol_trace)
    throw std::invalid_argument("DenseState: trace != 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  if (es.eigenvalues().minCoeff() < -tol_psd)
    throw std::invalid_argument("DenseState: not PSD");
}

DenseState dense_from_lowrank(const LowRankState& s) {
  guard(s.dim());
  return {s.dense()};
}

Mat dense_rhs(const DenseState& rho, const SparseHermitian& h,
              const ModelKind& model) {
  guard(rho.dim());
  model.validate();
  const Mat hd = h.dense();
  if (model.model == Model::QLL) {
    const cxd iu(0.0, 1.0);
    const Mat c1 = rho.rho * hd - hd * rho.rho;
    const Mat c2 = rho.rho * c1 - c1 * rho.rho;
    return (iu / model.hbar) * c1 - (model.kappa / model.hbar) * c2;
  }
  Mat v;
  RVec lambda;
  eig_desc(rho.rho, v, lambda);
  const Mat g = v.adjoint() * hd * v;
  const Mat x = x_from_gram_full((g + g.adjoint().eval()) * 0.5, lambda, model);
  return v * x * v.adjoint();
}

DenseState ei_step(const DenseState& rho, const SparseHermitian& h,
                   const ModelKind& model, const RKTableau& tableau, double dt,
                   const RVec& lambda0) {
  guard(rho.dim());
  const Mat hd = h.dense();
  const int s = tableau.stages;

  auto project = [&](const Mat& k, Mat& v, Mat& projected) {
    RVec ev;
    eig_desc(k, v, ev);
    projected = v * lambda0.cast<cxd>().asDiagonal() * v.adjoint();
  };

  auto rhs_at = [&](const Mat& v) {
    const Mat g = v.adjoint() * hd * v;
    const Mat x = x_from_gram_full((g + g.adjoint().eval()) * 0.5, lambda0, model);
    return Mat(v * x * v.adjoint());
  };

  Mat v, k1;
  project(rho.rho, v, k1);
  std::vector<Mat> f;
  f.reserve(static_cast<size_t>(s));
  f.push_back(rhs_at(v));

  for (int j = 1; j < s; ++j) {
    Mat kraw = k1;
    for (int l = 0; l < j; ++l)
      if (tableau.a(j, l) != 0.0) kraw += dt * tableau.a(j, l) * f[static_cast<size_t>(l)];
    Mat kproj;
    project(kraw, v, kproj);
    f.push_back(rhs_at(v));
  }

  Mat out_raw = k1;
  for (int l = 0; l < s; ++l)
    if (tableau.b[l] != 0.0) out_raw += dt * tableau.b[l] * f[static_cast<size_t>(l)];
  Mat out;
  project(out_raw, v, out);
  return {std::move(out)};
}

std::vector<DenseState> ei_evolve(const DenseState& rho0,
                                  const SparseHermitian& h,
                                  const ModelKind& model,
                                  const RKTableau& tableau, double dt,
                                  long n_steps) {
  guard(rho0.dim());
  Mat v;
  RVec lambda0;
  eig_desc(rho0.rho, v, lambda0);
  lambda0 = lambda0.cwiseMax(0.0);

  std::vector<DenseState> traj;
  traj.reserve(static_cast<size_t>(n_steps) + 1);
  traj.push_back(rho0);
  DenseState cur = rho0;
  for (long k = 0; k < n_steps; ++k) {
    cur = ei_step(cur, h, model, tableau, dt, lambda0);
    traj.push_back(cur);
  }
  return traj;
}

Vec expm_action(const SparseHermitian& h, cxd theta, const Vec& psi) {
  guard(h.dim);
  const Index n = h.dim;
  if (psi.size() != n) throw std::invalid_argument("expm_action: dimension mismatch");
  if (theta == cxd{}) return psi;

  if (n <= (Index{1} << 8)) {
    // scaling and squaring with a Taylor kernel on the densified matrix
    Mat a = theta * h.dense();
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) {
      squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
      a /= std::pow(2.0, squarings);
    }
    Mat e = Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n);
    for (int k = 1; k <= 30; ++k) {
      term = (term * a) / static_cast<double>(k);
      e += term;
      if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int k = 0; k < squarings; ++k) e = e * e;
    return e * psi;
  }

  // Lanczos exp-action: Hermitian H, complex scalar theta.
  const double pnorm = psi.norm();
  if (pnorm == 0.0) return psi;

  // spectral spread estimate from a short Lanczos run
  double spread = 0.0;
  {
    const Index probe = std::min<Index>(20, n);
    Mat u(n, probe);
    Mat t = Mat::Zero(probe, probe);
    u.col(0) = psi / pnorm;
    Vec w(n);
    Vec hcoef(probe);
    for (Index j = 0; j < probe; ++j) {
      h.matvec(u.col(j).data(), w.data());
      kernels::multi_dotc(u, j + 1, w.data(), hcoef.data());
      kernels::gemv_sub(u, j + 1, hcoef.data(), w.data());
      for (Index i = 0; i <= j; ++i) t(i, j) += hcoef[i];
      const double beta = kernels::nrm2(w);
      if (j + 1 < probe) {
        if (beta < 1e-13) {
          t.conservativeResize(j + 1, j + 1);
          break;
        }
        u.col(j + 1) = w / beta;
      }
    }
    const Index mm = t.rows();
    for (Index j = 0; j < mm; ++j) {
      t(j, j) = cxd(t(j, j).real(), 0.0);
      for (Index i = j + 1; i < mm; ++i) t(i, j) = std::conj(t(j, i));
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(t);
    spread = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
  }

  const double work = std::abs(theta) * std::max(spread, 1e-30);
  const int n_sub = std::max(1, static_cast<int>(std::ceil(work / 5.0)));
  const cxd dtheta = theta / static_cast<double>(n_sub);
  const Index m = std::min<Index>(40, n);

  Vec phi = psi;
  Mat u(n, m);
  Vec w(n), hcoef(m);
  for (int sub = 0; sub < n_sub; ++sub) {
    const double nrm = phi.norm();
    u.col(0) = phi / nrm;
    Mat t = Mat::Zero(m, m);
    Index mm = m;
    for (Index j = 0; j < m; ++j) {
      h.matvec(u.col(j).data(), w.data());
      for (int pass = 0; pass < 2; ++pass) {
        kernels::multi_dotc(u, j + 1, w.data(), hcoef.data());
        for (Index i = 0; i <= j; ++i) t(i, j) += hcoef[i];
        kernels::gemv_sub(u, j + 1, hcoef.data(), w.data());
      }
      const double beta = kernels::nrm2(w);
      if (j + 1 < m) {
        if (beta < 1e-13) {
          mm = j + 1;
          break;
        }
        u.col(j + 1) = w / beta;
      }
    }
    Mat tm = t.topLeftCorner(mm, mm);
    for (Index j = 0; j < mm; ++j) {
      tm(j, j) = cxd(tm(j, j).real(), 0.0);
      for (Index i = j + 1; i < mm; ++i) tm(i, j) = std::conj(tm(j, i));
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(tm);
    Vec e1 = Vec::Zero(mm);
    e1[0] = nrm;
    const Vec y = es.eigenvectors() *
                  ((es.eigenvalues().cast<cxd>().array() * dtheta).exp() *
                   (es.eigenvectors().adjoint() * e1).array())
                      .matrix();
    phi.setZero();
    kernels::gemv_acc(u, mm, y.data(), phi.data());
  }
  return phi;
}

DenseState exact_rank1(const PureState& psi0, const SparseHermitian& h,
                       double kappa, double hbar, double t, Model model) {
  guard(h.dim);
  const double tau = model == Model::QLLG ? t / (1.0 + kappa * kappa) : t;
  const cxd theta = cxd(0.0, -1.0) / hbar * cxd(1.0, -kappa) * tau;
  const Vec phi = expm_action(h, theta, psi0.amplitudes);
  const double nrm2 = phi.squaredNorm();
  DenseState out;
  out.rho = phi * phi.adjoint() / nrm2;
  return out;
}

Eigen::Matrix4cd partial_trace_2(const Mat& rho, int k, int l) {
  const Index n_dim = rho.rows();
  int n = 0;
  while ((Index{1} << n) < n_dim) ++n;
  if ((Index{1} << n) != n_dim)
    throw std::invalid_argument("partial_trace_2: dimension not a power of two");
  if (k == l || k < 1 || l < 1 || k > n || l > n)
    throw std::invalid_argument("partial_trace_2: bad site pair");
  const Index mask_k = Index{1} << (n - k);
  const Index mask_l = Index{1} << (n - l);
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (Index i = 0; i < n_dim; ++i) {
    const int a = 2 * static_cast<int>((i & mask_k) != 0) +
                  static_cast<int>((i & mask_l) != 0);
    for (int b = 0; b < 4; ++b) {
      Index j = i & ~(mask_k | mask_l);
      if (b & 2) j |= mask_k;
      if (b & 1) j |= mask_l;
      out(a, b) += rho(i, j);
    }
  }
  return out;
}

std::pair<Mat, RVec> dense_partial_eig(const Mat& m, Index r) {
  guard(m.rows());
  if (r < 1 || r > m.rows())
    throw std::invalid_argument("dense_partial_eig: bad rank");
  Eigen::SelfAdjointEigenSolver<Mat> es((m + m.adjoint().eval()) * 0.5);
  const Index n = m.rows();
  Mat v(n, r);
  RVec lambda(r);
  for (Index i = 0; i < r; ++i) {
    v.col(i) = es.eigenvectors().col(n - 1 - i);
    lambda[i] = es.eigenvalues()[n - 1 - i];
  }
  phase_normalize_columns(v);
  return {std::move(v), std::move(lambda)};
}

}  // namespace lrei::oracle
