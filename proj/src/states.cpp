#include "lrei/states.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace lrei {

Mat LowRankState::dense() const {
  if (dim() > (Index{1} << 12))
    throw ResourceGuardError("LowRankState::dense: dimension too large");
  return v * lambda.asDiagonal() * v.adjoint();
}

void LowRankState::validate(double tol) const {
  const Index r = rank();
  if (r < 1) throw std::invalid_argument("LowRankState: empty factor");
  const Mat gram = v.adjoint() * v;
  if ((gram - Mat::Identity(r, r)).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("LowRankState: columns not orthonormal");
  if (std::abs(lambda.sum() - 1.0) > tol)
    throw std::invalid_argument("LowRankState: trace != 1");
  for (Index i = 0; i < r; ++i) {
    if (!(lambda[i] > 0.0))
      throw std::invalid_argument("LowRankState: non-positive eigenvalue");
    if (i > 0 && lambda[i] > lambda[i - 1])
      throw std::invalid_argument("LowRankState: eigenvalues not sorted");
  }
}

void phase_normalize_columns(Mat& v) {
  for (Index c = 0; c < v.cols(); ++c) {
    Index imax = 0;
    double best = -1.0;
    for (Index i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, c));
      if (a > best) {
        best = a;
        imax = i;
      }
    }
    if (best <= 0.0) continue;
    const cxd phase = v(imax, c) / best;
    v.col(c) /= phase;
  }
}

PureState af_state(int variant, int n) {
  if (n < 1) throw std::invalid_argument("af_state: n < 1");
  if (variant != 1 && variant != 2) throw std::invalid_argument("af_state: variant must be 1 or 2");
  Index idx = 0;
  for (int site = 1; site <= n; ++site) {
    const int bit = (site % 2 == 1) ? variant - 1 : 2 - variant;
    idx = (idx << 1) | bit;
  }
  PureState s;
  s.amplitudes = Vec::Zero(Index{1} << n);
  s.amplitudes[idx] = 1.0;
  s.label = variant == 1 ? "af1" : "af2";
  return s;
}

PureState ghz_state(int n) {
  if (n < 2) throw std::invalid_argument("ghz_state: n < 2");
  const Index N = Index{1} << n;
  PureState s;
  s.amplitudes = Vec::Zero(N);
  const double a = 1.0 / std::sqrt(2.0);
  s.amplitudes[0] = a;
  s.amplitudes[N - 1] = a;
  s.label = "ghz";
  return s;
}

PureState w_state(int n) {
  if (n < 2) throw std::invalid_argument("w_state: n < 2");
  const Index N = Index{1} << n;
  PureState s;
  s.amplitudes = Vec::Zero(N);
  const double a = 1.0 / std::sqrt(static_cast<double>(n));
  for (int site = 1; site <= n; ++site)
    s.amplitudes[Index{1} << (n - site)] = a;
  s.label = "w";
  return s;
}

PureState basis_state(Index index_one_based, int n) {
  const Index N = Index{1} << n;
  if (index_one_based < 1 || index_one_based > N)
    throw std::invalid_argument("basis_state: index out of range");
  PureState s;
  s.amplitudes = Vec::Zero(N);
  s.amplitudes[index_one_based - 1] = 1.0;
  s.label = "basis:" + std::to_string(index_one_based);
  return s;
}

LowRankState mix(const std::vector<PureState>& components,
                 const std::vector<double>& weights) {
  if (components.empty() || components.size() != weights.size())
    throw std::invalid_argument("mix: component/weight count mismatch");
  double wsum = 0;
  for (double w : weights) {
    if (!(w > 0)) throw std::invalid_argument("mix: weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("mix: weights must sum to 1");

  const Index N = components[0].dim();
  const Index k = static_cast<Index>(components.size());
  Mat B(N, k);
  for (Index c = 0; c < k; ++c) {
    if (components[static_cast<size_t>(c)].dim() != N)
      throw std::invalid_argument("mix: dimension mismatch");
    B.col(c) = std::sqrt(weights[static_cast<size_t>(c)]) *
               components[static_cast<size_t>(c)].amplitudes;
  }

  // rho = B B^*; eigenpairs of the k x k Gram matrix lift to rho's.
  const Mat gram = B.adjoint() * B;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  const RVec theta = es.eigenvalues();  // ascending
  const double theta_max = theta[k - 1];
  const double tol = 1e-12 * theta_max;

  Index r = 0;
  for (Index i = 0; i < k; ++i)
    if (theta[i] > tol) ++r;
  if (r == 0) throw std::invalid_argument("mix: zero-rank result");

  LowRankState out;
  out.v.resize(N, r);
  out.lambda.resize(r);
  for (Index c = 0; c < r; ++c) {
    const Index src = k - 1 - c;  // descending
    out.lambda[c] = theta[src];
    out.v.col(c) = B * es.eigenvectors().col(src) / std::sqrt(theta[src]);
  }
  phase_normalize_columns(out.v);
  // renormalize the trace: dropped near-zero eigenvalues carry no weight
  out.lambda /= out.lambda.sum();
  return out;
}

WernerSplit werner_split(const PureState& psi, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("werner_split: p must be in (0,1)");
  LowRankState s;
  s.v.resize(psi.dim(), 1);
  s.v.col(0) = psi.amplitudes / psi.amplitudes.norm();
  s.lambda = RVec::Ones(1);
  phase_normalize_columns(s.v);
  return {std::move(s), p};
}

}  // namespace lrei
