#include "lrei/observe.hpp"

#include "lrei/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace lrei {

namespace {

int sites_from_dim(Index dim) {
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  if ((Index{1} << n) != dim)
    throw std::invalid_argument("state dimension is not a power of two");
  return n;
}

const std::array<SparseHermitian, 16>& pair_units(int n, int k, int l) {
  static std::map<std::tuple<int, int, int>, std::array<SparseHermitian, 16>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(n, k, l);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::array<SparseHermitian, 16> ops;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        // R(a,b) = Tr(E rho) with E the embedding of |b><a| on (k,l)
        OperatorBuilder builder(n, max_sites_limit());
        builder.add_pair(1.0, k, l, Local2::unit(b >> 1, a >> 1),
                         Local2::unit(b & 1, a & 1));
        ops[static_cast<size_t>(a * 4 + b)] = builder.build();
      }
    }
    it = cache.emplace(key, std::move(ops)).first;
  }
  return it->second;
}

const Eigen::Matrix4cd& spin_flip() {
  static const Eigen::Matrix4cd y = [] {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 3) = -1;
    m(1, 2) = 1;
    m(2, 1) = 1;
    m(3, 0) = -1;
    return m;
  }();
  return y;
}

Eigen::Matrix4cd psd_sqrt(const Eigen::Matrix4cd& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(r);
  Eigen::Vector4d ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10)
    throw std::invalid_argument("reduced density is not PSD within tolerance");
  Eigen::Vector4d s = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

cxd expectation_complex(const SparseHermitian& a, const LowRankState& state) {
  if (a.dim != state.dim())
    throw std::invalid_argument("expectation: dimension mismatch");
  const Index r = state.rank();
  Mat f(state.dim(), r);
  a.matmat(state.v, f);
  const Mat g = kernels::gemm_ah_b(state.v, f);
  cxd acc{};
  for (Index j = 0; j < r; ++j) acc += state.lambda[j] * g(j, j);
  return acc;
}

double expectation(const SparseHermitian& a, const LowRankState& state) {
  const cxd val = expectation_complex(a, state);
  if (std::abs(val.imag()) > 1e-10)
    throw std::runtime_error("expectation: imaginary residue above tolerance");
  return val.real();
}

ReducedDensity2 reduced_density_2spin(const LowRankState& state, int k, int l) {
  const int n = sites_from_dim(state.dim());
  if (k == l) throw std::invalid_argument("reduced_density_2spin: k == l");
  if (k < 1 || l < 1 || k > n || l > n)
    throw std::invalid_argument("reduced_density_2spin: site out of range");
  const auto& ops = pair_units(n, k, l);
  ReducedDensity2 out;
  out.k = k;
  out.l = l;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      out.r(a, b) = expectation_complex(ops[static_cast<size_t>(a * 4 + b)], state);
  out.r = (out.r + out.r.adjoint().eval()) * 0.5;
  return out;
}

double concurrence(const ReducedDensity2& rd) {
  const Eigen::Matrix4cd sqrt_r = psd_sqrt(rd.r);
  const Eigen::Matrix4cd& y = spin_flip();
  const Eigen::Matrix4cd m = sqrt_r * y * rd.r.conjugate() * y * sqrt_r;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(
      (m + m.adjoint().eval()) * 0.5);
  Eigen::Vector4d mu = es.eigenvalues();  // ascending
  if (mu.minCoeff() < -1e-10)
    throw std::invalid_argument("concurrence: negative Wootters eigenvalue");
  mu = mu.cwiseMax(0.0);
  const double c = std::sqrt(mu[3]) - std::sqrt(mu[2]) - std::sqrt(mu[1]) -
                   std::sqrt(mu[0]);
  return std::max(0.0, c);
}

double negativity(const ReducedDensity2& rd) {
  Eigen::Matrix4cd pt;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          pt(2 * a + d, 2 * c + b) = rd.r(2 * a + b, 2 * c + d);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es((pt + pt.adjoint().eval()) * 0.5);
  const double sum_abs = es.eigenvalues().cwiseAbs().sum();
  return std::max(0.0, (sum_abs - 1.0) / 2.0);
}

double trace_power(const LowRankState& state, int m) {
  if (m < 1) throw std::invalid_argument("trace_power: m < 1");
  double acc = 0;
  for (Index i = 0; i < state.rank(); ++i)
    acc += std::pow(state.lambda[i], m);
  return acc;
}

double expectation_werner(const SparseHermitian& a, const LowRankState& rho_hat,
                          double p) {
  const double tr_a = a.trace().real();
  const double n = static_cast<double>(a.dim);
  return p / n * tr_a + (1.0 - p) * expectation(a, rho_hat);
}

ReducedDensity2 reduced_density_2spin_werner(const LowRankState& rho_hat,
                                             double p, int k, int l) {
  ReducedDensity2 rd = reduced_density_2spin(rho_hat, k, l);
  rd.r = p / 4.0 * Eigen::Matrix4cd::Identity() + (1.0 - p) * rd.r;
  return rd;
}

double purity_werner(const LowRankState& rho_hat, double p) {
  const double n = static_cast<double>(rho_hat.dim());
  const double purity_hat = trace_power(rho_hat, 2);
  return p * p / n + 2.0 * p * (1.0 - p) / n + (1.0 - p) * (1.0 - p) * purity_hat;
}

}  // namespace lrei
