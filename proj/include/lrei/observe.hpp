#pragma once

#include "lrei/sparse.hpp"
#include "lrei/states.hpp"
#include "lrei/types.hpp"

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <utility>

namespace lrei {

struct PairMeasure {
  double concurrence = 0.0;
  double negativity = 0.0;
};

struct ObservableRecord {
  double t = 0.0;
  double energy = std::numeric_limits<double>::quiet_NaN();
  Eigen::Vector3d magnetization = Eigen::Vector3d::Constant(
      std::numeric_limits<double>::quiet_NaN());
  std::map<std::pair<int, int>, PairMeasure> pair_measures;
  double trace = 1.0;
  double purity = 1.0;
  double ritz_drift = 0.0;
};

// Tr(Lambda (V^* (A V))) in that order; imaginary residue checked against
// 1e-10 and dropped.
double expectation(const SparseHermitian& a, const LowRankState& state);
cxd expectation_complex(const SparseHermitian& a, const LowRankState& state);

struct ReducedDensity2 {
  Eigen::Matrix4cd r;
  int k = 0, l = 0;
};

// Two-spin reduced density matrix via 16 matrix-unit expectations; the
// sparse observables are cached per (k, l).
ReducedDensity2 reduced_density_2spin(const LowRankState& state, int k, int l);

// Wootters concurrence, evaluated through the Hermitian form
// sqrt(R) Y conj(R) Y sqrt(R) with Y = sigma_y x sigma_y.
double concurrence(const ReducedDensity2& r);

// N = (||R^{T_B}||_1 - 1)/2, partial transpose on the second qubit.
double negativity(const ReducedDensity2& r);

// sum lambda_i^m, exact from the conserved spectrum.
double trace_power(const LowRankState& state, int m);

// Werner-state combination rho(t) = p I/2^n + (1-p) rho_hat(t).
double expectation_werner(const SparseHermitian& a, const LowRankState& rho_hat,
                          double p);
ReducedDensity2 reduced_density_2spin_werner(const LowRankState& rho_hat,
                                             double p, int k, int l);
double purity_werner(const LowRankState& rho_hat, double p);

}  // namespace lrei
