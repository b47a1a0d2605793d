#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lrei {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "lrei 0.1.0";

// Unit system: energies in meV, times in ps unless natural_units is set.
inline constexpr double kHbarMeVps = 0.6582119569;  // meV*ps
inline constexpr double kBohrMagneton = 5.8e-2;     // meV/T
inline constexpr double kLandeG = 2.0;

inline constexpr int kDefaultMaxSites = 26;

struct NumericalAbort : std::runtime_error {
  long step;
  explicit NumericalAbort(long step_, const std::string& what)
      : std::runtime_error(what), step(step_) {}
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lrei
