#pragma once

#include "lrei/audit.hpp"
#include "lrei/dynamics.hpp"
#include "lrei/observe.hpp"

#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace lrei {

struct RKTableau {
  int stages = 1;
  RMat a;  // strictly lower triangular
  RVec b;
  int order = 1;
  std::string name;

  static RKTableau euler();
  static RKTableau heun2();   // a21 = 1, b = (1/2, 1/2)
  static RKTableau kutta3();
  static RKTableau classic4();
  static RKTableau of_order(int m);
};

// Standard Adams-Bashforth weights, newest history entry first.
RVec ab_coefficients(int order);

// Valid scheme names: rk1..rk4, ab2..ab4.
struct SchemeSpec {
  bool multistep = false;
  int order = 0;
};
SchemeSpec parse_scheme(const std::string& name);

struct StepDiagnostics {
  double ritz_drift = 0.0;     // max |ritz - lambda0| over the step
  int lanczos_restarts = 0;    // total restart cycles over the step
};

// One conservative RK step on the factored state. Every stage extracts
// exactly rank(state) eigenpairs and re-enters the dynamics with the
// fixed initial spectrum.
LowRankState rk_step(const LowRankState& state, const SparseHermitian& h,
                     const ModelKind& model, const RKTableau& tableau, double dt,
                     std::uint64_t seed = 1, StepDiagnostics* diag = nullptr);

struct ABEntry {
  Mat v;    // N x r factor at the history point
  Mat x11;  // r x r RHS block
  Mat w;    // N x r RHS factor
  audit::BlockTag tag_v, tag_w;

  Mat z() const;  // V X11 + W, materialized on demand
};

struct ABHistory {
  int order = 0;
  double dt = 0.0;
  RVec coeffs;                  // newest first
  std::deque<ABEntry> entries;  // newest at back
  RVec lambda0;
};

// Computes rho_1 .. rho_{m-1} with the RK method of order m-1 and records
// each point's factors; history holds m entries afterwards.
ABHistory ab_bootstrap(const LowRankState& state, const SparseHermitian& h,
                       const ModelKind& model, int order, double dt,
                       std::uint64_t seed = 1, StepDiagnostics* diag = nullptr,
                       std::vector<LowRankState>* bootstrap_states = nullptr);

// One AB step: a single partial eigendecomposition plus one RHS
// evaluation appended to the history.
LowRankState ab_step(ABHistory& history, const SparseHermitian& h,
                     const ModelKind& model, std::uint64_t seed = 1,
                     StepDiagnostics* diag = nullptr);

using Observer =
    std::function<void(const LowRankState&, ObservableRecord&)>;
using RecordSink = std::function<void(const ObservableRecord&)>;

// Steps from 0 to t_final recording one ObservableRecord per step
// boundary (t = 0 included). The final RK step is shortened to land on
// t_final; AB schemes require t_final/dt integral.
std::vector<ObservableRecord> evolve(const LowRankState& initial,
                                     const SparseHermitian& h,
                                     const ModelKind& model,
                                     const std::string& scheme, double dt,
                                     double t_final,
                                     const std::vector<Observer>& observers,
                                     std::uint64_t seed = 1,
                                     const RecordSink& sink = {});

}  // namespace lrei
