#include "lrei/integrate.hpp"

#include "lrei/audit.hpp"
#include "lrei/kernels.hpp"

#include <cmath>

namespace lrei {

RKTableau RKTableau::euler() {
  RKTableau t;
  t.stages = 1;
  t.a = RMat::Zero(1, 1);
  t.b = RVec::Ones(1);
  t.order = 1;
  t.name = "rk1";
  return t;
}

RKTableau RKTableau::heun2() {
  RKTableau t;
  t.stages = 2;
  t.a = RMat::Zero(2, 2);
  t.a(1, 0) = 1.0;
  t.b = RVec::Constant(2, 0.5);
  t.order = 2;
  t.name = "rk2";
  return t;
}

RKTableau RKTableau::kutta3() {
  RKTableau t;
  t.stages = 3;
  t.a = RMat::Zero(3, 3);
  t.a(1, 0) = 0.5;
  t.a(2, 0) = -1.0;
  t.a(2, 1) = 2.0;
  t.b.resize(3);
  t.b << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
  t.order = 3;
  t.name = "rk3";
  return t;
}

RKTableau RKTableau::classic4() {
  RKTableau t;
  t.stages = 4;
  t.a = RMat::Zero(4, 4);
  t.a(1, 0) = 0.5;
  t.a(2, 1) = 0.5;
  t.a(3, 2) = 1.0;
  t.b.resize(4);
  t.b << 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0;
  t.order = 4;
  t.name = "rk4";
  return t;
}

RKTableau RKTableau::of_order(int m) {
  switch (m) {
    case 1: return euler();
    case 2: return heun2();
    case 3: return kutta3();
    case 4: return classic4();
    default: throw std::invalid_argument("RKTableau: order must be 1..4");
  }
}

RVec ab_coefficients(int order) {
  RVec b(order);
  switch (order) {
    case 2: b << 3.0 / 2.0, -1.0 / 2.0; break;
    case 3: b << 23.0 / 12.0, -16.0 / 12.0, 5.0 / 12.0; break;
    case 4: b << 55.0 / 24.0, -59.0 / 24.0, 37.0 / 24.0, -9.0 / 24.0; break;
    default: throw std::invalid_argument("ab_coefficients: order must be 2..4");
  }
  return b;
}

SchemeSpec parse_scheme(const std::string& name) {
  if (name.size() == 3 && name[2] >= '1' && name[2] <= '4') {
    const int m = name[2] - '0';
    if (name.starts_with("rk")) return {false, m};
    if (name.starts_with("ab") && m >= 2) return {true, m};
  }
  throw std::invalid_argument(
      "unknown scheme '" + name + "'; valid: rk1 rk2 rk3 rk4 ab2 ab3 ab4");
}

namespace {

struct StageData {
  Mat v;
  Mat x11;
  Mat w;
  audit::BlockTag tag_v, tag_w;
};

// K = V_1 Lambda0 V_1^* + sum_l c_l (V_l X11_l V_l^* + W_l V_l^* + V_l W_l^*)
// assembled as references into the stage storage; scalars fold into the
// r-dimensional intermediates, nothing is materialized.
template <typename StageRange>
LowRankSum assemble_sum(const StageRange& stages, const RVec& lambda0,
                        const std::vector<double>& coeffs) {
  LowRankSum sum;
  sum.dim = stages[0].v.rows();
  sum.hermitian_pairs = false;  // terms are paired; the total is Hermitian
  const Index r = lambda0.size();

  for (size_t l = 0; l < coeffs.size(); ++l) {
    const auto& st = stages[l];
    const double c = coeffs[l];
    if (l == 0) {
      LowRankTerm base;
      base.left = &st.v;
      base.right = &st.v;
      base.small = Mat::Zero(r, r);
      base.small.diagonal() = lambda0.cast<cxd>();
      if (c != 0.0) base.small += c * st.x11;
      sum.terms.push_back(std::move(base));
    } else if (c != 0.0) {
      LowRankTerm t;
      t.left = &st.v;
      t.right = &st.v;
      t.small = c * st.x11;
      sum.terms.push_back(std::move(t));
    }
    if (c != 0.0) {
      LowRankTerm tw;
      tw.left = &st.w;
      tw.right = &st.v;
      tw.coeff = c;
      sum.terms.push_back(tw);
      LowRankTerm twt;
      twt.left = &st.v;
      twt.right = &st.w;
      twt.coeff = c;
      sum.terms.push_back(twt);
    }
  }
  return sum;
}

Mat extract_factor(const LowRankSum& sum, Index n, Index r, const Vec& start,
                   std::uint64_t seed, const RVec& lambda0, double* drift,
                   int* restarts, const char* where) {
  LanczosOptions opts;
  opts.seed = seed;
  opts.start = &start;
  LanczosResult lr;
  try {
    lr = lanczos_topk(
        [&sum](Eigen::Ref<const Vec> x, Eigen::Ref<Vec> y) { sum.matvec(x, y); },
        n, r, opts);
  } catch (const LanczosError& e) {
    throw LanczosError(std::string(where) + ": " + e.what(), e.best_residuals);
  }
  if (drift) {
    double d = 0;
    for (Index i = 0; i < r; ++i)
      d = std::max(d, std::abs(lr.lambda[i] - lambda0[i]));
    *drift = std::max(*drift, d);
  }
  if (restarts) *restarts += lr.restarts;
  return std::move(lr.v);
}

}  // namespace

Mat ABEntry::z() const {
  Mat out = kernels::gemm_tall_small(v, x11);
  out += w;
  return out;
}

LowRankState rk_step(const LowRankState& state, const SparseHermitian& h,
                     const ModelKind& model, const RKTableau& tableau, double dt,
                     std::uint64_t seed, StepDiagnostics* diag) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk_step: dt must be > 0");
  const Index n = state.dim(), r = state.rank();
  const int s = tableau.stages;
  double drift = 0;
  int restarts = 0;

  std::vector<StageData> stages;
  stages.reserve(static_cast<size_t>(s));
  {
    StageData sd;
    sd.v = state.v;
    RhsCompact rc = rhs_compact(state, h, model);
    sd.x11 = std::move(rc.x11);
    sd.w = std::move(rc.w);
    stages.push_back(std::move(sd));
  }

  std::vector<double> coeffs;
  for (int j = 1; j < s; ++j) {
    coeffs.assign(static_cast<size_t>(j), 0.0);
    for (int l = 0; l < j; ++l) coeffs[static_cast<size_t>(l)] = dt * tableau.a(j, l);
    const LowRankSum sum = assemble_sum(stages, state.lambda, coeffs);
    const Vec start = stages.back().v.col(0);
    StageData sd;
    sd.v = extract_factor(sum, n, r, start, seed, state.lambda, &drift, &restarts,
                          ("rk stage " + std::to_string(j + 1)).c_str());
    RhsCompact rc = rhs_compact(sd.v, state.lambda, h, model);
    sd.x11 = std::move(rc.x11);
    sd.w = std::move(rc.w);
    stages.push_back(std::move(sd));
  }

  coeffs.assign(static_cast<size_t>(s), 0.0);
  for (int l = 0; l < s; ++l) coeffs[static_cast<size_t>(l)] = dt * tableau.b[l];
  const LowRankSum sum = assemble_sum(stages, state.lambda, coeffs);
  const Vec start = stages.back().v.col(0);

  LowRankState out;
  out.v = extract_factor(sum, n, r, start, seed, state.lambda, &drift, &restarts,
                         "rk combination");
  out.lambda = state.lambda;
  if (diag) {
    diag->ritz_drift = std::max(diag->ritz_drift, drift);
    diag->lanczos_restarts += restarts;
  }
  return out;
}

ABHistory ab_bootstrap(const LowRankState& state, const SparseHermitian& h,
                       const ModelKind& model, int order, double dt,
                       std::uint64_t seed, StepDiagnostics* diag,
                       std::vector<LowRankState>* bootstrap_states) {
  if (order < 2 || order > 4)
    throw std::invalid_argument("ab_bootstrap: order must be 2..4");
  ABHistory hist;
  hist.order = order;
  hist.dt = dt;
  hist.coeffs = ab_coefficients(order);
  hist.lambda0 = state.lambda;

  auto push_entry = [&](const LowRankState& s) {
    ABEntry e;
    e.v = s.v;
    RhsCompact rc = rhs_compact(s, h, model);
    e.x11 = std::move(rc.x11);
    e.w = std::move(rc.w);
    hist.entries.push_back(std::move(e));
  };

  push_entry(state);
  const RKTableau boot = RKTableau::of_order(order - 1);
  LowRankState cur = state;
  for (int i = 1; i < order; ++i) {
    cur = rk_step(cur, h, model, boot, dt, seed + static_cast<std::uint64_t>(i),
                  diag);
    push_entry(cur);
    if (bootstrap_states) bootstrap_states->push_back(cur);
  }
  return hist;
}

LowRankState ab_step(ABHistory& history, const SparseHermitian& h,
                     const ModelKind& model, std::uint64_t seed,
                     StepDiagnostics* diag) {
  const int m = history.order;
  if (static_cast<int>(history.entries.size()) != m)
    throw std::invalid_argument("ab_step: history not bootstrapped");
  const Index n = history.entries.back().v.rows();
  const Index r = history.lambda0.size();

  // newest first: entries are stored oldest..newest
  std::vector<const ABEntry*> view;
  std::vector<double> coeffs;
  for (int l = 0; l < m; ++l) {
    view.push_back(&history.entries[static_cast<size_t>(m - 1 - l)]);
    coeffs.push_back(history.dt * history.coeffs[l]);
  }
  struct Deref {
    const std::vector<const ABEntry*>& v;
    const ABEntry& operator[](size_t i) const { return *v[i]; }
  };
  const LowRankSum sum = assemble_sum(Deref{view}, history.lambda0, coeffs);

  double drift = 0;
  int restarts = 0;
  const Vec start = history.entries.back().v.col(0);
  LowRankState out;
  out.v = extract_factor(sum, n, r, start, seed, history.lambda0, &drift,
                         &restarts, "ab step");
  out.lambda = history.lambda0;

  ABEntry e;
  e.v = out.v;
  RhsCompact rc = rhs_compact(out, h, model);
  e.x11 = std::move(rc.x11);
  e.w = std::move(rc.w);
  history.entries.push_back(std::move(e));
  history.entries.pop_front();

  if (diag) {
    diag->ritz_drift = std::max(diag->ritz_drift, drift);
    diag->lanczos_restarts += restarts;
  }
  return out;
}

std::vector<ObservableRecord> evolve(const LowRankState& initial,
                                     const SparseHermitian& h,
                                     const ModelKind& model,
                                     const std::string& scheme, double dt,
                                     double t_final,
                                     const std::vector<Observer>& observers,
                                     std::uint64_t seed,
                                     const RecordSink& sink) {
  if (!(t_final > 0.0)) throw std::invalid_argument("evolve: t_final must be > 0");
  if (!(dt > 0.0) || dt > t_final * (1.0 + 1e-12))
    throw std::invalid_argument("evolve: need 0 < h <= t_final");
  const SchemeSpec spec = parse_scheme(scheme);

  std::vector<ObservableRecord> records;
  auto emit = [&](double t, const LowRankState& s, double drift) {
    ObservableRecord rec;
    rec.t = t;
    rec.trace = s.lambda.sum();
    rec.purity = s.lambda.squaredNorm();
    rec.ritz_drift = drift;
    for (const Observer& obs : observers) obs(s, rec);
    if (sink) sink(rec);
    records.push_back(std::move(rec));
  };

  auto check_finite = [](const LowRankState& s, long step) {
    if (!s.v.allFinite())
      throw NumericalAbort(step, "evolve: non-finite factor at step " +
                                     std::to_string(step));
  };

  emit(0.0, initial, 0.0);

  if (!spec.multistep) {
    const RKTableau tab = RKTableau::of_order(spec.order);
    LowRankState cur = initial;
    double t = 0.0;
    long step = 0;
    const double eps = 1e-12 * std::max(1.0, std::abs(t_final));
    while (t < t_final - eps) {
      const double hstep = std::min(dt, t_final - t);
      StepDiagnostics sd;
      cur = rk_step(cur, h, model, tab, hstep, seed + static_cast<std::uint64_t>(step),
                    &sd);
      ++step;
      t += hstep;
      check_finite(cur, step);
      emit(t, cur, sd.ritz_drift);
    }
    return records;
  }

  const int m = spec.order;
  const double ratio = t_final / dt;
  const long n_steps = std::lround(ratio);
  if (n_steps < 1 || std::abs(ratio - static_cast<double>(n_steps)) > 1e-9)
    throw std::invalid_argument(
        "evolve: AB schemes need t_final/h integral; adjust the step or final time");
  if (n_steps < m - 1)
    throw std::invalid_argument(
        "evolve: AB" + std::to_string(m) + " needs at least " +
        std::to_string(m - 1) + " steps to bootstrap");

  std::vector<LowRankState> boot;
  StepDiagnostics sd_boot;
  ABHistory hist = ab_bootstrap(initial, h, model, m, dt, seed, &sd_boot, &boot);
  for (size_t i = 0; i < boot.size(); ++i) {
    check_finite(boot[i], static_cast<long>(i + 1));
    emit(dt * static_cast<double>(i + 1), boot[i], sd_boot.ritz_drift);
  }
  for (long step = m - 1; step < n_steps; ++step) {
    StepDiagnostics sd;
    LowRankState cur =
        ab_step(hist, h, model, seed + static_cast<std::uint64_t>(step), &sd);
    check_finite(cur, step + 1);
    emit(dt * static_cast<double>(step + 1), cur, sd.ritz_drift);
  }
  return records;
}

}  // namespace lrei
