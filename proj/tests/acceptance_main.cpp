// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// hard failure. Run through ctest or directly; an optional argument
// selects a single criterion by number.

#include "lrei/audit.hpp"
#include "lrei/integrate.hpp"
#include "lrei/observe.hpp"
#include "lrei/oracle.hpp"
#include "lrei/runner.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <new>
#include <random>
#include <vector>

// ---------------------------------------------------------------------
// Allocation hook: every global allocation reports its size, so the
// no-materialization criterion can bound the largest live object.
void* operator new(std::size_t sz) {
  lrei::audit::record_alloc(sz);
  if (void* p = std::malloc(sz)) return p;
  throw std::bad_alloc();
}
void* operator new[](std::size_t sz) {
  lrei::audit::record_alloc(sz);
  if (void* p = std::malloc(sz)) return p;
  throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

namespace {

using namespace lrei;
namespace orc = lrei::oracle;
using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SparseHermitian paper_hamiltonian(int n, double hbar = 1.0) {
  SpinLattice lat = chain_lattice(n, false);
  HamiltonianParams p = HamiltonianParams::natural();
  p.hbar = hbar;
  p.J = 1.0;
  p.dmi = {Eigen::Vector3d(0, 0, 0.4)};
  p.b_field = Eigen::Vector3d(1, 0, 0);
  return build_hamiltonian(lat, p);
}

LowRankState pure_lowrank(const PureState& psi) {
  LowRankState s;
  s.v = psi.amplitudes / psi.amplitudes.norm();
  s.lambda = RVec::Ones(1);
  return s;
}

LowRankState random_mixed(Index dim, Index r, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat a(dim, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < dim; ++i) a(i, j) = cxd(nd(rng), nd(rng));
  Eigen::HouseholderQR<Mat> qr(a);
  LowRankState s;
  s.v = qr.householderQ() * Mat::Identity(dim, r);
  phase_normalize_columns(s.v);
  std::uniform_real_distribution<double> ud(0.2, 1.0);
  s.lambda.resize(r);
  for (Index i = 0; i < r; ++i) s.lambda[i] = ud(rng);
  std::sort(s.lambda.data(), s.lambda.data() + r, std::greater<double>());
  s.lambda /= s.lambda.sum();
  return s;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

LowRankState run_scheme(const LowRankState& s0, const SparseHermitian& h,
                        const ModelKind& model, const std::string& scheme,
                        double dt, double t_final, std::uint64_t seed) {
  const SchemeSpec sp = parse_scheme(scheme);
  LowRankState cur = s0;
  if (!sp.multistep) {
    const RKTableau tab = RKTableau::of_order(sp.order);
    const long steps = std::lround(t_final / dt);
    for (long k = 0; k < steps; ++k)
      cur = rk_step(cur, h, model, tab, dt, seed + static_cast<std::uint64_t>(k));
    return cur;
  }
  const long steps = std::lround(t_final / dt);
  ABHistory hist = ab_bootstrap(s0, h, model, sp.order, dt, seed);
  for (long k = sp.order - 1; k < steps; ++k)
    cur = ab_step(hist, h, model, seed + static_cast<std::uint64_t>(k));
  return cur;
}

// 1 ------------------------------------------------------------------
bool convergence_orders(std::ostream& out) {
  const int n = 4;
  const auto h = paper_hamiltonian(n);
  const double kappa = 0.5, t_final = 1.0;
  const PureState psi = af_state(1, n);
  const LowRankState s0 = pure_lowrank(psi);

  bool ok = true;
  for (Model model : {Model::QLL, Model::QLLG}) {
    const ModelKind mk{model, kappa, 1.0};
    const Mat ref = orc::exact_rank1(psi, h, kappa, 1.0, t_final, model).rho;
    auto fitted = [&](const std::string& scheme, const std::vector<double>& hs) {
      std::vector<double> lx, ly;
      for (double dt : hs) {
        const LowRankState end = run_scheme(s0, h, mk, scheme, dt, t_final, 17);
        const double err = (end.dense() - ref).cwiseAbs().maxCoeff();
        lx.push_back(std::log(dt));
        ly.push_back(std::log(err));
      }
      return fit_slope(lx, ly);
    };

    const std::vector<double> h_rk{0.05, 0.025, 0.0125, 0.00625};
    const std::vector<double> h_ab{0.0125, 0.00625, 0.003125};
    for (int m = 1; m <= 4; ++m) {
      const double slope = fitted("rk" + std::to_string(m), h_rk);
      const bool pass = std::abs(slope - m) <= 0.3;
      ok = ok && pass;
      out << "    " << (model == Model::QLL ? "q-LL " : "q-LLG") << " rk" << m
          << " fitted order " << slope << (pass ? "" : "  <-- out of band")
          << "\n";
    }
    for (int m = 2; m <= 4; ++m) {
      const double slope = fitted("ab" + std::to_string(m), h_ab);
      const bool pass = std::abs(slope - m) <= 0.3;
      ok = ok && pass;
      out << "    " << (model == Model::QLL ? "q-LL " : "q-LLG") << " ab" << m
          << " fitted order " << slope << (pass ? "" : "  <-- out of band")
          << "\n";
    }
  }
  return ok;
}

// 2 ------------------------------------------------------------------
bool oracle_equivalence(std::ostream& out) {
  std::mt19937_64 rng(2024);
  const double dt = 0.01;
  double worst = 0;
  for (int case_id = 0; case_id < 20; ++case_id) {
    const int n = 4 + case_id % 5;
    const Index r = 2 + (case_id / 5) % 3;
    const auto h = paper_hamiltonian(n);
    const Index dim = h.dim;
    const Model model = (case_id % 2 == 0) ? Model::QLLG : Model::QLL;
    const ModelKind mk{model, 0.5, 1.0};
    const LowRankState s0 = random_mixed(dim, r, rng);

    RVec lambda0 = RVec::Zero(dim);
    for (Index i = 0; i < r; ++i) lambda0[i] = s0.lambda[i];

    LowRankState lr = s0;
    orc::DenseState dense{s0.dense()};
    for (int k = 0; k < 10; ++k) {
      lr = rk_step(lr, h, mk, RKTableau::classic4(), dt,
                   100 + static_cast<std::uint64_t>(k));
      dense = orc::ei_step(dense, h, mk, RKTableau::classic4(), dt, lambda0);
    }
    const double err = (lr.dense() - dense.rho).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
  }
  out << "    20 cases, worst max-norm deviation " << worst << "\n";
  return worst <= 1e-8;
}

// 3 ------------------------------------------------------------------
bool structure_preservation(std::ostream& out) {
  std::mt19937_64 rng(33);
  const int n = 5;
  const auto h = paper_hamiltonian(n);
  const LowRankState s0 = random_mixed(h.dim, 3, rng);
  const double tp2 = trace_power(s0, 2), tp3 = trace_power(s0, 3);

  double worst_trace = 0, worst_spec = 0, worst_neg = 0, worst_power = 0;
  for (const std::string scheme :
       {"rk1", "rk2", "rk3", "rk4", "ab2", "ab3", "ab4"}) {
    for (Model model : {Model::QLL, Model::QLLG}) {
      const ModelKind mk{model, 0.5, 1.0};
      const SchemeSpec sp = parse_scheme(scheme);
      const double dt = 0.02;
      LowRankState cur = s0;
      ABHistory hist;
      if (sp.multistep) hist = ab_bootstrap(s0, h, mk, sp.order, dt, 7);
      for (int k = 0; k < 12; ++k) {
        cur = sp.multistep ? ab_step(hist, h, mk, 7)
                           : rk_step(cur, h, mk, RKTableau::of_order(sp.order),
                                     dt, 7 + static_cast<std::uint64_t>(k));
        worst_trace = std::max(worst_trace, std::abs(cur.lambda.sum() - 1.0));
        Eigen::SelfAdjointEigenSolver<Mat> es(cur.dense());
        for (Index i = 0; i < 3; ++i)
          worst_spec = std::max(
              worst_spec, std::abs(es.eigenvalues()[h.dim - 1 - i] - s0.lambda[i]));
        worst_neg = std::max(worst_neg, -es.eigenvalues().minCoeff());
        worst_power =
            std::max(worst_power, std::abs(trace_power(cur, 2) - tp2));
        worst_power =
            std::max(worst_power, std::abs(trace_power(cur, 3) - tp3));
      }
    }
  }
  out << "    trace dev " << worst_trace << ", spectrum dev " << worst_spec
      << ", min-eig floor " << worst_neg << ", trace-power dev " << worst_power
      << "\n";
  return worst_trace <= 1e-12 && worst_spec <= 1e-10 && worst_neg <= 1e-10 &&
         worst_power <= 1e-10;
}

// 4 ------------------------------------------------------------------
bool model_equivalence(std::ostream& out) {
  const int n = 6;
  const auto h = paper_hamiltonian(n);
  const double kappa = 0.5, scale = 1 + kappa * kappa;
  const double dt = 1e-3, t_final = 0.5;
  const auto mx = magnetization_operator(0, n, 1.0);
  const auto mz = magnetization_operator(2, n, 1.0);

  auto observe_run = [&](const LowRankState& s0, Model model, double dt_run,
                         double t_run) {
    std::vector<std::array<double, 3>> samples;
    const ModelKind mk{model, kappa, 1.0};
    LowRankState cur = s0;
    const long steps = std::lround(t_run / dt_run);
    samples.push_back({expectation(mx, cur), expectation(mz, cur),
                       concurrence(reduced_density_2spin(cur, 1, 2))});
    for (long k = 0; k < steps; ++k) {
      cur = rk_step(cur, h, mk, RKTableau::classic4(), dt_run,
                    31 + static_cast<std::uint64_t>(k));
      samples.push_back({expectation(mx, cur), expectation(mz, cur),
                         concurrence(reduced_density_2spin(cur, 1, 2))});
    }
    return samples;
  };

  auto sup_dev = [&](const LowRankState& s0) {
    const auto ll = observe_run(s0, Model::QLL, dt, t_final);
    const auto lg = observe_run(s0, Model::QLLG, dt * scale, t_final * scale);
    double dev = 0;
    for (size_t k = 0; k < ll.size(); ++k)
      for (int c = 0; c < 3; ++c)
        dev = std::max(dev, std::abs(ll[k][c] - lg[k][c]));
    return dev;
  };

  const double pure_dev = sup_dev(pure_lowrank(af_state(2, n)));
  const double mixed_dev =
      sup_dev(mix({af_state(2, n), ghz_state(n)}, {0.75, 0.25}));
  out << "    pure-state sup deviation " << pure_dev
      << " (needs <= 1e-5), rank-2 deviation " << mixed_dev
      << " (needs > 1e-2)\n";
  return pure_dev <= 1e-5 && mixed_dev > 1e-2;
}

// 5 ------------------------------------------------------------------
bool complement_products(std::ostream& out) {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> pick_n(2, 8), pick_r(1, 8);
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Index dim = Index{1} << pick_n(rng);
    const Index r = std::min<Index>(pick_r(rng), dim - 1);
    const LowRankState s = random_mixed(dim, r, rng);
    const auto stack = householder_from_factor(s.v);
    Mat q = Mat::Identity(dim, dim);
    stack.apply_q(q);
    const Mat vhat = q.rightCols(dim - r);

    Mat a(2, dim);
    for (Index j = 0; j < dim; ++j)
      for (Index i = 0; i < 2; ++i) a(i, j) = cxd(nd(rng), nd(rng));
    const Mat right = apply_complement_right(a, stack);
    worst = std::max(worst, (right - a * vhat).cwiseAbs().maxCoeff());

    Mat b(dim - r, 2);
    for (Index j = 0; j < 2; ++j)
      for (Index i = 0; i < dim - r; ++i) b(i, j) = cxd(nd(rng), nd(rng));
    const Mat left = apply_complement_left(b, stack);
    worst = std::max(worst, (left - vhat * b).cwiseAbs().maxCoeff());
  }
  out << "    200 instances, worst deviation " << worst << "\n";
  return worst <= 1e-12;
}

// 6 ------------------------------------------------------------------
bool lanczos_roundtrips(std::ostream& out) {
  std::mt19937_64 rng(66);
  std::uniform_int_distribution<int> pick_n(5, 10), pick_r(1, 6);
  double worst_val = 0, worst_proj = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Index dim = Index{1} << pick_n(rng);
    const Index r = pick_r(rng);
    LowRankState s = random_mixed(dim, r, rng);
    if (rep % 5 == 0 && r >= 2) {
      // force a degenerate pair
      s.lambda[1] = s.lambda[0];
      s.lambda /= s.lambda.sum();
    }
    Mat small = Mat::Zero(r, r);
    small.diagonal() = s.lambda.cast<cxd>();
    LowRankSum sum;
    sum.dim = dim;
    sum.terms.push_back({&s.v, &s.v, cxd(1.0), small});
    LanczosOptions opts;
    opts.seed = 1000 + static_cast<std::uint64_t>(rep);
    const auto res = lanczos_topk(
        [&sum](Eigen::Ref<const Vec> x, Eigen::Ref<Vec> y) { sum.matvec(x, y); },
        dim, r, opts);
    worst_val = std::max(worst_val, (res.lambda - s.lambda).cwiseAbs().maxCoeff());
    const Mat p1 = res.v * res.v.adjoint();
    const Mat p2 = s.v * s.v.adjoint();
    worst_proj = std::max(worst_proj, (p1 - p2).cwiseAbs().maxCoeff());
  }
  out << "    100 round trips, worst eigenvalue dev " << worst_val
      << ", worst projector dev " << worst_proj << "\n";
  return worst_val <= 1e-9 && worst_proj <= 1e-8;
}

// 7 ------------------------------------------------------------------
bool scaling(std::ostream& out) {
  const double kappa = 0.5, dt = 1e-3;
  std::vector<double> lx, ly;
  for (int n = 12; n <= 18; n += 2) {
    const auto h = paper_hamiltonian(n);
    std::vector<PureState> comps{af_state(1, n), af_state(2, n), ghz_state(n)};
    const LowRankState s0 = mix(comps, {0.5, 0.3, 0.2});
    const ModelKind mk{Model::QLLG, kappa, 1.0};
    LowRankState cur = rk_step(s0, h, mk, RKTableau::classic4(), dt, 3);
    const auto t0 = Clock::now();
    for (int k = 0; k < 2; ++k)
      cur = rk_step(cur, h, mk, RKTableau::classic4(), dt,
                    4 + static_cast<std::uint64_t>(k));
    const double per_step = seconds(t0) / 2;
    out << "    n=" << n << "  " << per_step << " s/step\n";
    lx.push_back(static_cast<double>(n));
    ly.push_back(std::log2(per_step));
  }
  const double slope = fit_slope(lx, ly);
  out << "    fitted log2 slope " << slope << " (band 1.0 +- 0.3)\n";

  const int n20 = 20;
  const auto h20 = paper_hamiltonian(n20);
  const LowRankState s20 = mix(
      {af_state(1, n20), af_state(2, n20), ghz_state(n20)}, {0.5, 0.3, 0.2});
  const ModelKind mk{Model::QLLG, kappa, 1.0};
  const auto t0 = Clock::now();
  const LowRankState one = rk_step(s20, h20, mk, RKTableau::classic4(), dt, 3);
  const double t20 = seconds(t0);
  out << "    n=20 r=3 single RK4 step " << t20 << " s (needs < 10)\n";
  (void)one;
  return std::abs(slope - 1.0) <= 0.3 && t20 < 10.0;
}

// 8 ------------------------------------------------------------------
bool ab_efficiency(std::ostream& out, bool& warned) {
  const int n = 12;
  const auto h = paper_hamiltonian(n);
  const LowRankState s0 =
      mix({af_state(1, n), af_state(2, n), ghz_state(n)}, {0.5, 0.3, 0.2});
  const ModelKind mk{Model::QLLG, 0.5, 1.0};
  const double dt = 1e-3;

  LowRankState cur = rk_step(s0, h, mk, RKTableau::classic4(), dt, 3);
  auto t0 = Clock::now();
  for (int k = 0; k < 5; ++k)
    cur = rk_step(cur, h, mk, RKTableau::classic4(), dt,
                  4 + static_cast<std::uint64_t>(k));
  const double rk4 = seconds(t0) / 5;

  ABHistory hist = ab_bootstrap(s0, h, mk, 4, dt, 3);
  ab_step(hist, h, mk, 9);
  t0 = Clock::now();
  for (int k = 0; k < 5; ++k) ab_step(hist, h, mk, 10 + static_cast<std::uint64_t>(k));
  const double ab4 = seconds(t0) / 5;

  const double ratio = rk4 / ab4;
  out << "    rk4 " << rk4 << " s/step, ab4 " << ab4 << " s/step, ratio "
      << ratio << "\n";
  if (ratio < 1.5 || ratio > 4.0) {
    out << "    warning: ratio outside [1.5, 4] (soft criterion)\n";
    warned = true;
  }
  return true;  // soft: warn, never fail
}

// 9 ------------------------------------------------------------------
bool werner_reduction(std::ostream& out) {
  const int n = 4;
  const auto h = paper_hamiltonian(n);
  const double kappa = 0.5, dt = 0.01;
  const Index dim = h.dim;
  double worst = 0;
  for (double p : {0.25, 0.5, 0.75}) {
    const auto ws = werner_split(ghz_state(n), p);
    const ModelKind hat{Model::QLLG, (1 - p) * kappa, 1.0};
    const ModelKind full{Model::QLLG, kappa, 1.0};

    const Mat rho_w0 =
        p / static_cast<double>(dim) * Mat::Identity(dim, dim) +
        (1 - p) * ws.low_rank.dense();
    Eigen::SelfAdjointEigenSolver<Mat> es(rho_w0);
    RVec lambda0(dim);
    for (Index i = 0; i < dim; ++i)
      lambda0[i] = std::max(0.0, es.eigenvalues()[dim - 1 - i]);

    LowRankState lr = ws.low_rank;
    orc::DenseState dn{rho_w0};
    for (int k = 0; k < 100; ++k) {
      lr = rk_step(lr, h, hat, RKTableau::classic4(), dt,
                   41 + static_cast<std::uint64_t>(k));
      dn = orc::ei_step(dn, h, full, RKTableau::classic4(), dt, lambda0);
      const Mat rebuilt = p / static_cast<double>(dim) * Mat::Identity(dim, dim) +
                          (1 - p) * lr.dense();
      worst = std::max(worst, (rebuilt - dn.rho).cwiseAbs().maxCoeff());
    }
  }
  out << "    worst reconstruction deviation over 100 steps and three p " << worst
      << "\n";
  return worst <= 1e-8;
}

// 10 -----------------------------------------------------------------
bool no_materialization(std::ostream& out) {
  const int n = 14;
  const auto h = paper_hamiltonian(n);
  const Index dim = h.dim;
  const LowRankState s0 =
      mix({af_state(1, n), af_state(2, n), ghz_state(n)}, {0.5, 0.3, 0.2});
  const ModelKind mk{Model::QLLG, 0.5, 1.0};

  bool ok = true;
  for (int s : {2, 4}) {
    audit::reset_blocks();
    const long base = audit::live_blocks();
    audit::reset_alloc();
    LowRankState cur = rk_step(s0, h, mk, RKTableau::of_order(s), 1e-3, 3);
    (void)cur;
    const long peak = audit::peak_blocks() - base;
    const std::size_t biggest = audit::max_alloc_bytes();
    const std::size_t dense_bytes = static_cast<std::size_t>(dim) *
                                    static_cast<std::size_t>(dim) * 16;
    out << "    rk" << s << ": peak stage blocks " << peak << " (bound "
        << 2 * s + 1 << "), largest allocation " << biggest << " bytes\n";
    ok = ok && peak <= 2 * s + 1;
    ok = ok && biggest < dense_bytes && biggest < (std::size_t{64} << 20);
  }
  return ok;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::ostream&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool soft_warned = false;

  std::vector<Criterion> criteria = {
      {1, "convergence orders rk1-rk4 / ab2-ab4", convergence_orders},
      {2, "LREI-RK4 equals dense EI-RK4 on random mixed states",
       oracle_equivalence},
      {3, "trace, spectrum, positivity, trace powers preserved",
       structure_preservation},
      {4, "pure-state q-LL/q-LLG time rescaling; mixed states break it",
       model_equivalence},
      {5, "complement products match dense QR complements", complement_products},
      {6, "lanczos recover-the-factor round trips", lanczos_roundtrips},
      {7, "per-step time scales linearly in N; n=20 step under 10 s", scaling},
      {8, "rk4/ab4 per-step ratio (soft)",
       [&soft_warned](std::ostream& o) { return ab_efficiency(o, soft_warned); }},
      {9, "werner reduction matches the direct dense solve", werner_reduction},
      {10, "no hidden materialization on the LREI path", no_materialization},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::ostringstream detail;
    bool pass = false;
    try {
      pass = c.fn(detail);
    } catch (const std::exception& e) {
      detail << "    exception: " << e.what() << "\n";
    }
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << "\n"
              << detail.str();
    std::cout.flush();
    if (!pass) ++failures;
  }
  if (failures > 0)
    std::cout << failures << " criteria failed\n";
  else
    std::cout << "all criteria passed" << (soft_warned ? " (with warnings)" : "")
              << "\n";
  return failures == 0 ? 0 : 1;
}
