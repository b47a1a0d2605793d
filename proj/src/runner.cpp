#include "lrei/runner.hpp"

#include "lrei/audit.hpp"
#include "lrei/observe.hpp"
#include "lrei/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace lrei {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct PairSelector {
  enum class Kind { Concurrence, Negativity } kind;
  int k, l;
};

struct Pipeline {
  std::vector<std::string> selectors;
  bool need_energy = false;
  bool need_mag[3] = {false, false, false};
  std::vector<std::pair<int, int>> pairs;  // unique (k,l) needed
  const SparseHermitian* hamiltonian = nullptr;
  std::vector<SparseHermitian> mag_ops;  // built on demand, indexed by axis
  int mag_index[3] = {-1, -1, -1};
  double werner_p = 0.0;  // 0 = plain state

  static std::pair<int, int> parse_pair(const std::string& sel, size_t colon) {
    const std::string rest = sel.substr(colon + 1);
    const auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw ConfigError("observable '" + sel + "' needs sites k,l");
    try {
      const int k = std::stoi(rest.substr(0, comma));
      const int l = std::stoi(rest.substr(comma + 1));
      return {k, l};
    } catch (...) {
      throw ConfigError("observable '" + sel + "': bad site pair");
    }
  }

  void build(const ExperimentConfig& cfg, const SparseHermitian& h, double hbar) {
    selectors = cfg.observables;
    hamiltonian = &h;
    for (const std::string& sel : selectors) {
      if (sel == "energy") need_energy = true;
      else if (sel == "mx") need_mag[0] = true;
      else if (sel == "my") need_mag[1] = true;
      else if (sel == "mz") need_mag[2] = true;
      else if (sel == "trace" || sel == "purity") continue;
      else if (sel.starts_with("concurrence:") || sel.starts_with("negativity:")) {
        const auto kl = parse_pair(sel, sel.find(':'));
        if (kl.first == kl.second || kl.first < 1 || kl.second < 1 ||
            kl.first > cfg.n_sites || kl.second > cfg.n_sites)
          throw ConfigError("observable '" + sel + "': sites out of range");
        if (std::find(pairs.begin(), pairs.end(), kl) == pairs.end())
          pairs.push_back(kl);
      } else {
        throw ConfigError("unknown observable '" + sel +
                          "'; valid: energy mx my mz trace purity "
                          "concurrence:k,l negativity:k,l");
      }
    }
    for (int a = 0; a < 3; ++a) {
      if (need_mag[a]) {
        mag_index[a] = static_cast<int>(mag_ops.size());
        mag_ops.push_back(magnetization_operator(a, cfg.n_sites, hbar));
      }
    }
  }

  void fill(const LowRankState& s, ObservableRecord& rec) const {
    const double p = werner_p;
    if (need_energy)
      rec.energy = p > 0 ? expectation_werner(*hamiltonian, s, p)
                         : expectation(*hamiltonian, s);
    for (int a = 0; a < 3; ++a)
      if (need_mag[a]) {
        const SparseHermitian& m = mag_ops[static_cast<size_t>(mag_index[a])];
        rec.magnetization[a] =
            p > 0 ? expectation_werner(m, s, p) : expectation(m, s);
      }
    for (const auto& [k, l] : pairs) {
      const ReducedDensity2 rd = p > 0 ? reduced_density_2spin_werner(s, p, k, l)
                                       : reduced_density_2spin(s, k, l);
      PairMeasure pm;
      pm.concurrence = concurrence(rd);
      pm.negativity = negativity(rd);
      rec.pair_measures[{k, l}] = pm;
    }
    if (p > 0) rec.purity = purity_werner(s, p);
  }

  // Dense-engine evaluation of the same record.
  ObservableRecord fill_dense(double t, const Mat& rho) const {
    ObservableRecord rec;
    rec.t = t;
    rec.trace = rho.trace().real();
    rec.purity = (rho * rho).trace().real();
    rec.ritz_drift = 0.0;
    auto tr_sparse = [&](const SparseHermitian& a) {
      cxd acc{};
      for (Index i = 0; i < a.dim; ++i)
        for (std::int64_t kk = a.row_ptr[static_cast<size_t>(i)];
             kk < a.row_ptr[static_cast<size_t>(i) + 1]; ++kk)
          acc += a.val[static_cast<size_t>(kk)] *
                 rho(a.col[static_cast<size_t>(kk)], i);
      return acc.real();
    };
    if (need_energy) rec.energy = tr_sparse(*hamiltonian);
    for (int a = 0; a < 3; ++a)
      if (need_mag[a]) rec.magnetization[a] = tr_sparse(mag_ops[static_cast<size_t>(mag_index[a])]);
    for (const auto& [k, l] : pairs) {
      ReducedDensity2 rd;
      rd.k = k;
      rd.l = l;
      rd.r = oracle::partial_trace_2(rho, k, l);
      PairMeasure pm;
      pm.concurrence = concurrence(rd);
      pm.negativity = negativity(rd);
      rec.pair_measures[{k, l}] = pm;
    }
    return rec;
  }

  double column(const ObservableRecord& rec, const std::string& sel) const {
    if (sel == "energy") return rec.energy;
    if (sel == "mx") return rec.magnetization[0];
    if (sel == "my") return rec.magnetization[1];
    if (sel == "mz") return rec.magnetization[2];
    if (sel == "trace") return rec.trace;
    if (sel == "purity") return rec.purity;
    const auto kl = parse_pair(sel, sel.find(':'));
    const PairMeasure& pm = rec.pair_measures.at(kl);
    return sel.starts_with("concurrence:") ? pm.concurrence : pm.negativity;
  }
};

std::string csv_header(const std::vector<std::string>& selectors) {
  std::string out = "t";
  for (const auto& s : selectors) out += "," + s;
  return out;
}

struct ManifestData {
  std::string status = "ok";
  long steps = 0;
  double wall_mean = 0, wall_max = 0;
  long peak_blocks = 0;
  double ritz_drift_max = 0;
};

void write_manifest(const std::string& csv_path, const ExperimentConfig& cfg,
                    const ManifestData& m) {
  const std::string path = csv_path + ".manifest";
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    out << "status = " << m.status << "\n";
    out << "version = " << kVersion << "\n";
    out << "steps = " << m.steps << "\n";
    out << "wall_per_step_mean_s = " << format_csv_value(m.wall_mean) << "\n";
    out << "wall_per_step_max_s = " << format_csv_value(m.wall_max) << "\n";
    out << "peak_live_blocks = " << m.peak_blocks << "\n";
    out << "ritz_drift_max = " << format_csv_value(m.ritz_drift_max) << "\n";
    out << "config.model = " << cfg.model << "\n";
    out << "config.n_sites = " << cfg.n_sites << "\n";
    out << "config.lattice = " << cfg.lattice << "\n";
    out << "config.periodic = " << (cfg.periodic ? "true" : "false") << "\n";
    out << "config.J = " << format_csv_value(cfg.J) << "\n";
    out << "config.kappa = " << format_csv_value(cfg.kappa) << "\n";
    out << "config.units = " << cfg.units << "\n";
    out << "config.initial_state = " << cfg.initial_state << "\n";
    out << "config.scheme = " << cfg.scheme << "\n";
    out << "config.h = " << format_csv_value(cfg.h) << "\n";
    out << "config.t_final = " << format_csv_value(cfg.t_final) << "\n";
    out << "config.seed = " << cfg.seed << "\n";
    out << "config.engine = " << cfg.engine << "\n";
  }
  std::rename(tmp.c_str(), path.c_str());
}

double fitted_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  // least squares on log-log over the supplied points
  const size_t n = hs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t used = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!(errs[i] > 0) || !std::isfinite(errs[i])) continue;
    const double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  if (used < 2) return std::numeric_limits<double>::quiet_NaN();
  const double d = used * sxx - sx * sx;
  return (used * sxy - sx * sy) / d;
}

}  // namespace

std::string format_csv_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

LowRankState initial_lowrank(const ExperimentConfig& cfg) {
  const StateSpec spec = parse_state_spec(cfg.initial_state);
  const int n = cfg.n_sites;
  if (spec.kind == StateSpec::Kind::Mix) {
    std::vector<PureState> comps;
    for (const auto& tok : spec.components) comps.push_back(realize_pure(tok, n));
    return mix(comps, spec.weights);
  }
  const PureState psi = realize_pure(spec.components.at(0), n);
  if (spec.kind == StateSpec::Kind::Werner)
    return werner_split(psi, spec.werner_p).low_rank;
  LowRankState s;
  s.v.resize(psi.dim(), 1);
  s.v.col(0) = psi.amplitudes / psi.amplitudes.norm();
  s.lambda = RVec::Ones(1);
  phase_normalize_columns(s.v);
  return s;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  ManifestData manifest;
  try {
    const SpinLattice lattice = cfg.make_lattice();
    const HamiltonianParams params = cfg.make_params(lattice.edges.size());
    const SparseHermitian h = build_hamiltonian(lattice, params);
    ModelKind model = cfg.make_model();

    const StateSpec spec = parse_state_spec(cfg.initial_state);
    Pipeline pipe;
    pipe.build(cfg, h, params.hbar);
    if (spec.kind == StateSpec::Kind::Werner) pipe.werner_p = spec.werner_p;

    std::ofstream csv(cfg.output);
    if (!csv) {
      log << "error: cannot open output file " << cfg.output << "\n";
      return kExitConfig;
    }
    csv << csv_header(cfg.observables) << "\n";

    std::vector<double> step_times;
    auto last = Clock::now();
    double drift_max = 0;
    auto write_row = [&](const ObservableRecord& rec) {
      csv << format_csv_value(rec.t);
      for (const auto& sel : cfg.observables)
        csv << "," << format_csv_value(pipe.column(rec, sel));
      csv << "\n";
      csv.flush();
      drift_max = std::max(drift_max, rec.ritz_drift);
      step_times.push_back(seconds_since(last));
      last = Clock::now();
    };

    audit::reset_blocks();

    if (cfg.engine == "dense") {
      const Mat hd = h.dense();
      Mat rho;
      if (spec.kind == StateSpec::Kind::Werner) {
        const PureState psi = realize_pure(spec.components.at(0), cfg.n_sites);
        const Vec v = psi.amplitudes / psi.amplitudes.norm();
        rho = spec.werner_p / static_cast<double>(h.dim) * Mat::Identity(h.dim, h.dim) +
              (1.0 - spec.werner_p) * (v * v.adjoint());
      } else {
        rho = initial_lowrank(cfg).dense();
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(rho);
      RVec lambda0(h.dim);
      for (Index i = 0; i < h.dim; ++i)
        lambda0[i] = std::max(0.0, es.eigenvalues()[h.dim - 1 - i]);
      const RKTableau tab = RKTableau::of_order(parse_scheme(cfg.scheme).order);
      if (parse_scheme(cfg.scheme).multistep)
        throw ConfigError("dense engine supports rk schemes only");
      oracle::DenseState cur{rho};
      double t = 0;
      write_row(pipe.fill_dense(0.0, cur.rho));
      long step = 0;
      const double eps = 1e-12 * std::max(1.0, cfg.t_final);
      while (t < cfg.t_final - eps) {
        const double hstep = std::min(cfg.h, cfg.t_final - t);
        cur = oracle::ei_step(cur, h, model, tab, hstep, lambda0);
        t += hstep;
        ++step;
        write_row(pipe.fill_dense(t, cur.rho));
      }
      manifest.steps = step;
    } else {
      LowRankState state = initial_lowrank(cfg);
      if (spec.kind == StateSpec::Kind::Werner)
        model.kappa *= (1.0 - spec.werner_p);
      std::vector<Observer> observers;
      observers.push_back(
          [&pipe](const LowRankState& s, ObservableRecord& rec) { pipe.fill(s, rec); });
      const auto records = evolve(state, h, model, cfg.scheme, cfg.h, cfg.t_final,
                                  observers, cfg.seed, write_row);
      manifest.steps = static_cast<long>(records.size()) - 1;
    }

    manifest.peak_blocks = audit::peak_blocks();
    manifest.ritz_drift_max = drift_max;
    if (step_times.size() > 1) {
      double sum = 0, mx = 0;
      for (size_t i = 1; i < step_times.size(); ++i) {
        sum += step_times[i];
        mx = std::max(mx, step_times[i]);
      }
      manifest.wall_mean = sum / static_cast<double>(step_times.size() - 1);
      manifest.wall_max = mx;
    }
    write_manifest(cfg.output, cfg, manifest);
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ResourceGuardError& e) {
    log << "error: " << e.what() << "\n";
    manifest.status = "aborted";
    write_manifest(cfg.output, cfg, manifest);
    return kExitResource;
  } catch (const NumericalAbort& e) {
    log << "error: " << e.what() << "\n";
    manifest.status = "aborted";
    write_manifest(cfg.output, cfg, manifest);
    return kExitNumerical;
  } catch (const LanczosError& e) {
    log << "error: " << e.what() << "\n";
    manifest.status = "aborted";
    write_manifest(cfg.output, cfg, manifest);
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int run_convergence(const ExperimentConfig& cfg,
                    const std::vector<std::string>& schemes,
                    const std::vector<double>& h_values, std::ostream& log) {
  try {
    cfg.validate();
    if (cfg.n_sites > 10)
      throw ConfigError("converge needs n_sites <= 10 for the dense error norm");
    for (const auto& s : schemes) parse_scheme(s);
    if (h_values.empty()) throw ConfigError("converge: no h values");

    const SpinLattice lattice = cfg.make_lattice();
    const HamiltonianParams params = cfg.make_params(lattice.edges.size());
    const SparseHermitian h = build_hamiltonian(lattice, params);
    const ModelKind model = cfg.make_model();
    const StateSpec spec = parse_state_spec(cfg.initial_state);
    const LowRankState rho0 = initial_lowrank(cfg);
    if (spec.kind == StateSpec::Kind::Werner)
      throw ConfigError("converge: use run for werner states");

    // Reference: closed form for rank-1, otherwise a fine dense EI run.
    Mat ref;
    if (rho0.rank() == 1) {
      PureState psi;
      psi.amplitudes = rho0.v.col(0);
      ref = oracle::exact_rank1(psi, h, model.kappa, model.hbar, cfg.t_final,
                                model.model)
                .rho;
    } else {
      if (cfg.n_sites > 8)
        throw ConfigError(
            "converge: non-rank-1 initial states need n_sites <= 8 for the "
            "dense reference");
      double h_min = h_values[0];
      for (double hv : h_values) h_min = std::min(h_min, hv);
      const double h_ref = h_min / 4.0;
      const long n_ref = std::lround(cfg.t_final / h_ref);
      const auto traj = oracle::ei_evolve({rho0.dense()}, h, model,
                                          RKTableau::classic4(), h_ref, n_ref);
      ref = traj.back().rho;
    }

    std::ofstream csv(cfg.output);
    csv << "scheme,h,error,fitted_order\n";
    for (const auto& scheme : schemes) {
      std::vector<double> errs;
      for (double hv : h_values) {
        double err = std::numeric_limits<double>::infinity();
        // direct stepping loop so the final state stays available
        try {
          const SchemeSpec sp = parse_scheme(scheme);
          LowRankState cur = rho0;
          if (!sp.multistep) {
            const RKTableau tab = RKTableau::of_order(sp.order);
            double t = 0;
            const double eps = 1e-12 * std::max(1.0, cfg.t_final);
            long step = 0;
            while (t < cfg.t_final - eps) {
              const double hstep = std::min(hv, cfg.t_final - t);
              cur = rk_step(cur, h, model, tab, hstep,
                            cfg.seed + static_cast<std::uint64_t>(step));
              t += hstep;
              ++step;
            }
          } else {
            const long n_steps = std::lround(cfg.t_final / hv);
            if (std::abs(cfg.t_final / hv - static_cast<double>(n_steps)) > 1e-9)
              throw ConfigError("converge: AB needs t_final/h integral");
            ABHistory hist =
                ab_bootstrap(cur, h, model, sp.order, hv, cfg.seed, nullptr);
            for (long k = sp.order - 1; k < n_steps; ++k)
              cur = ab_step(hist, h, model, cfg.seed + static_cast<std::uint64_t>(k));
          }
          if (cur.v.allFinite())
            err = (cur.dense() - ref).cwiseAbs().maxCoeff();
        } catch (const LanczosError&) {
        } catch (const NumericalAbort&) {
        }
        errs.push_back(err);
      }
      std::vector<double> tail_h(h_values.end() - std::min<size_t>(3, h_values.size()),
                                 h_values.end());
      std::vector<double> tail_e(errs.end() - std::min<size_t>(3, errs.size()),
                                 errs.end());
      const double order = fitted_slope(tail_h, tail_e);
      for (size_t i = 0; i < h_values.size(); ++i) {
        csv << scheme << "," << format_csv_value(h_values[i]) << ","
            << format_csv_value(errs[i]) << "," << format_csv_value(order) << "\n";
        log << scheme << " h=" << h_values[i] << " err=" << errs[i]
            << " fitted_order=" << order << "\n";
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int run_benchmark(const ExperimentConfig& cfg, const std::vector<int>& n_values,
                  const std::vector<int>& r_values,
                  const std::vector<std::string>& schemes, bool compare_dense,
                  std::ostream& log) {
  try {
    for (const auto& s : schemes) parse_scheme(s);
    std::ofstream csv(cfg.output);
    csv << "n,r,scheme,seconds_per_step";
    if (compare_dense) csv << ",dense_seconds_per_step";
    csv << "\n";

    for (int n : n_values) {
      for (int r : r_values) {
        for (const auto& scheme : schemes) {
          std::string note;
          double per_step = std::numeric_limits<double>::quiet_NaN();
          double dense_per_step = std::numeric_limits<double>::quiet_NaN();
          try {
            const SpinLattice lattice = chain_lattice(n, cfg.periodic);
            ExperimentConfig cell = cfg;
            cell.n_sites = n;
            const HamiltonianParams params = cell.make_params(lattice.edges.size());
            const SparseHermitian h = build_hamiltonian(lattice, params);
            const ModelKind model = cell.make_model();

            if (r < 1 || r > 4)
              throw ConfigError("bench: r values must be in 1..4");
            std::vector<PureState> comps{af_state(1, n), af_state(2, n),
                                         ghz_state(n), w_state(n)};
            comps.resize(static_cast<size_t>(r));
            std::vector<double> weights;
            const double base[] = {0.4, 0.3, 0.2, 0.1};
            double tot = 0;
            for (size_t i = 0; i < comps.size(); ++i) tot += base[i];
            for (size_t i = 0; i < comps.size(); ++i) weights.push_back(base[i] / tot);
            const LowRankState rho0 = mix(comps, weights);

            const SchemeSpec sp = parse_scheme(scheme);
            const int timed = 5;
            if (!sp.multistep) {
              const RKTableau tab = RKTableau::of_order(sp.order);
              LowRankState cur = rk_step(rho0, h, model, tab, cfg.h, cfg.seed);
              const auto t0 = Clock::now();
              for (int k = 0; k < timed; ++k)
                cur = rk_step(cur, h, model, tab, cfg.h,
                              cfg.seed + static_cast<std::uint64_t>(k + 1));
              per_step = seconds_since(t0) / timed;
            } else {
              ABHistory hist =
                  ab_bootstrap(rho0, h, model, sp.order, cfg.h, cfg.seed);
              ab_step(hist, h, model, cfg.seed);
              const auto t0 = Clock::now();
              for (int k = 0; k < timed; ++k)
                ab_step(hist, h, model, cfg.seed + static_cast<std::uint64_t>(k + 1));
              per_step = seconds_since(t0) / timed;
            }

            if (compare_dense && n <= 10) {
              Eigen::SelfAdjointEigenSolver<Mat> es(rho0.dense());
              RVec lambda0(h.dim);
              for (Index i = 0; i < h.dim; ++i)
                lambda0[i] = std::max(0.0, es.eigenvalues()[h.dim - 1 - i]);
              const RKTableau tab = RKTableau::classic4();
              oracle::DenseState cur{rho0.dense()};
              cur = oracle::ei_step(cur, h, model, tab, cfg.h, lambda0);
              const auto t0 = Clock::now();
              for (int k = 0; k < 2; ++k)
                cur = oracle::ei_step(cur, h, model, tab, cfg.h, lambda0);
              dense_per_step = seconds_since(t0) / 2;
            }
          } catch (const ResourceGuardError& e) {
            note = e.what();
          } catch (const std::bad_alloc&) {
            note = "allocation failure";
          } catch (const std::exception& e) {
            note = e.what();
          }
          csv << n << "," << r << "," << scheme << ","
              << format_csv_value(per_step);
          if (compare_dense) csv << "," << format_csv_value(dense_per_step);
          csv << "\n";
          csv.flush();
          log << "n=" << n << " r=" << r << " " << scheme << " "
              << per_step << " s/step";
          if (!note.empty()) log << "  [" << note << "]";
          log << "\n";
        }
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int run_validate(const ExperimentConfig& cfg, std::ostream& log) {
  int errors = 0;
  auto error = [&](const std::string& s) {
    log << "error: " << s << "\n";
    ++errors;
  };
  auto warn = [&](const std::string& s) { log << "warning: " << s << "\n"; };

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    error(e.what());
  }

  int order = 0;
  bool multistep = false;
  try {
    const SchemeSpec sp = parse_scheme(cfg.scheme);
    order = sp.order;
    multistep = sp.multistep;
  } catch (const std::invalid_argument& e) {
    error(e.what());
  }

  if (multistep && cfg.h > 0 && cfg.t_final > 0) {
    const double ratio = cfg.t_final / cfg.h;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      error("AB schemes need t_final/h integral; adjust the grid");
  }

  Index rank_guess = 1;
  try {
    const StateSpec spec = parse_state_spec(cfg.initial_state);
    if (spec.kind == StateSpec::Kind::Mix)
      rank_guess = static_cast<Index>(spec.components.size());
  } catch (const ConfigError& e) {
    error(e.what());
  }

  if (cfg.n_sites >= 1 && cfg.n_sites <= 62) {
    const double n = std::pow(2.0, cfg.n_sites);
    const int stages = multistep ? order : std::max(order, 1);
    const double bytes =
        (2.0 * stages + 1.0) * n * static_cast<double>(rank_guess) * 16.0 +
        (2.0 * static_cast<double>(rank_guess) + 9.0) * n * 16.0;
    log << "memory estimate: " << static_cast<long long>(bytes)
        << " bytes for the factor blocks (n=" << cfg.n_sites
        << ", r~" << rank_guess << ", " << stages << " stages)\n";
    if (bytes > 2.0e9)
      warn("estimated factor storage above 2 GB; consider fewer sites");
  }

  log << (errors == 0 ? "config ok\n" : "config has errors\n");
  return errors == 0 ? kExitOk : kExitConfig;
}

}  // namespace lrei
