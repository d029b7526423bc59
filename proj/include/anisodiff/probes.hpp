#pragma once

// Probe runners shared by the CLI and the acceptance suite: simulation
// setup, random energy-ratio draws, cut-off bound sampling, embedding
// checks, critical-mass scenario batches, and constant calibration.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "anisodiff/analysis.hpp"
#include "anisodiff/config.hpp"
#include "anisodiff/cutoff.hpp"
#include "anisodiff/degiorgi.hpp"
#include "anisodiff/flux_core.hpp"
#include "anisodiff/geometry.hpp"
#include "anisodiff/grid.hpp"
#include "anisodiff/report.hpp"
#include "anisodiff/solver.hpp"

namespace anisodiff {

/// One solver run with stable storage addresses for the grid.
struct SimRun {
  std::unique_ptr<Grid> grid;
  std::unique_ptr<ProblemSpec> spec;
  Trajectory traj;
};

inline SimRun run_simulation(const ExperimentConfig& cfg) {
  SimRun run;
  run.grid = std::make_unique<Grid>(cfg.grid());
  run.spec = std::make_unique<ProblemSpec>(cfg.problem());
  Field u0 = make_field(*run.grid, [&](const std::vector<double>& x) {
    return cfg.initial.eval(x);
  });
  run.traj = advance(u0, *run.spec, cfg.scheme, cfg.t_end);
  return run;
}

// ---------------------------------------------------------------------------
// Energy probes
// ---------------------------------------------------------------------------

struct EnergyProbeResult {
  double rho, t0, k;
  std::vector<double> x0;
  EnergyLedger ledger;
};

/// Draws `count` random (cylinder, level) pairs inside the domain and
/// evaluates the energy ledger with the default cut-off (eps = rho/4).
/// Draws whose denominator vanishes are redrawn (bounded retries).
inline std::vector<EnergyProbeResult> energy_probe_batch(const SimRun& run,
                                                         int count,
                                                         std::uint64_t seed) {
  const Grid& g = *run.grid;
  const ExponentVector& p = run.spec->exponents;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double t_end = run.traj.times.back();

  // feasible rho so the cylinder fits with one-cell margin on all axes
  double rho_max = 0.45 * t_end;
  for (int i = 0; i < g.n(); ++i) {
    const double half = 0.5 * (g.hi[static_cast<size_t>(i)] - g.lo[static_cast<size_t>(i)]);
    rho_max = std::min(rho_max, std::pow(0.4 * half, p[i]));
  }

  double u_min = run.traj.slices.front()[0], u_max = u_min;
  for (const auto& s : run.traj.slices)
    for (double v : s) {
      u_min = std::min(u_min, v);
      u_max = std::max(u_max, v);
    }

  std::vector<EnergyProbeResult> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts < 50 * count) {
    ++attempts;
    EnergyProbeResult r;
    r.rho = rho_max * (0.4 + 0.6 * uni(rng));
    r.t0 = r.rho + (t_end - r.rho) * (0.5 + 0.5 * uni(rng));
    r.x0.resize(static_cast<size_t>(g.n()));
    bool fits = true;
    for (int i = 0; i < g.n(); ++i) {
      const double hw = std::pow(r.rho, 1.0 / p[i]);
      const double lo = g.lo[static_cast<size_t>(i)] + hw;
      const double hi = g.hi[static_cast<size_t>(i)] - hw;
      if (!(hi > lo)) {
        fits = false;
        break;
      }
      r.x0[static_cast<size_t>(i)] = lo + (hi - lo) * uni(rng);
    }
    if (!fits) continue;
    r.k = u_min + (u_max - u_min) * (0.1 + 0.6 * uni(rng));
    const StdCylinder cyl(r.x0, r.t0, r.rho, p);
    const CutoffFn zeta = make_zeta_default(r.x0, r.t0, r.rho, p);
    const TruncSign sign = uni(rng) < 0.5 ? TruncSign::Plus : TruncSign::Minus;
    r.ledger = energy_ledger(run.traj, *run.spec, cyl, r.k, sign, zeta);
    if (!r.ledger.ratio_defined) continue;
    out.push_back(std::move(r));
  }
  return out;
}

/// Calibration: the max defined ratio over the batch.
inline double fit_energy_constant(const std::vector<EnergyProbeResult>& batch) {
  double c = 0.0;
  for (const auto& r : batch) c = std::max(c, r.ledger.ratio);
  return c;
}

// ---------------------------------------------------------------------------
// Cut-off bound sampling
// ---------------------------------------------------------------------------

struct CutoffCheckResult {
  int j;
  double sigma;
  double sup_dt = 0.0, bound_dt = 0.0;
  double sup_droot = 0.0, bound_droot = 0.0;  // worst axis, already ^{p_i}
  bool pass = false;
};

/// Samples d_t zeta~_j and |d_i zeta~_j^{1/p_i}|^{p_i} at `samples` random
/// points of Q_j and compares with the claimed bounds.
inline CutoffCheckResult cutoff_check(const ExponentVector& p, double rho,
                                      double sigma, int j, int samples,
                                      std::uint64_t seed) {
  IterationSchedule sched(ScheduleMode::ShrinkOut, rho, sigma, 1.0, p);
  const CutoffFn zeta = make_zeta_tilde_j(sched, j);
  const double c = cutoff_bound_constant(p);
  const double calP = p.max_exponent();

  CutoffCheckResult res;
  res.j = j;
  res.sigma = sigma;
  res.bound_dt = c * std::pow(2.0, j) / ((1.0 - sigma) * rho);
  res.bound_droot = c * std::pow(2.0, j * calP) /
                    (std::pow(1.0 - sigma, calP) * rho);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double rho_j = sched.radius(j);
  std::vector<double> x(static_cast<size_t>(p.n()));
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < p.n(); ++i)
      x[static_cast<size_t>(i)] = uni(rng) * std::pow(rho_j, 1.0 / p[i]);
    const double t = -0.5 * (uni(rng) + 1.0) * rho_j;  // in (-rho_j, 0)
    res.sup_dt = std::max(res.sup_dt, zeta.dt(x, t));
    for (int i = 0; i < p.n(); ++i) {
      const double d = zeta.d_root(i, x, t);
      res.sup_droot = std::max(res.sup_droot, std::pow(d, p[i]));
    }
  }
  res.pass = res.sup_dt <= res.bound_dt && res.sup_droot <= res.bound_droot;
  return res;
}

// ---------------------------------------------------------------------------
// Troisi embedding probes
// ---------------------------------------------------------------------------

/// Smooth tensor bump supported strictly inside the grid box.
inline Field tensor_bump(const Grid& g) {
  return make_field(g, [&](const std::vector<double>& x) {
    double v = 1.0;
    for (int i = 0; i < g.n(); ++i) {
      const double mid = 0.5 * (g.lo[static_cast<size_t>(i)] + g.hi[static_cast<size_t>(i)]);
      const double half = 0.5 * (g.hi[static_cast<size_t>(i)] - g.lo[static_cast<size_t>(i)]);
      const double s = (x[static_cast<size_t>(i)] - mid) / (0.8 * half);
      v *= std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    }
    return v;
  });
}

struct TroisiProbe {
  TroisiResult baseline, refined, dilated;
  double refine_factor = 0.0;   // refined ratio_26 / baseline ratio_26
  double dilate_rel_err = 0.0;  // |dilated ratio_25 / baseline ratio_25 - 1|
};

/// Baseline bump on `counts`, one refinement (2x cells), and the
/// anisotropic dilation x_i -> lambda^{1/p_i} x_i at lambda = 2 under which
/// inequality (2.5) is scale-invariant.
inline TroisiProbe troisi_probe(const ExponentVector& p, const std::vector<int>& counts,
                                double extent = 1.0, double lambda_dil = 2.0) {
  TroisiProbe out;
  const int n = p.n();
  std::vector<double> lo(static_cast<size_t>(n), -extent),
      hi(static_cast<size_t>(n), extent);
  {
    Grid g(lo, hi, counts);
    out.baseline = troisi_check(tensor_bump(g), p);
  }
  {
    std::vector<int> c2 = counts;
    for (int& c : c2) c *= 2;
    Grid g(lo, hi, c2);
    out.refined = troisi_check(tensor_bump(g), p);
  }
  {
    std::vector<double> lo2 = lo, hi2 = hi;
    std::vector<int> c2 = counts;
    for (int i = 0; i < n; ++i) {
      const double f = std::pow(lambda_dil, 1.0 / p[i]);
      lo2[static_cast<size_t>(i)] *= f;
      hi2[static_cast<size_t>(i)] *= f;
    }
    Grid g(lo2, hi2, c2);
    // v_lambda(x) = v(x / lambda^{1/p_i}): same bump stretched per axis
    Grid gref(lo, hi, counts);
    Field v = make_field(g, [&](const std::vector<double>& x) {
      double val = 1.0;
      for (int i = 0; i < n; ++i) {
        const double f = std::pow(lambda_dil, 1.0 / p[i]);
        const double half = extent;
        const double s = (x[static_cast<size_t>(i)] / f) / (0.8 * half);
        val *= std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
      }
      return val;
    });
    out.dilated = troisi_check(v, p);
  }
  out.refine_factor = out.refined.ratio_26 / out.baseline.ratio_26;
  out.dilate_rel_err =
      std::abs(out.dilated.ratio_25 / out.baseline.ratio_25 - 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Critical-mass scenarios
// ---------------------------------------------------------------------------

struct CriticalMassScenario {
  ExperimentConfig config;
  std::vector<double> y;
  double s, rho, M, a;
};

/// Builds a frozen-dynamics supersolution scenario: constant initial data
/// (all face gradients zero, so the run is exactly inert for any delta),
/// with a small dip grafted near the outer edge of the double cylinder
/// after the run.  Thresholds stay small so Gamma rho^pbar << M^2.
inline CriticalMassScenario make_critical_mass_scenario(const ExponentVector& p,
                                                        double M, double rho,
                                                        double delta_all,
                                                        std::uint64_t seed) {
  CriticalMassScenario sc;
  const int n = p.n();
  const double pbar = p.harmonic_mean();
  const double depth = std::pow(2.0 * rho, pbar);

  std::vector<double> hw(static_cast<size_t>(n));
  const IntrinsicCylinder dbl(std::vector<double>(static_cast<size_t>(n), 0.0),
                              0.0, 2.0 * rho, M, p);
  for (int i = 0; i < n; ++i) hw[static_cast<size_t>(i)] = dbl.half_width(i);

  ExperimentConfig& c = sc.config;
  c.p = p.values();
  c.delta.assign(static_cast<size_t>(n), delta_all);
  c.lambda = 1.0;
  c.coeff_family = "constant";
  c.dom_lo.resize(static_cast<size_t>(n));
  c.dom_hi.resize(static_cast<size_t>(n));
  c.counts.assign(static_cast<size_t>(n), 24);
  for (int i = 0; i < n; ++i) {
    c.dom_lo[static_cast<size_t>(i)] = -1.3 * hw[static_cast<size_t>(i)];
    c.dom_hi[static_cast<size_t>(i)] = 1.3 * hw[static_cast<size_t>(i)];
  }
  c.t_end = 1.2 * depth;
  c.scheme.dt_max = depth / 64.0;
  c.scheme.max_stored_slices = 10000;
  c.initial.family = "constant";
  c.initial.offset = 2.0 * M;  // mu- would be 0 without the dip
  c.seed = seed;

  sc.y.assign(static_cast<size_t>(n), 0.0);
  sc.s = c.t_end;
  sc.rho = rho;
  sc.M = M;
  sc.a = 0.5;
  return sc;
}

/// Runs a scenario: simulates the inert equation, then carves a shallow dip
/// (depth 0.4 M below the plateau, still above mu- + M is false — the dip
/// defines mu-) into `dip_cells` cells at the outer spatial corner of the
/// double cylinder on the earliest contained slice, and checks the lemma.
inline CriticalMassReport run_critical_mass_scenario(
    const CriticalMassScenario& sc, int dip_cells, double gamma_fit,
    double gamma_star, SimRun* run_out = nullptr) {
  SimRun run = run_simulation(sc.config);
  const Grid& g = *run.grid;
  const ExponentVector& p = run.spec->exponents;
  const IntrinsicCylinder dbl(sc.y, sc.s, 2.0 * sc.rho, sc.M, p);

  // earliest stored slice inside the double cylinder
  int s0 = -1;
  for (int s = 0; s < run.traj.num_slices(); ++s)
    if (dbl.contains_time(run.traj.times[static_cast<size_t>(s)])) {
      s0 = s;
      break;
    }
  if (s0 < 0) throw std::runtime_error("scenario: no slice in double cylinder");

  // dip cells: the contained cells closest to the outer spatial corner
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const std::vector<double> x = g.cell_center(c);
    if (!dbl.contains_space(x)) continue;
    double d = 0.0;  // negative distance to corner: prefer outermost
    for (int i = 0; i < g.n(); ++i)
      d += std::abs(x[static_cast<size_t>(i)]) / dbl.half_width(i);
    ranked.emplace_back(-d, c);
  }
  std::sort(ranked.begin(), ranked.end());
  const double plateau = sc.config.initial.offset;
  for (int k = 0; k < dip_cells && k < static_cast<int>(ranked.size()); ++k)
    run.traj.slices[static_cast<size_t>(s0)][ranked[static_cast<size_t>(k)].second] =
        plateau - 1.2 * sc.M;  // defines mu- = plateau - 1.2 M

  CriticalMassReport rep =
      critical_mass_check(run.traj, *run.spec, sc.y, sc.s, sc.rho, sc.M, sc.a,
                          CriticalMassSide::Super, gamma_fit, gamma_star);
  // the trajectory references the run's grid, so the whole run moves out
  if (run_out) *run_out = std::move(run);
  return rep;
}

/// Fits gamma from the observed Y-recursion of the shrinking intrinsic
/// iteration: gamma = max_j Y_{j+1} / (2^{bj} Y_j^{1+pbar/n}) over measure
/// fractions Y_j of the bad sets {u <= k_j} in the schedule's cylinders.
inline double fit_critical_mass_gamma(const Trajectory& traj,
                                      const ProblemSpec& spec,
                                      const std::vector<double>& y, double s,
                                      double rho, double M, double mu_minus,
                                      int J) {
  const ExponentVector& p = spec.exponents;
  const int n = p.n();
  const double pbar = p.harmonic_mean();
  const double b = critical_mass_b(p);
  IterationSchedule sched(ScheduleMode::IntrinsicShrink, rho, 0.5, M, p, y, s,
                          mu_minus);
  std::vector<double> Y;
  for (int j = 0; j <= J; ++j) {
    const IntrinsicCylinder cyl(y, s, sched.radius(j), M, p);
    std::size_t bad = 0, total = 0;
    const Grid& g = *traj.grid;
    for (int si = 0; si < traj.num_slices(); ++si) {
      if (!cyl.contains_time(traj.times[static_cast<size_t>(si)])) continue;
      const std::vector<double>& u = traj.slices[static_cast<size_t>(si)];
      for (std::size_t c = 0; c < g.size(); ++c) {
        if (!cyl.contains_space(g.cell_center(c))) continue;
        ++total;
        if (u[c] <= sched.level(j)) ++bad;
      }
    }
    Y.push_back(total > 0 ? static_cast<double>(bad) / total : 0.0);
  }
  double gamma = 0.0;
  for (int j = 0; j + 1 <= J; ++j) {
    if (!(Y[static_cast<size_t>(j)] > 0.0)) continue;
    const double pred = std::pow(2.0, b * j) *
                        std::pow(Y[static_cast<size_t>(j)], 1.0 + pbar / n);
    if (pred > 0.0)
      gamma = std::max(gamma, Y[static_cast<size_t>(j) + 1] / pred);
  }
  return gamma;
}

}  // namespace anisodiff
