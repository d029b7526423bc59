#pragma once

// De Giorgi iteration diagnostics: the fast-geometric-convergence recursion
// Y_{j+1} <= C b^j Y_j^{1+mu}, level-set energies Y_j/Z_j computed from
// trajectories, the explicit sup bounds in the supercritical and
// subcritical regimes, the critical-mass checker on intrinsic cylinders,
// and the lower-semicontinuous regularization.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisodiff/analysis.hpp"
#include "anisodiff/flux_core.hpp"
#include "anisodiff/geometry.hpp"
#include "anisodiff/grid.hpp"

namespace anisodiff {

// ---------------------------------------------------------------------------
// Recursion machinery
// ---------------------------------------------------------------------------

struct RecursionParams {
  double C, b, mu, Y0;

  void validate() const {
    if (!(C > 0.0) || !(b > 1.0) || !(mu > 0.0) || !(Y0 >= 0.0))
      throw std::invalid_argument(
          "RecursionParams: need C > 0, b > 1, mu > 0, Y0 >= 0");
  }
};

/// Threshold T = C^{-1/mu} b^{-1/mu^2}: Y_0 <= T forces Y_j -> 0.
inline double recursion_threshold(const RecursionParams& p) {
  p.validate();
  return std::pow(p.C, -1.0 / p.mu) * std::pow(p.b, -1.0 / (p.mu * p.mu));
}

struct RecursionResult {
  std::vector<double> Y;
  bool diverged = false;  // overflow reached before J terms
};

/// Equality recursion Y_{j+1} = C b^j Y_j^{1+mu} (the worst case).
inline RecursionResult iterate_recursion(const RecursionParams& p, int J) {
  p.validate();
  if (J < 1) throw std::invalid_argument("iterate_recursion: J must be >= 1");
  RecursionResult r;
  r.Y.reserve(static_cast<size_t>(J) + 1);
  r.Y.push_back(p.Y0);
  double y = p.Y0;
  for (int j = 0; j < J; ++j) {
    y = p.C * std::pow(p.b, j) * std::pow(y, 1.0 + p.mu);
    if (!std::isfinite(y)) {
      r.diverged = true;
      break;
    }
    r.Y.push_back(y);
  }
  return r;
}

/// Closed form at Y_0 = threshold: Y_j = C^{-1/mu} b^{-1/mu^2 - j/mu}.
inline double recursion_closed_form(const RecursionParams& p, int j) {
  return std::pow(p.C, -1.0 / p.mu) *
         std::pow(p.b, -1.0 / (p.mu * p.mu) - static_cast<double>(j) / p.mu);
}

// ---------------------------------------------------------------------------
// Level-set energies from trajectories
// ---------------------------------------------------------------------------

/// Y_j = iint_{Q_j} (u - k_j)_+^expo dx dt for the schedule's cylinders
/// Q_j = Q_{rho_j}(vertex).  With expo = P these are the Thm 4.1 energies;
/// expo = 2 and expo = m give the subcritical Y_j / Z_j pair.
inline std::vector<double> compute_Yj(const Trajectory& traj,
                                      const IterationSchedule& sched, double expo,
                                      int J) {
  if (J < 1) throw std::invalid_argument("compute_Yj: J must be >= 1");
  const Grid& g = *traj.grid;
  const double dt_w = traj.slice_spacing();
  const double vol = g.cell_volume();
  std::vector<double> Y;
  Y.reserve(static_cast<size_t>(J) + 1);
  for (int j = 0; j <= J; ++j) {
    const StdCylinder cyl(sched.vertex, sched.t_vertex, sched.radius(j),
                          sched.exponents);
    const double kj = sched.level(j);
    double total = 0.0;
    for (int s = 0; s < traj.num_slices(); ++s) {
      const double t = traj.times[static_cast<size_t>(s)];
      if (!cyl.contains_time(t)) continue;
      const std::vector<double>& u = traj.slices[static_cast<size_t>(s)];
      total += parallel_sum(g.size(), [&](std::size_t c) {
        if (!cyl.contains_space(g.cell_center(c))) return 0.0;
        const double w = positive_part(u[c] - kj);
        return w > 0.0 ? std::pow(w, expo) * vol * dt_w : 0.0;
      });
    }
    Y.push_back(total);
  }
  return Y;
}

// ---------------------------------------------------------------------------
// Explicit sup bounds
// ---------------------------------------------------------------------------

enum class SupBoundKind {
  SupercriticalSigma,  // ess sup <= max{1, rho^{1/P}, C [ ... ]^{pbar/(pbar(n+2)-nP)}}
  SupercriticalNu,     // ess sup <= C [ (avg |u|^nu)^{1/(nu-omega)} + 1 + rho^{1/P} ]
  SubcriticalM,        // ess sup <= C [ (avg u_+^m)^{1/(m - (n/pbar)(2-pbar))} + 1 + sqrt(rho) ]
};

struct SupBoundReport {
  SupBoundKind kind;
  double inner_sup = 0.0;      // grid sup over the inner cylinder
  double mean_integral = 0.0;  // the average integral entering the bound
  double mean_exponent = 0.0;  // the exponent applied to it
  double radius_term = 0.0;    // rho^{1/P} or sqrt(rho)
  double fitted_C = 1.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - inner_sup
  bool pass = false;
  // subcritical diagnostics
  std::string subcritical_branch;  // one of "I=0,q=1" ... or empty
  double frak_q = 0.0, theta = 0.0;
};

/// Evaluates one of the explicit local boundedness estimates on a pair of
/// concentric standard cylinders Q_{sigma rho} subset Q_rho at (x0, t0).
inline SupBoundReport sup_bound(const Trajectory& traj, const ProblemSpec& spec,
                                const std::vector<double>& x0, double t0,
                                double rho, double sigma, SupBoundKind kind,
                                double param,  // nu or m; ignored for Sigma kind
                                double fitted_C) {
  const ExponentVector& p = spec.exponents;
  const int n = p.n();
  const double pbar = p.harmonic_mean();
  const double P = p.big_p();
  const double calP = p.max_exponent();
  if (!(sigma > 0.0 && sigma < 1.0))
    throw std::invalid_argument("sup_bound: sigma must lie in (0,1)");

  const StdCylinder outer(x0, t0, rho, p);
  const StdCylinder inner(x0, t0, sigma * rho, p);
  const Grid& g = *traj.grid;
  const double dt_w = traj.slice_spacing();
  const double vol = g.cell_volume();

  SupBoundReport rep;
  rep.kind = kind;
  rep.fitted_C = fitted_C;

  double inner_sup = -std::numeric_limits<double>::infinity();
  double mean_num = 0.0, mean_den = 0.0;
  const double expo_u = kind == SupBoundKind::SupercriticalSigma
                            ? P
                            : (kind == SupBoundKind::SupercriticalNu ? param : param);
  for (int s = 0; s < traj.num_slices(); ++s) {
    const double t = traj.times[static_cast<size_t>(s)];
    const bool in_outer = outer.contains_time(t);
    const bool in_inner = inner.contains_time(t);
    if (!in_outer && !in_inner) continue;
    const std::vector<double>& u = traj.slices[static_cast<size_t>(s)];
    for (std::size_t c = 0; c < g.size(); ++c) {
      const std::vector<double> x = g.cell_center(c);
      if (in_inner && inner.contains_space(x))
        inner_sup = std::max(inner_sup, u[c]);
      if (in_outer && outer.contains_space(x)) {
        const double base = kind == SupBoundKind::SupercriticalNu
                                ? std::abs(u[c])
                                : positive_part(u[c]);
        mean_num += pow_pos(base, expo_u) * vol * dt_w;
        mean_den += vol * dt_w;
      }
    }
  }
  if (!(mean_den > 0.0))
    throw std::invalid_argument("sup_bound: outer cylinder holds no cells");
  const double avg = mean_num / mean_den;
  rep.inner_sup = inner_sup;
  rep.mean_integral = avg;

  switch (kind) {
    case SupBoundKind::SupercriticalSigma: {
      const double denom = pbar * (n + 2.0) - n * P;
      if (!(denom > 0.0))
        throw std::invalid_argument("sup_bound: pbar(n+2) <= nP, outside range");
      rep.mean_exponent = pbar / denom;
      rep.radius_term = std::pow(rho, 1.0 / P);
      const double amp = std::pow(1.0 - sigma, -calP * (n + pbar) / pbar);
      const double term = fitted_C * pow_pos(amp * avg, rep.mean_exponent);
      rep.bound = std::max({1.0, rep.radius_term, term});
      break;
    }
    case SupBoundKind::SupercriticalNu: {
      const double om = omega(p);
      if (!(param > om && param <= P))
        throw std::invalid_argument("sup_bound: nu must lie in (omega, P]");
      rep.mean_exponent = 1.0 / (param - om);
      rep.radius_term = std::pow(rho, 1.0 / P);
      rep.bound = fitted_C *
                  (pow_pos(avg, rep.mean_exponent) + 1.0 + rep.radius_term);
      break;
    }
    case SupBoundKind::SubcriticalM: {
      const double m = param;
      const double m_min = (n / pbar) * (2.0 - pbar);
      if (!(m > m_min))
        throw std::invalid_argument("sup_bound: m too small for subcritical bound");
      rep.mean_exponent = 1.0 / (m - m_min);
      rep.radius_term = std::sqrt(rho);
      rep.bound = fitted_C *
                  (pow_pos(avg, rep.mean_exponent) + 1.0 + rep.radius_term);
      // proof-internal branch diagnostics: I = avg, frak q, theta
      const double I = avg;
      rep.frak_q = (m - 2.0 * pbar * (1.0 / n + 0.5)) / (m - 2.0);
      rep.theta = rep.frak_q != 0.0
                      ? pbar * (1.0 / n + 0.5) / rep.frak_q
                      : std::numeric_limits<double>::infinity();
      const bool i_zero = I == 0.0;
      const bool q_one = std::abs(rep.frak_q - 1.0) < 1e-15;
      rep.subcritical_branch = std::string(i_zero ? "I=0" : "I>0") + "," +
                               (q_one ? "q=1" : "q!=1");
      break;
    }
  }
  rep.margin = rep.bound - rep.inner_sup;
  rep.pass = rep.inner_sup <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Critical Mass Lemma checker
// ---------------------------------------------------------------------------

enum class CriticalMassSide { Super, Sub };  // supersolution (mu-) / subsolution (mu+)

struct CriticalMassReport {
  CriticalMassSide side = CriticalMassSide::Super;
  double mu_extremum = 0.0;  // mu- (Super) or mu+ (Sub) over the double cylinder
  double M = 0.0, a = 0.0;
  double gamma_rho_term = 0.0;  // Gamma rho^pbar
  bool precondition_ok = false; // M^2 > Gamma rho^pbar
  double measure_fraction = 0.0;
  double nu_star = 0.0;         // gamma^{-n/pbar} 2^{-b n^2 / pbar^2}
  double nu_threshold = 0.0;    // nu_star / gamma_star, the frozen comparison value
  bool mass_below_threshold = false;
  bool conclusion_holds = false;
  std::string verdict;  // "verified" | "not-verified" | "precondition-failed"
  int inflation_l = 0;
};

/// The recursion-depth constant b of the critical-mass iteration: the sum
/// of the dimensional exponents picked up per step by the measure shrink
/// (pbar(n+2)/n) and the cut-off amplification (max p_i (n+pbar)/n).
inline double critical_mass_b(const ExponentVector& p) {
  const int n = p.n();
  const double pbar = p.harmonic_mean();
  return pbar * (n + 2.0) / n + p.max_exponent() * (n + pbar) / n;
}

/// nu* = gamma^{-n/pbar} 2^{-b n^2 / pbar^2} for a fitted gamma.
inline double critical_mass_nu_star(const ExponentVector& p, double gamma_fit) {
  const int n = p.n();
  const double pbar = p.harmonic_mean();
  const double b = critical_mass_b(p);
  return std::pow(gamma_fit, -static_cast<double>(n) / pbar) *
         std::pow(2.0, -b * n * n / (pbar * pbar));
}

/// Checks the measure-theoretic maximum principle: if the bad level set
/// {u <= mu- + M} fills at most a nu-fraction of the double intrinsic
/// cylinder and M^2 > Gamma rho^pbar, then u >= mu- + aM on the inner one
/// (Sub side: mirrored with mu+ and u <= mu+ - aM).
inline CriticalMassReport critical_mass_check(
    const Trajectory& traj, const ProblemSpec& spec, const std::vector<double>& y,
    double s, double rho, double M, double a, CriticalMassSide side,
    double gamma_fit, double gamma_star) {
  if (!(a > 0.0 && a < 1.0))
    throw std::invalid_argument("critical_mass_check: a must lie in (0,1)");
  const ExponentVector& p = spec.exponents;
  const double pbar = p.harmonic_mean();
  const IntrinsicCylinder outer(y, s, 2.0 * rho, M, p);
  const IntrinsicCylinder inner(y, s, rho, M, p);
  const Grid& g = *traj.grid;

  CriticalMassReport rep;
  rep.side = side;
  rep.M = M;
  rep.a = a;
  rep.inflation_l = intrinsic_inflation_exponent(p);
  rep.gamma_rho_term = gamma_threshold(spec.degeneracy, p) * std::pow(rho, pbar);
  rep.precondition_ok = M * M > rep.gamma_rho_term;

  const double sgn = side == CriticalMassSide::Super ? 1.0 : -1.0;
  // mu- = grid inf (Super) / mu+ = grid sup (Sub) over the double cylinder
  double extremum = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int si = 0; si < traj.num_slices(); ++si) {
    const double t = traj.times[static_cast<size_t>(si)];
    if (!outer.contains_time(t)) continue;
    const std::vector<double>& u = traj.slices[static_cast<size_t>(si)];
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (!outer.contains_space(g.cell_center(c))) continue;
      extremum = std::min(extremum, sgn * u[c]);
      any = true;
    }
  }
  if (!any)
    throw std::invalid_argument("critical_mass_check: double cylinder holds no cells");
  rep.mu_extremum = sgn * extremum;  // mu- or mu+

  // bad-set fraction: {sgn u <= sgn mu +- M} within the double cylinder
  const double level = extremum + M;  // in the sgn-transformed picture
  std::size_t bad = 0, total = 0;
  for (int si = 0; si < traj.num_slices(); ++si) {
    const double t = traj.times[static_cast<size_t>(si)];
    if (!outer.contains_time(t)) continue;
    const std::vector<double>& u = traj.slices[static_cast<size_t>(si)];
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (!outer.contains_space(g.cell_center(c))) continue;
      ++total;
      if (sgn * u[c] <= level) ++bad;
    }
  }
  rep.measure_fraction = static_cast<double>(bad) / static_cast<double>(total);

  rep.nu_star = critical_mass_nu_star(p, gamma_fit);
  rep.nu_threshold = rep.nu_star / gamma_star;
  rep.mass_below_threshold = rep.measure_fraction <= rep.nu_threshold;

  // conclusion on the inner cylinder: sgn u >= sgn mu + aM everywhere
  bool holds = true;
  const double conclusion_level = extremum + a * M;
  for (int si = 0; si < traj.num_slices() && holds; ++si) {
    const double t = traj.times[static_cast<size_t>(si)];
    if (!inner.contains_time(t)) continue;
    const std::vector<double>& u = traj.slices[static_cast<size_t>(si)];
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (!inner.contains_space(g.cell_center(c))) continue;
      if (!(sgn * u[c] >= conclusion_level)) {
        holds = false;
        break;
      }
    }
  }
  rep.conclusion_holds = holds;
  if (!rep.precondition_ok)
    rep.verdict = "precondition-failed";
  else
    rep.verdict = holds ? "verified" : "not-verified";
  return rep;
}

// ---------------------------------------------------------------------------
// Lower-semicontinuous regularization
// ---------------------------------------------------------------------------

struct LscResult {
  Trajectory u_star;
  Trajectory gap;                       // u - u_star >= 0
  std::vector<std::uint8_t> skipped;    // per (slice, cell), cylinder left the domain
};

/// Discrete u_*(x,t) = stabilized min of u over backward cylinders
/// (x,t) + Q_rho for a dyadic sequence rho_0 > rho_0/2 > ... down to a
/// single cell.  The mins m_0 <= m_1 <= ... <= m_K are non-decreasing; the
/// limit value is read off as m_{K-1} when the tail has stabilized
/// (m_{K-1} == m_{K-2} exactly), else m_K.  Cells whose largest cylinder
/// exits the domain are evaluated from the radii that fit and flagged.
inline LscResult lsc_regularize(const Trajectory& traj, const ExponentVector& p,
                                double rho0) {
  const Grid& g = *traj.grid;
  if (p.n() != g.n()) throw std::invalid_argument("lsc_regularize: dimension mismatch");
  if (!(rho0 > 0.0)) throw std::invalid_argument("lsc_regularize: rho0 must be > 0");
  const int K = traj.num_slices();
  const double dt_w = K >= 2 ? traj.slice_spacing() : 1.0;

  LscResult out;
  out.u_star.grid = &g;
  out.gap.grid = &g;
  out.u_star.times = traj.times;
  out.gap.times = traj.times;
  out.u_star.slices.assign(traj.slices.size(), std::vector<double>(g.size(), 0.0));
  out.gap.slices.assign(traj.slices.size(), std::vector<double>(g.size(), 0.0));
  out.skipped.assign(static_cast<size_t>(K) * g.size(), 0);

  // smallest dyadic radius whose cylinder is a single cell: half-widths
  // below h_i/2 on all axes and time depth below dt_w
  for (int sidx = 0; sidx < K; ++sidx) {
    const double t = traj.times[static_cast<size_t>(sidx)];
    for (std::size_t c = 0; c < g.size(); ++c) {
      const std::vector<double> x = g.cell_center(c);
      std::vector<double> mins;
      double rho = rho0;
      for (int step = 0; step < 64; ++step) {
        // min over cells with center in (x,t) + Q_rho^- = K_rho(x) x (t-rho, t]
        bool fits = t - rho >= traj.times.front() - 1e-14;
        for (int i = 0; i < g.n() && fits; ++i) {
          const double hw = std::pow(rho, 1.0 / p[i]);
          if (x[static_cast<size_t>(i)] - hw < g.lo[static_cast<size_t>(i)] - 1e-14 ||
              x[static_cast<size_t>(i)] + hw > g.hi[static_cast<size_t>(i)] + 1e-14)
            fits = false;
        }
        if (fits) {
          // index window per axis: cells whose center lies within the
          // half-width of x along every axis
          const std::vector<int> idx0 = g.unflat(c);
          std::vector<int> lo_i(static_cast<size_t>(g.n())),
              hi_i(static_cast<size_t>(g.n()));
          for (int i = 0; i < g.n(); ++i) {
            const double hw = std::pow(rho, 1.0 / p[i]);
            const int r = static_cast<int>(std::floor(hw / g.h[static_cast<size_t>(i)] + 0.5));
            lo_i[static_cast<size_t>(i)] = std::max(0, idx0[static_cast<size_t>(i)] - r);
            hi_i[static_cast<size_t>(i)] =
                std::min(g.counts[static_cast<size_t>(i)] - 1,
                         idx0[static_cast<size_t>(i)] + r);
          }
          double m = std::numeric_limits<double>::infinity();
          for (int sj = 0; sj < K; ++sj) {
            const double tj = traj.times[static_cast<size_t>(sj)];
            if (!(tj > t - rho - 1e-14 && tj <= t + 1e-14)) continue;
            const std::vector<double>& u = traj.slices[static_cast<size_t>(sj)];
            std::vector<int> it = lo_i;
            while (true) {
              bool in = true;
              for (int i = 0; i < g.n() && in; ++i)
                if (!(std::abs(g.center(i, it[static_cast<size_t>(i)]) -
                               x[static_cast<size_t>(i)]) <
                      std::pow(rho, 1.0 / p[i])))
                  in = false;
              if (in) m = std::min(m, u[g.flat(it)]);
              int ax = g.n() - 1;
              while (ax >= 0 && ++it[static_cast<size_t>(ax)] > hi_i[static_cast<size_t>(ax)]) {
                it[static_cast<size_t>(ax)] = lo_i[static_cast<size_t>(ax)];
                --ax;
              }
              if (ax < 0) break;
            }
          }
          mins.push_back(m);
        } else if (!mins.empty()) {
          // once the sequence has started, smaller radii always fit; this
          // branch only trims oversized leading radii
          mins.clear();
        }
        // stop once the cylinder is a single cell
        bool single = rho <= dt_w;
        for (int i = 0; i < g.n(); ++i)
          if (std::pow(rho, 1.0 / p[i]) > 0.5 * g.h[static_cast<size_t>(i)])
            single = false;
        if (single && !mins.empty()) break;
        rho *= 0.5;
      }
      const double u_here = traj.slices[static_cast<size_t>(sidx)][c];
      double star = u_here;
      if (mins.size() >= 3 &&
          mins[mins.size() - 2] == mins[mins.size() - 3])
        star = mins[mins.size() - 2];
      else if (!mins.empty())
        star = mins.back();
      else
        out.skipped[static_cast<size_t>(sidx) * g.size() + c] = 1;
      out.u_star.slices[static_cast<size_t>(sidx)][c] = star;
      out.gap.slices[static_cast<size_t>(sidx)][c] = u_here - star;
    }
  }
  return out;
}

}  // namespace anisodiff
