#pragma once

// Discrete functional-analysis toolkit: Steklov averages, truncations,
// level-set measures, both sides of the Caccioppoli-type energy estimates,
// and the anisotropic (Troisi) embedding check.
//
// Quadrature conventions: all space-time integrals are midpoint sums over
// cell centers and stored slices; "ess sup" over time is the max over
// stored slices; the indicator 1_{u>k} uses strict inequality at cell
// centers, ties count as outside the level set.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "anisodiff/cutoff.hpp"
#include "anisodiff/flux_core.hpp"
#include "anisodiff/geometry.hpp"
#include "anisodiff/grid.hpp"
#include "anisodiff/parallel.hpp"

namespace anisodiff {

enum class TruncSign { Plus, Minus };

/// (u-k)_+ or (u-k)_- at a point.
inline double truncate(double u, double k, TruncSign s) {
  return s == TruncSign::Plus ? positive_part(u - k) : positive_part(k - u);
}

/// Steklov average [v]_h(x,t) = (1/h) int_t^{t+h} v(x,s) ds for
/// t <= t1 - h, and 0 on the trailing window (t1-h, t1].  Time quadrature
/// is composite trapezoid over stored slices (exact for data affine in t);
/// h is snapped to the nearest multiple of the stored slice spacing.
inline Trajectory steklov_average(const Trajectory& traj, double h) {
  const double d = traj.slice_spacing();
  const double span = traj.times.back() - traj.times.front();
  if (!(h > 0.0 && h < span))
    throw std::invalid_argument("steklov_average: h outside (0, span)");
  const int m = std::max(1, static_cast<int>(std::llround(h / d)));
  if (m >= traj.num_slices() - 1)
    throw std::invalid_argument("steklov_average: h too large for stored slices");
  const double h_eff = m * d;

  Trajectory out;
  out.grid = traj.grid;
  out.times = traj.times;
  out.slices.assign(traj.slices.size(),
                    std::vector<double>(traj.grid->size(), 0.0));
  const int K = traj.num_slices();
  for (int k = 0; k + m < K; ++k) {
    std::vector<double>& dst = out.slices[static_cast<size_t>(k)];
    for (int j = 0; j <= m; ++j) {
      const double w = (j == 0 || j == m) ? 0.5 : 1.0;
      const std::vector<double>& src = traj.slices[static_cast<size_t>(k + j)];
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
    for (double& v : dst) v *= d / h_eff;
  }
  return out;
}

namespace detail {

/// Cell-centered one-sided/central gradient along an axis, interior-safe:
/// average of the two adjacent face differences, clamped at grid walls.
inline double cell_gradient(const Grid& g, const std::vector<double>& u,
                            const std::vector<int>& idx, std::size_t flat,
                            int axis) {
  const int N = g.counts[static_cast<size_t>(axis)];
  const int i = idx[static_cast<size_t>(axis)];
  const double h = g.h[static_cast<size_t>(axis)];
  const double um = i > 0 ? u[flat - g.stride[static_cast<size_t>(axis)]] : u[flat];
  const double up = i < N - 1 ? u[flat + g.stride[static_cast<size_t>(axis)]] : u[flat];
  const double span = (i > 0 ? 1.0 : 0.0) + (i < N - 1 ? 1.0 : 0.0);
  return span > 0.0 ? (up - um) / (span * h) : 0.0;
}

}  // namespace detail

/// Discrete measure of {u > k} (Plus) or {u < k} (Minus) intersected with a
/// cylinder: cell volume times slice spacing, cell-center membership.
template <typename Cyl>
double level_set_measure(const Trajectory& traj, const Cyl& cyl, double k,
                         TruncSign sign) {
  const Grid& g = *traj.grid;
  const double dt_w = traj.slice_spacing();
  const double vol = g.cell_volume();
  double total = 0.0;
  bool touched = false;
  for (int s = 0; s < traj.num_slices(); ++s) {
    if (!cyl.contains_time(traj.times[static_cast<size_t>(s)])) continue;
    touched = true;
    const std::vector<double>& u = traj.slices[static_cast<size_t>(s)];
    total += parallel_sum(g.size(), [&](std::size_t c) {
      const std::vector<double> x = g.cell_center(c);
      if (!cyl.contains(x, traj.times[static_cast<size_t>(s)])) return 0.0;
      const bool in = sign == TruncSign::Plus ? (u[c] > k) : (u[c] < k);
      return in ? vol * dt_w : 0.0;
    });
  }
  if (!touched)
    throw std::invalid_argument("level_set_measure: cylinder contains no slice");
  return total;
}

/// Discrete cylinder measure under the same quadrature (for fractions).
template <typename Cyl>
double cylinder_measure_discrete(const Trajectory& traj, const Cyl& cyl) {
  const Grid& g = *traj.grid;
  const double dt_w = traj.slice_spacing();
  const double vol = g.cell_volume();
  double total = 0.0;
  for (int s = 0; s < traj.num_slices(); ++s) {
    if (!cyl.contains_time(traj.times[static_cast<size_t>(s)])) continue;
    total += parallel_sum(g.size(), [&](std::size_t c) {
      return cyl.contains_space(g.cell_center(c)) ? vol * dt_w : 0.0;
    });
  }
  return total;
}

/// Both sides of the energy estimate, term by term.
struct EnergyLedger {
  double sup_term = 0.0;       // sup_tau int (u-k)_pm^2 zeta dx
  double gradient_term = 0.0;  // sum_i iint (|d_i u|-delta_i)_+^{p_i} zeta 1_{level}
  double time_term = 0.0;      // iint (u-k)_pm^2 d_t zeta
  double space_term = 0.0;     // sum_i iint (u-k)_pm^{p_i} |d_i zeta^{1/p_i}|^{p_i}
  bool ratio_defined = false;
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

/// Midpoint-quadrature evaluation of all four energy terms over a standard
/// cylinder with the given cut-off weight.
inline EnergyLedger energy_ledger(const Trajectory& traj, const ProblemSpec& spec,
                                  const StdCylinder& cyl, double k, TruncSign sign,
                                  const CutoffFn& zeta) {
  const Grid& g = *traj.grid;
  if (zeta.exponents().n() != g.n())
    throw std::invalid_argument("energy_ledger: cutoff/grid dimension mismatch");
  const double dt_w = traj.slice_spacing();
  const double vol = g.cell_volume();
  EnergyLedger led;
  for (int s = 0; s < traj.num_slices(); ++s) {
    const double t = traj.times[static_cast<size_t>(s)];
    if (!cyl.contains_time(t)) continue;
    const std::vector<double>& u = traj.slices[static_cast<size_t>(s)];
    double slice_sup = 0.0, grad = 0.0, timet = 0.0, space = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
      const std::vector<double> x = g.cell_center(c);
      if (!cyl.contains(x, t)) continue;
      const double w = truncate(u[c], k, sign);
      const double z = zeta.eval(x, t);
      slice_sup += w * w * z * vol;
      timet += w * w * zeta.dt(x, t) * vol * dt_w;
      if (w > 0.0) {
        const std::vector<int> idx = g.unflat(c);
        for (int i = 0; i < g.n(); ++i) {
          const double gi = detail::cell_gradient(g, u, idx, c, i);
          const double mag = positive_part(std::abs(gi) - spec.degeneracy[i]);
          if (mag > 0.0 && z > 0.0)
            grad += std::pow(mag, spec.exponents[i]) * z * vol * dt_w;
        }
      }
      for (int i = 0; i < g.n(); ++i) {
        const double dz = zeta.d_root(i, x, t);
        if (dz > 0.0 && w > 0.0)
          space += std::pow(w, spec.exponents[i]) *
                   std::pow(dz, spec.exponents[i]) * vol * dt_w;
      }
    }
    led.sup_term = std::max(led.sup_term, slice_sup);
    led.gradient_term += grad;
    led.time_term += timet;
    led.space_term += space;
  }
  led.time_term = std::max(led.time_term, 0.0);
  const double denom = led.time_term + led.space_term;
  if (denom > 0.0) {
    led.ratio_defined = true;
    led.ratio = (led.sup_term + led.gradient_term) / denom;
  }
  return led;
}

/// Both sides of the anisotropic Sobolev (Troisi) inequalities
///   (2.5)  ||v||_{pbar*} <= C prod_i ||d_i v||_{p_i}^{1/n}
///   (2.6)  (int |v|^{pbar*})^{pbar/pbar*} <= C sum_i int |d_i v|^{p_i}.
struct TroisiResult {
  double lhs_25 = 0.0, rhs_25 = 0.0, ratio_25 = std::numeric_limits<double>::quiet_NaN();
  double lhs_26 = 0.0, rhs_26 = 0.0, ratio_26 = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;  // false when v == 0 (ratios undefined)
};

inline TroisiResult troisi_check(const Field& v, const ExponentVector& p) {
  const Grid& g = *v.grid;
  if (p.n() != g.n()) throw std::invalid_argument("troisi_check: dimension mismatch");
  const double pbar = p.harmonic_mean();
  const double pstar = sobolev_conjugate(pbar, p.n());
  // compact support: the outermost cell layer must vanish
  for (std::size_t c = 0; c < g.size(); ++c) {
    const std::vector<int> idx = g.unflat(c);
    bool boundary = false;
    for (int i = 0; i < g.n(); ++i)
      if (idx[static_cast<size_t>(i)] == 0 ||
          idx[static_cast<size_t>(i)] == g.counts[static_cast<size_t>(i)] - 1)
        boundary = true;
    if (boundary && v[c] != 0.0)
      throw std::invalid_argument("troisi_check: nonzero boundary values");
  }
  const double vol = g.cell_volume();
  double int_vstar = 0.0;
  std::vector<double> int_grad(static_cast<size_t>(g.n()), 0.0);
  for (std::size_t c = 0; c < g.size(); ++c) {
    int_vstar += std::pow(std::abs(v[c]), pstar) * vol;
    const std::vector<int> idx = g.unflat(c);
    for (int i = 0; i < g.n(); ++i) {
      const double gi = detail::cell_gradient(g, v.values, idx, c, i);
      int_grad[static_cast<size_t>(i)] += std::pow(std::abs(gi), p[i]) * vol;
    }
  }
  TroisiResult r;
  r.lhs_25 = std::pow(int_vstar, 1.0 / pstar);
  r.rhs_25 = 1.0;
  for (int i = 0; i < g.n(); ++i)
    r.rhs_25 *= std::pow(std::pow(int_grad[static_cast<size_t>(i)], 1.0 / p[i]),
                         1.0 / g.n());
  r.lhs_26 = std::pow(int_vstar, pbar / pstar);
  r.rhs_26 = 0.0;
  for (double gi : int_grad) r.rhs_26 += gi;
  if (r.rhs_25 > 0.0 && r.rhs_26 > 0.0) {
    r.defined = true;
    r.ratio_25 = r.lhs_25 / r.rhs_25;
    r.ratio_26 = r.lhs_26 / r.rhs_26;
  }
  return r;
}

}  // namespace anisodiff
