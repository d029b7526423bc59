#pragma once

// Explicit smooth cut-off functions: the canonical bump chi, time ramps,
// per-axis plateau factors, and the space-time products
//
//   zeta(x,t) = psi(t) * prod_i zeta_i^{p_i}(x_i)
//
// used as test-function weights by the energy and iteration probes, plus
// the iteration variants with their explicit derivative bounds.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "anisodiff/flux_core.hpp"
#include "anisodiff/geometry.hpp"

namespace anisodiff {

/// Z(t) = exp(-1/t) for t > 0, else 0.  Values of t at or below 1e-12 are
/// clamped to the zero branch; exp(-1/t) underflows far earlier.
inline double bump_z(double t) {
  if (t <= 1e-12) return 0.0;
  return std::exp(-1.0 / t);
}

/// Canonical bump chi(t) = Z(t) / (Z(t) + Z(1-t)): 0 on (-inf,0], 1 on
/// [1,inf), smooth and non-decreasing, with chi(t) + chi(1-t) = 1.
inline double chi(double t) {
  if (t <= 1e-12) return 0.0;
  if (t >= 1.0 - 1e-12) return 1.0;
  const double zt = bump_z(t);
  return zt / (zt + bump_z(1.0 - t));
}

/// d/dt chi, analytic.  chi' = (Z'(t) Z(1-t) + Z(t) Z'(1-t)) / (Z+Z(1-t))^2
/// with Z'(s) = Z(s)/s^2.
inline double chi_prime(double t) {
  if (t <= 1e-12 || t >= 1.0 - 1e-12) return 0.0;
  const double zt = bump_z(t);
  const double zu = bump_z(1.0 - t);
  const double dzt = zt / (t * t);
  const double dzu = zu / ((1.0 - t) * (1.0 - t));
  const double denom = zt + zu;
  return (dzt * zu + zt * dzu) / (denom * denom);
}

/// Numerical maximum of chi' over [0,1]: dense sampling followed by
/// golden-section refinement, accurate to 1e-8.  Computed once and cached;
/// this is the oracle constant behind c = (8 P ||chi'||)^P.
inline double chi_prime_sup() {
  static const double cached = [] {
    const int N = 4096;
    double best_t = 0.5, best = 0.0;
    for (int i = 1; i < N; ++i) {
      const double t = static_cast<double>(i) / N;
      const double v = chi_prime(t);
      if (v > best) {
        best = v;
        best_t = t;
      }
    }
    // golden-section refinement around the best sample
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_t - 2.0 / N, b = best_t + 2.0 / N;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    while (b - a > 1e-12) {
      if (chi_prime(c1) < chi_prime(c2)) {
        a = c1;
        c1 = c2;
        c2 = a + gr * (b - a);
      } else {
        b = c2;
        c2 = c1;
        c1 = b - gr * (b - a);
      }
    }
    return chi_prime(0.5 * (a + b));
  }();
  return cached;
}

/// The Appendix constant c = (8 P ||chi'||_inf)^P with P = max p_i.
inline double cutoff_bound_constant(const ExponentVector& p) {
  return std::pow(8.0 * p.max_exponent() * chi_prime_sup(), p.max_exponent());
}

/// One-sided smooth time ramp: 0 at and below t_lo, 1 at and above t_hi.
struct TimeRamp {
  double t_lo, t_hi;
  double operator()(double t) const { return chi((t - t_lo) / (t_hi - t_lo)); }
};

/// Even plateau factor: 1 on [-b, b], 0 outside (-a, a), relative to a center.
struct AxisRamp {
  double center, a, b;
  double operator()(double x) const {
    const double s = x - center;
    const double w = a - b;
    return chi((s + a) / w) * chi((a - s) / w);
  }
};

/// Evaluable space-time cut-off zeta(x,t) = psi(t) prod_i zeta_i^{p_i}(x_i).
/// Immutable after construction; evaluation is pure.
class CutoffFn {
 public:
  CutoffFn(TimeRamp psi, std::vector<AxisRamp> axes, ExponentVector p)
      : psi_(psi), axes_(std::move(axes)), p_(std::move(p)) {
    if (static_cast<int>(axes_.size()) != p_.n())
      throw std::invalid_argument("CutoffFn: dimension mismatch");
  }

  double time_factor(double t) const { return psi_(t); }
  double axis_factor(int i, double xi) const { return axes_[static_cast<size_t>(i)](xi); }

  double eval(std::span<const double> x, double t) const {
    double v = psi_(t);
    if (v == 0.0) return 0.0;
    for (int i = 0; i < p_.n(); ++i) {
      const double zi = axes_[static_cast<size_t>(i)](x[static_cast<size_t>(i)]);
      if (zi == 0.0) return 0.0;
      v *= std::pow(zi, p_[i]);
    }
    return v;
  }

  /// zeta^{1/p_i}, the root the spatial derivative bounds refer to.
  double eval_root(int i, std::span<const double> x, double t) const {
    return std::pow(eval(x, t), 1.0 / p_[i]);
  }

  /// Finite-difference time derivative; h is scaled to the ramp width.
  double dt(std::span<const double> x, double t) const {
    const double h = 1e-6 * (psi_.t_hi - psi_.t_lo);
    return (eval(x, t + h) - eval(x, t - h)) / (2.0 * h);
  }

  /// Finite-difference |d/dx_i zeta^{1/p_i}|.
  double d_root(int i, std::span<const double> x, double t) const {
    const double h = 1e-6 * (axes_[static_cast<size_t>(i)].a -
                             axes_[static_cast<size_t>(i)].b);
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    xp[static_cast<size_t>(i)] += h;
    xm[static_cast<size_t>(i)] -= h;
    return std::abs(eval_root(i, xp, t) - eval_root(i, xm, t)) / (2.0 * h);
  }

  const ExponentVector& exponents() const { return p_; }
  const TimeRamp& time_ramp() const { return psi_; }
  const AxisRamp& axis_ramp(int i) const { return axes_[static_cast<size_t>(i)]; }

 private:
  TimeRamp psi_;
  std::vector<AxisRamp> axes_;
  ExponentVector p_;
};

/// Cut-off for a standard cylinder Q_rho(x0,t0): psi rises on
/// [t0-rho+eps/2, t0-rho+eps], each zeta_i is 1 on [-b_i,b_i] and 0 outside
/// (-a_i,a_i).  Requires 0 < b_i < a_i < rho^{1/p_i} and eps in (0,rho).
inline CutoffFn make_zeta(const std::vector<double>& x0, double t0, double rho,
                          double eps, const std::vector<double>& a_vec,
                          const std::vector<double>& b_vec, ExponentVector p) {
  if (!(eps > 0.0 && eps < rho))
    throw std::invalid_argument("make_zeta: eps must lie in (0, rho)");
  std::vector<AxisRamp> axes;
  for (int i = 0; i < p.n(); ++i) {
    const double ai = a_vec[static_cast<size_t>(i)];
    const double bi = b_vec[static_cast<size_t>(i)];
    if (!(0.0 < bi && bi < ai && ai < std::pow(rho, 1.0 / p[i])))
      throw std::invalid_argument("make_zeta: need 0 < b_i < a_i < rho^{1/p_i}");
    axes.push_back(AxisRamp{x0[static_cast<size_t>(i)], ai, bi});
  }
  TimeRamp psi{t0 - rho + 0.5 * eps, t0 - rho + eps};
  return CutoffFn(psi, std::move(axes), std::move(p));
}

/// Convenience variant with the harness defaults b_i = (rho/2)^{1/p_i},
/// a_i = (3 rho/4)^{1/p_i}, eps = rho/4.
inline CutoffFn make_zeta_default(const std::vector<double>& x0, double t0,
                                  double rho, ExponentVector p) {
  std::vector<double> a, b;
  for (int i = 0; i < p.n(); ++i) {
    a.push_back(std::pow(0.75 * rho, 1.0 / p[i]));
    b.push_back(std::pow(0.5 * rho, 1.0 / p[i]));
  }
  return make_zeta(x0, t0, rho, 0.25 * rho, a, b, std::move(p));
}

/// Iteration cut-off zeta~_j for a ShrinkOut schedule: a_{i,j} =
/// rho~_j^{1/p_i}, b_{i,j} = rho_{j+1}^{1/p_i}, psi_j rising on
/// [-rho~_j, -rho_{j+1}] relative to the vertex time.  Satisfies
///   0 <= dt zeta~_j <= c 2^j / ((1-sigma) rho),
///   |d_i zeta~_j^{1/p_i}|^{p_i} <= c 2^{jP} / ((1-sigma)^P rho)
/// with c = (8 P ||chi'||)^P.
inline CutoffFn make_zeta_tilde_j(const IterationSchedule& s, int j) {
  if (s.mode != ScheduleMode::ShrinkOut)
    throw std::invalid_argument("make_zeta_tilde_j: needs a ShrinkOut schedule");
  if (j < 0) throw std::invalid_argument("make_zeta_tilde_j: j must be >= 0");
  const ScheduleEntry e = s.entry(j);
  const double rho_next = s.radius(j + 1);
  std::vector<AxisRamp> axes;
  for (int i = 0; i < s.exponents.n(); ++i)
    axes.push_back(AxisRamp{s.vertex[static_cast<size_t>(i)],
                            std::pow(e.rho_tilde_j, 1.0 / s.exponents[i]),
                            std::pow(rho_next, 1.0 / s.exponents[i])});
  TimeRamp psi{s.t_vertex - e.rho_tilde_j, s.t_vertex - rho_next};
  return CutoffFn(psi, std::move(axes), s.exponents);
}

/// Iteration cut-off eta_j for an IntrinsicShrink schedule: 1 on Q_{j+1},
/// 0 on the parabolic boundary of Q_j, with the intrinsic derivative bounds
///   0 <= dt eta_j <= c 2^{(j+1) pbar} / rho^pbar,
///   |d_i eta_j^{1/p_i}|^{p_i} <= c 2^{jP} / (M^{p_i-2} rho^pbar).
inline CutoffFn make_eta_j(const IterationSchedule& s, int j) {
  if (s.mode != ScheduleMode::IntrinsicShrink)
    throw std::invalid_argument("make_eta_j: needs an IntrinsicShrink schedule");
  if (j < 0) throw std::invalid_argument("make_eta_j: j must be >= 0");
  const int l = intrinsic_inflation_exponent(s.exponents);
  const double pbar = s.exponents.harmonic_mean();
  std::vector<AxisRamp> axes;
  for (int i = 0; i < s.exponents.n(); ++i)
    axes.push_back(AxisRamp{s.vertex[static_cast<size_t>(i)],
                            intrinsic_box_half_width(s, j, l, i),
                            intrinsic_box_half_width(s, j + 1, l, i)});
  const double depth_j = std::pow(s.radius(j), pbar);
  const double depth_next = std::pow(s.radius(j + 1), pbar);
  TimeRamp psi{s.t_vertex - 0.5 * (depth_j + depth_next), s.t_vertex - depth_next};
  return CutoffFn(psi, std::move(axes), s.exponents);
}

}  // namespace anisodiff
