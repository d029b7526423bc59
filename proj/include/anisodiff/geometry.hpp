#pragma once

// Anisotropic cubes K_rho, standard cylinders Q_rho = K_rho x (t0-rho, t0),
// backward intrinsic cylinders, and the nested radius/level schedules used
// by the iteration probes.
//
// Interval conventions are fixed explicitly because discrete containment
// needs a definite rule at endpoints: standard cylinders use the open time
// interval (t0-rho, t0); intrinsic cylinders use (s-rho^pbar, s].  Grid
// cells are assigned by cell-center membership.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "anisodiff/flux_core.hpp"

namespace anisodiff {

/// K_rho(x0) = prod_i (x0_i - rho^{1/p_i}, x0_i + rho^{1/p_i}).
struct AnisoCube {
  std::vector<double> center;
  double rho;
  ExponentVector exponents;

  AnisoCube(std::vector<double> x0, double r, ExponentVector p)
      : center(std::move(x0)), rho(r), exponents(std::move(p)) {
    if (!(rho > 0.0)) throw std::invalid_argument("AnisoCube: rho must be > 0");
    if (static_cast<int>(center.size()) != exponents.n())
      throw std::invalid_argument("AnisoCube: dimension mismatch");
  }

  double half_width(int axis) const { return std::pow(rho, 1.0 / exponents[axis]); }

  bool contains(std::span<const double> x) const {
    for (int i = 0; i < exponents.n(); ++i)
      if (!(std::abs(x[static_cast<size_t>(i)] - center[static_cast<size_t>(i)]) <
            half_width(i)))
        return false;
    return true;
  }

  /// prod_i 2 rho^{1/p_i} = 2^n rho^{n/pbar}.
  double measure() const {
    double m = 1.0;
    for (int i = 0; i < exponents.n(); ++i) m *= 2.0 * half_width(i);
    return m;
  }
};

/// Q_rho(x0,t0) = K_rho(x0) x (t0 - rho, t0); the upper cap is excluded.
struct StdCylinder {
  AnisoCube base;
  double t0;

  StdCylinder(std::vector<double> x0, double t0_, double rho, ExponentVector p)
      : base(std::move(x0), rho, std::move(p)), t0(t0_) {}

  double rho() const { return base.rho; }
  double time_lo() const { return t0 - base.rho; }
  double time_hi() const { return t0; }

  bool contains_time(double t) const { return t > time_lo() && t < time_hi(); }
  bool contains_space(std::span<const double> x) const { return base.contains(x); }
  bool contains(std::span<const double> x, double t) const {
    return contains_time(t) && base.contains(x);
  }

  /// |Q_rho| = 2^n rho^{(n + pbar)/pbar}.
  double measure() const { return base.measure() * base.rho; }
};

/// Backward intrinsic cylinder (y,s) + Q_rho^-(M): spatial half-widths
/// M^{(p_i-2)/p_i} rho^{pbar/p_i}, time interval (s - rho^pbar, s].
struct IntrinsicCylinder {
  std::vector<double> vertex;
  double s;
  double rho;
  double M;
  ExponentVector exponents;

  IntrinsicCylinder(std::vector<double> y, double s_, double rho_, double M_,
                    ExponentVector p)
      : vertex(std::move(y)), s(s_), rho(rho_), M(M_), exponents(std::move(p)) {
    if (!(rho > 0.0) || !(M > 0.0))
      throw std::invalid_argument("IntrinsicCylinder: rho and M must be > 0");
    if (static_cast<int>(vertex.size()) != exponents.n())
      throw std::invalid_argument("IntrinsicCylinder: dimension mismatch");
  }

  double pbar() const { return exponents.harmonic_mean(); }

  double half_width(int axis) const {
    const double pi = exponents[axis];
    return std::pow(M, (pi - 2.0) / pi) * std::pow(rho, pbar() / pi);
  }

  double time_depth() const { return std::pow(rho, pbar()); }
  double time_lo() const { return s - time_depth(); }
  double time_hi() const { return s; }

  bool contains_time(double t) const { return t > time_lo() && t <= s; }
  bool contains_space(std::span<const double> x) const {
    for (int i = 0; i < exponents.n(); ++i)
      if (!(std::abs(x[static_cast<size_t>(i)] - vertex[static_cast<size_t>(i)]) <
            half_width(i)))
        return false;
    return true;
  }
  bool contains(std::span<const double> x, double t) const {
    return contains_time(t) && contains_space(x);
  }

  double measure() const {
    double m = time_depth();
    for (int i = 0; i < exponents.n(); ++i) m *= 2.0 * half_width(i);
    return m;
  }
};

inline StdCylinder make_std_cylinder(std::vector<double> x0, double t0, double rho,
                                     ExponentVector p) {
  return StdCylinder(std::move(x0), t0, rho, std::move(p));
}

inline IntrinsicCylinder make_intrinsic_cylinder(std::vector<double> y, double s,
                                                 double rho, double M,
                                                 ExponentVector p) {
  return IntrinsicCylinder(std::move(y), s, rho, M, std::move(p));
}

enum class ScheduleMode {
  ShrinkOut,        // rho_j = sigma rho + (1-sigma) rho / 2^j, levels k_j = k - k/2^j
  GrowOut,          // rho_j = 2 rho - rho / 2^j,               levels k_j = 2k - k/2^j
  IntrinsicShrink,  // rho_j = rho + rho / 2^j, levels k_j = mu- + aM + (1-a)M/2^j
};

struct ScheduleEntry {
  double rho_j;
  double rho_tilde_j;  // (rho_j + rho_{j+1}) / 2
  double k_j;
};

/// Nested radius / level schedule shared by the De Giorgi iteration probes
/// and the cut-off constructions.
struct IterationSchedule {
  ScheduleMode mode;
  double rho = 1.0;
  double sigma_or_a = 0.5;  // sigma (ShrinkOut) or a (IntrinsicShrink); unused for GrowOut
  double level_scale = 1.0; // k (ShrinkOut / GrowOut) or M (IntrinsicShrink)
  double mu_minus = 0.0;    // IntrinsicShrink only
  ExponentVector exponents;
  std::vector<double> vertex;  // spatial vertex
  double t_vertex = 0.0;

  IterationSchedule(ScheduleMode m, double rho_, double sa, double level,
                    ExponentVector p, std::vector<double> x0 = {}, double t0 = 0.0,
                    double mu = 0.0)
      : mode(m),
        rho(rho_),
        sigma_or_a(sa),
        level_scale(level),
        mu_minus(mu),
        exponents(std::move(p)),
        vertex(std::move(x0)),
        t_vertex(t0) {
    if (!(rho > 0.0)) throw std::invalid_argument("IterationSchedule: rho must be > 0");
    if ((mode == ScheduleMode::ShrinkOut || mode == ScheduleMode::IntrinsicShrink) &&
        !(sigma_or_a > 0.0 && sigma_or_a < 1.0))
      throw std::invalid_argument("IterationSchedule: parameter must lie in (0,1)");
    if (vertex.empty()) vertex.assign(static_cast<size_t>(exponents.n()), 0.0);
  }

  double radius(int j) const {
    const double half = std::pow(2.0, -static_cast<double>(j));
    switch (mode) {
      case ScheduleMode::ShrinkOut:
        return sigma_or_a * rho + (1.0 - sigma_or_a) * rho * half;
      case ScheduleMode::GrowOut:
        return 2.0 * rho - rho * half;
      case ScheduleMode::IntrinsicShrink:
        return rho + rho * half;
    }
    return rho;
  }

  double level(int j) const {
    const double half = std::pow(2.0, -static_cast<double>(j));
    switch (mode) {
      case ScheduleMode::ShrinkOut:
        return level_scale - level_scale * half;
      case ScheduleMode::GrowOut:
        return 2.0 * level_scale - level_scale * half;
      case ScheduleMode::IntrinsicShrink:
        return mu_minus + sigma_or_a * level_scale +
               (1.0 - sigma_or_a) * level_scale * half;
    }
    return level_scale;
  }

  ScheduleEntry entry(int j) const {
    return ScheduleEntry{radius(j), 0.5 * (radius(j) + radius(j + 1)), level(j)};
  }
};

inline std::vector<ScheduleEntry> nested_radii(const IterationSchedule& s, int J) {
  if (J < 1) throw std::invalid_argument("nested_radii: J must be >= 1");
  std::vector<ScheduleEntry> out;
  out.reserve(static_cast<size_t>(J) + 1);
  for (int j = 0; j <= J; ++j) out.push_back(s.entry(j));
  return out;
}

/// Smallest l in {0,...,64} with (1 + 2^-l) inflated intrinsic cube still
/// inside K_{2 rho}(M), i.e. 1 + 2^-l <= 2^{pbar/p_i} for every axis.
inline int intrinsic_inflation_exponent(const ExponentVector& p) {
  const double pbar = p.harmonic_mean();
  for (int l = 0; l <= 64; ++l) {
    bool ok = true;
    for (int i = 0; i < p.n(); ++i)
      if (!(1.0 + std::pow(2.0, -static_cast<double>(l)) <=
            std::pow(2.0, pbar / p[i]))) {
        ok = false;
        break;
      }
    if (ok) return l;
  }
  throw std::runtime_error("intrinsic_inflation_exponent: no l <= 64 works");
}

/// Half-width along `axis` of the inflated intrinsic box K_j used in the
/// critical-mass iteration: M^{(p_i-2)/p_i} rho^{pbar/p_i} (1 + 2^{-(j+l)}).
inline double intrinsic_box_half_width(const IterationSchedule& s, int j, int l,
                                       int axis) {
  const double pi = s.exponents[axis];
  const double pbar = s.exponents.harmonic_mean();
  return std::pow(s.level_scale, (pi - 2.0) / pi) * std::pow(s.rho, pbar / pi) *
         (1.0 + std::pow(2.0, -static_cast<double>(j + l)));
}

/// Minimal margin by which the parabolic boundary of a standard cylinder
/// sits inside the box domain (upper time cap excluded).  Negative when the
/// cylinder pokes out.
inline double parabolic_boundary_distance(const StdCylinder& cyl, const Box& domain) {
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cyl.base.exponents.n(); ++i) {
    const double hw = cyl.base.half_width(i);
    const double c = cyl.base.center[static_cast<size_t>(i)];
    margin = std::min(margin, (c - hw) - domain.lo[static_cast<size_t>(i)]);
    margin = std::min(margin, domain.hi[static_cast<size_t>(i)] - (c + hw));
  }
  margin = std::min(margin, cyl.time_lo() - 0.0);
  margin = std::min(margin, domain.t_end - cyl.time_hi());
  return margin;
}

inline double parabolic_boundary_distance(const IntrinsicCylinder& cyl,
                                          const Box& domain) {
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cyl.exponents.n(); ++i) {
    const double hw = cyl.half_width(i);
    const double c = cyl.vertex[static_cast<size_t>(i)];
    margin = std::min(margin, (c - hw) - domain.lo[static_cast<size_t>(i)]);
    margin = std::min(margin, domain.hi[static_cast<size_t>(i)] - (c + hw));
  }
  margin = std::min(margin, cyl.time_lo() - 0.0);
  margin = std::min(margin, domain.t_end - cyl.time_hi());
  return margin;
}

}  // namespace anisodiff
