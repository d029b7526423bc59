#pragma once

// Conservative explicit finite-difference integration of
//
//   d/dt u = sum_i d/dx_i [ a_i(x,t) (|d/dx_i u| - delta_i)_+^{p_i-1} sgn ]
//
// on a uniform cell-centered grid.  Face-flux (conservative) form so that
// stationary Lipschitz data with all face gradients inside the degeneracy
// region is reproduced exactly.  Boundary rules: Dirichlet-from-initial
// (wall values extrapolated once from the initial slice, then frozen) or
// Periodic.  Only explicit schemes (Euler, midpoint RK2).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisodiff/flux_core.hpp"
#include "anisodiff/grid.hpp"
#include "anisodiff/parallel.hpp"

namespace anisodiff {

enum class Scheme { ExplicitEuler, ExplicitRK2 };
enum class BoundaryRule { DirichletFromInitial, Periodic };

struct SchemeConfig {
  Scheme scheme = Scheme::ExplicitEuler;
  double cfl_safety = 0.4;   // in (0,1)
  double dt_max = 1e-2;
  BoundaryRule boundary = BoundaryRule::DirichletFromInitial;
  double eps_reg = 1e-8;     // diffusivity-estimate regularization only
  double fixed_dt = 0.0;     // > 0 forces this dt (clamped by stability)
  int max_stored_slices = 201;

  void validate() const {
    if (!(cfl_safety > 0.0 && cfl_safety < 1.0))
      throw std::invalid_argument("SchemeConfig: cfl_safety must lie in (0,1)");
    if (!(eps_reg >= 0.0))
      throw std::invalid_argument("SchemeConfig: eps_reg must be >= 0");
    if (!(dt_max > 0.0))
      throw std::invalid_argument("SchemeConfig: dt_max must be > 0");
  }
};

/// Frozen Dirichlet wall values, extrapolated from the initial slice:
/// w = (3 u0_b - u0_{b-1}) / 2, exact for affine data.
struct BoundaryData {
  // wall[axis][side][flattened index over the remaining axes]
  std::vector<std::array<std::vector<double>, 2>> wall;
};

namespace detail {

/// Flat index of the cell obtained by replacing the axis-component of idx.
inline std::size_t with_axis(const Grid& g, std::size_t flat, int axis, int from,
                             int to) {
  return flat + (static_cast<std::size_t>(to) - static_cast<std::size_t>(from)) *
                    g.stride[static_cast<size_t>(axis)];
}

/// Flat index over the (n-1)-dim wall slab perpendicular to `axis`.
inline std::size_t wall_index(const Grid& g, const std::vector<int>& idx, int axis) {
  std::size_t f = 0, s = 1;
  for (int i = g.n() - 1; i >= 0; --i) {
    if (i == axis) continue;
    f += static_cast<std::size_t>(idx[static_cast<size_t>(i)]) * s;
    s *= static_cast<std::size_t>(g.counts[static_cast<size_t>(i)]);
  }
  return f;
}

}  // namespace detail

inline BoundaryData make_boundary_data(const Grid& g, const Field& u0) {
  BoundaryData bd;
  bd.wall.resize(static_cast<size_t>(g.n()));
  for (int ax = 0; ax < g.n(); ++ax) {
    std::size_t slab = g.size() / static_cast<std::size_t>(g.counts[static_cast<size_t>(ax)]);
    bd.wall[static_cast<size_t>(ax)][0].assign(slab, 0.0);
    bd.wall[static_cast<size_t>(ax)][1].assign(slab, 0.0);
  }
  for (std::size_t c = 0; c < g.size(); ++c) {
    const std::vector<int> idx = g.unflat(c);
    for (int ax = 0; ax < g.n(); ++ax) {
      const int N = g.counts[static_cast<size_t>(ax)];
      const int i = idx[static_cast<size_t>(ax)];
      if (i == 0) {
        const double u1 = u0[detail::with_axis(g, c, ax, 0, 1)];
        bd.wall[static_cast<size_t>(ax)][0][detail::wall_index(g, idx, ax)] =
            0.5 * (3.0 * u0[c] - u1);
      }
      if (i == N - 1) {
        const double u1 = u0[detail::with_axis(g, c, ax, N - 1, N - 2)];
        bd.wall[static_cast<size_t>(ax)][1][detail::wall_index(g, idx, ax)] =
            0.5 * (3.0 * u0[c] - u1);
      }
    }
  }
  return bd;
}

/// Gradient at the face on the `side` (0 = lower, 1 = upper) of cell `idx`
/// along `axis`: (u_right - u_left)/h at interior faces; at Dirichlet walls
/// 2 (u_cell - w)/h with the frozen wall value (exact for affine data);
/// periodic faces wrap.
inline double face_gradient(const Grid& g, const std::vector<double>& u,
                            const std::vector<int>& idx, std::size_t flat, int axis,
                            int side, BoundaryRule rule, const BoundaryData* bd) {
  const int N = g.counts[static_cast<size_t>(axis)];
  const int i = idx[static_cast<size_t>(axis)];
  const double h = g.h[static_cast<size_t>(axis)];
  if (side == 0) {
    if (i > 0) return (u[flat] - u[detail::with_axis(g, flat, axis, i, i - 1)]) / h;
    if (rule == BoundaryRule::Periodic)
      return (u[flat] - u[detail::with_axis(g, flat, axis, i, N - 1)]) / h;
    const double w = bd->wall[static_cast<size_t>(axis)][0][detail::wall_index(g, idx, axis)];
    return 2.0 * (u[flat] - w) / h;
  }
  if (i < N - 1) return (u[detail::with_axis(g, flat, axis, i, i + 1)] - u[flat]) / h;
  if (rule == BoundaryRule::Periodic)
    return (u[detail::with_axis(g, flat, axis, i, 0)] - u[flat]) / h;
  const double w = bd->wall[static_cast<size_t>(axis)][1][detail::wall_index(g, idx, axis)];
  return 2.0 * (w - u[flat]) / h;
}

/// Convenience overload for callers holding a Field.
inline double face_gradient(const Field& f, int axis, const std::vector<int>& idx,
                            int side, BoundaryRule rule = BoundaryRule::Periodic,
                            const BoundaryData* bd = nullptr) {
  const Grid& g = *f.grid;
  return face_gradient(g, f.values, idx, g.flat(idx), axis, side, rule, bd);
}

namespace detail {

inline std::vector<double> face_center(const Grid& g, const std::vector<int>& idx,
                                       int axis, int side) {
  std::vector<double> x(static_cast<size_t>(g.n()));
  for (int i = 0; i < g.n(); ++i) x[static_cast<size_t>(i)] = g.center(i, idx[static_cast<size_t>(i)]);
  x[static_cast<size_t>(axis)] += (side == 0 ? -0.5 : 0.5) * g.h[static_cast<size_t>(axis)];
  return x;
}

}  // namespace detail

/// Per-cell sum_i (Phi_i(face+) - Phi_i(face-)) / h_i with Phi_i the
/// directional flux at face gradients and face-center coefficients.
inline Field divergence_of_flux(const Field& u, const ProblemSpec& spec, double t,
                                BoundaryRule rule, const BoundaryData* bd) {
  const Grid& g = *u.grid;
  if (!u.finite()) throw std::runtime_error("divergence_of_flux: non-finite input");
  Field out(g);
  parallel_for(g.size(), [&](std::size_t c) {
    const std::vector<int> idx = g.unflat(c);
    double div = 0.0;
    for (int ax = 0; ax < g.n(); ++ax) {
      const double gm = face_gradient(g, u.values, idx, c, ax, 0, rule, bd);
      const double gp = face_gradient(g, u.values, idx, c, ax, 1, rule, bd);
      const std::vector<double> xm = detail::face_center(g, idx, ax, 0);
      const std::vector<double> xp = detail::face_center(g, idx, ax, 1);
      const double fm = flux(gm, spec.coeff.eval(ax, xm, t), spec.exponents[ax],
                             spec.degeneracy[ax]);
      const double fp = flux(gp, spec.coeff.eval(ax, xp, t), spec.exponents[ax],
                             spec.degeneracy[ax]);
      div += (fp - fm) / g.h[static_cast<size_t>(ax)];
    }
    out[c] = div;
  });
  return out;
}

/// Stable step: dt = cfl * min over faces of h_i^2 / (n * D_i) with local
/// effective diffusivity D_i = a_i (p_i-1)(|g| - delta_i + eps_reg)_+^{p_i-2}.
/// If every face is degenerate the flux vanishes and dt_max is returned.
inline double stable_dt(const Field& u, const ProblemSpec& spec,
                        const SchemeConfig& cfg, double t, BoundaryRule rule,
                        const BoundaryData* bd) {
  const Grid& g = *u.grid;
  const int n = g.n();
  std::vector<double> dmax(static_cast<size_t>(n), 0.0);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const std::vector<int> idx = g.unflat(c);
    for (int ax = 0; ax < n; ++ax) {
      for (int side = 0; side < 2; ++side) {
        const double gr = face_gradient(g, u.values, idx, c, ax, side, rule, bd);
        const double mag = positive_part(std::abs(gr) - spec.degeneracy[ax] + cfg.eps_reg);
        if (mag <= 0.0) continue;
        const std::vector<double> x = detail::face_center(g, idx, ax, side);
        const double a = spec.coeff.eval(ax, x, t);
        const double d = a * (spec.exponents[ax] - 1.0) *
                         std::pow(mag, spec.exponents[ax] - 2.0);
        dmax[static_cast<size_t>(ax)] = std::max(dmax[static_cast<size_t>(ax)], d);
      }
    }
  }
  double dt = cfg.dt_max;
  for (int ax = 0; ax < n; ++ax) {
    if (dmax[static_cast<size_t>(ax)] <= 0.0) continue;
    const double h = g.h[static_cast<size_t>(ax)];
    dt = std::min(dt, cfg.cfl_safety * h * h / (n * dmax[static_cast<size_t>(ax)]));
  }
  return dt;
}

/// Integrates to t_end, storing at most max_stored_slices slices (always
/// including the initial and final ones).  Enforces the discrete maximum
/// principle to 1e-9 * osc(u0) under Dirichlet; aborts on NaN/Inf.
inline Trajectory advance(const Field& u0, const ProblemSpec& spec,
                          const SchemeConfig& cfg, double t_end) {
  cfg.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("advance: t_end must be > 0");
  const Grid& g = *u0.grid;
  const BoundaryData bd = make_boundary_data(g, u0);
  const BoundaryData* bdp =
      cfg.boundary == BoundaryRule::DirichletFromInitial ? &bd : nullptr;

  // max-principle bounds: initial cell values and, under Dirichlet, the
  // frozen wall values (boundary cells relax toward the walls)
  double u0_min = u0.min(), u0_max = u0.max();
  if (bdp)
    for (const auto& axis_walls : bd.wall)
      for (const auto& side : axis_walls)
        for (double w : side) {
          u0_min = std::min(u0_min, w);
          u0_max = std::max(u0_max, w);
        }
  const double mp_tol = 1e-9 * std::max(u0_max - u0_min, 1e-300);

  // Plan a uniform dt so stored slices are equally spaced: take the stable
  // dt of the initial state (gradients only shrink for this monotone flux),
  // then round the step count up.
  double dt0 = stable_dt(u0, spec, cfg, 0.0, cfg.boundary, bdp);
  if (cfg.fixed_dt > 0.0) dt0 = std::min(cfg.fixed_dt, dt0);
  long nsteps = static_cast<long>(std::ceil(t_end / dt0 - 1e-12));
  if (nsteps < 1) nsteps = 1;
  const long stride =
      std::max(1L, static_cast<long>(std::ceil(
                       static_cast<double>(nsteps) /
                       std::max(1, cfg.max_stored_slices - 1))));
  // round up to a multiple of the storage stride so every stored slice --
  // including the final one -- is equally spaced; dt only shrinks
  nsteps = ((nsteps + stride - 1) / stride) * stride;
  const double dt = t_end / static_cast<double>(nsteps);

  Trajectory traj;
  traj.grid = &g;
  traj.times.push_back(0.0);
  traj.slices.push_back(u0.values);

  Field u = u0;
  for (long step = 0; step < nsteps; ++step) {
    const double t = static_cast<double>(step) * dt;
    const Field k1 = divergence_of_flux(u, spec, t, cfg.boundary, bdp);
    if (cfg.scheme == Scheme::ExplicitEuler) {
      parallel_for(g.size(), [&](std::size_t c) { u.values[c] += dt * k1[c]; });
    } else {
      Field mid(g);
      parallel_for(g.size(),
                   [&](std::size_t c) { mid[c] = u.values[c] + dt * k1[c]; });
      const Field k2 = divergence_of_flux(mid, spec, t + dt, cfg.boundary, bdp);
      parallel_for(g.size(), [&](std::size_t c) {
        u.values[c] += 0.5 * dt * (k1[c] + k2[c]);
      });
    }
    if (!u.finite())
      throw std::runtime_error("advance: non-finite value at step " +
                               std::to_string(step));
    if (cfg.boundary == BoundaryRule::DirichletFromInitial) {
      if (u.min() < u0_min - mp_tol || u.max() > u0_max + mp_tol)
        throw std::runtime_error(
            "advance: discrete maximum principle violated at step " +
            std::to_string(step) + " (min " + std::to_string(u.min()) + ", max " +
            std::to_string(u.max()) + ")");
    }
    traj.accepted_dt.push_back(dt);
    ++traj.steps_taken;
    if ((step + 1) % stride == 0 || step + 1 == nsteps) {
      traj.times.push_back(static_cast<double>(step + 1) * dt);
      traj.slices.push_back(u.values);
    }
  }
  return traj;
}

}  // namespace anisodiff
