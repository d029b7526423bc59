#pragma once

// Rectangular cell-centered grids, scalar fields on them, and stored
// space-time trajectories.  Fields hold one value per cell center; slices
// of a trajectory live at strictly increasing times.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "anisodiff/flux_core.hpp"

namespace anisodiff {

/// Uniform cell-centered grid over a rectangular box.
struct Grid {
  std::vector<double> lo, hi;
  std::vector<int> counts;
  std::vector<double> h;        // cell sizes per axis
  std::vector<std::size_t> stride;  // row-major strides

  Grid(std::vector<double> lo_, std::vector<double> hi_, std::vector<int> counts_)
      : lo(std::move(lo_)), hi(std::move(hi_)), counts(std::move(counts_)) {
    if (lo.size() != hi.size() || lo.size() != counts.size() || lo.empty())
      throw std::invalid_argument("Grid: dimension mismatch");
    h.resize(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (counts[i] < 2) throw std::invalid_argument("Grid: need >= 2 cells per axis");
      if (!(hi[i] > lo[i])) throw std::invalid_argument("Grid: empty extent");
      h[i] = (hi[i] - lo[i]) / counts[i];
    }
    stride.resize(lo.size());
    std::size_t s = 1;
    for (std::size_t i = lo.size(); i-- > 0;) {
      stride[i] = s;
      s *= static_cast<std::size_t>(counts[i]);
    }
  }

  int n() const { return static_cast<int>(lo.size()); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int c : counts) s *= static_cast<std::size_t>(c);
    return s;
  }

  double cell_volume() const {
    double v = 1.0;
    for (double hi_ : h) v *= hi_;
    return v;
  }

  std::size_t flat(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < idx.size(); ++i)
      f += static_cast<std::size_t>(idx[i]) * stride[i];
    return f;
  }

  std::vector<int> unflat(std::size_t f) const {
    std::vector<int> idx(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      idx[i] = static_cast<int>(f / stride[i]);
      f %= stride[i];
    }
    return idx;
  }

  double center(int axis, int i) const {
    return lo[static_cast<size_t>(axis)] + (i + 0.5) * h[static_cast<size_t>(axis)];
  }

  std::vector<double> cell_center(std::size_t f) const {
    const std::vector<int> idx = unflat(f);
    std::vector<double> x(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i)
      x[i] = center(static_cast<int>(i), idx[i]);
    return x;
  }
};

/// Scalar field at cell centers.
struct Field {
  const Grid* grid = nullptr;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0)
      : grid(&g), values(g.size(), fill) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  double min() const {
    double m = values[0];
    for (double v : values) m = std::min(m, v);
    return m;
  }
  double max() const {
    double m = values[0];
    for (double v : values) m = std::max(m, v);
    return m;
  }
  bool finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

template <typename Fn>
Field make_field(const Grid& g, Fn&& fn) {
  Field f(g);
  for (std::size_t c = 0; c < g.size(); ++c) f[c] = fn(g.cell_center(c));
  return f;
}

/// Stored trajectory: slices at strictly increasing times (slice 0 is the
/// initial data at t = 0 unless stated otherwise).
struct Trajectory {
  const Grid* grid = nullptr;
  std::vector<double> times;
  std::vector<std::vector<double>> slices;
  std::vector<double> accepted_dt;  // every accepted step, even unstored ones
  int steps_taken = 0;

  int num_slices() const { return static_cast<int>(times.size()); }

  Field slice(int k) const {
    Field f(*grid);
    f.values = slices[static_cast<size_t>(k)];
    return f;
  }

  /// Uniform stored spacing; throws if slices are not equally spaced.
  double slice_spacing() const {
    if (times.size() < 2) throw std::runtime_error("Trajectory: fewer than 2 slices");
    const double d = times[1] - times[0];
    for (std::size_t k = 2; k < times.size(); ++k)
      if (std::abs((times[k] - times[k - 1]) - d) > 1e-9 * std::max(1.0, std::abs(d)))
        throw std::runtime_error("Trajectory: slices not uniformly spaced");
    return d;
  }

  /// Index of the last stored slice with time <= t (cell-in-time rule:
  /// slice k represents time times[k]).
  int slice_at(double t) const {
    int best = -1;
    for (std::size_t k = 0; k < times.size(); ++k)
      if (times[k] <= t + 1e-14) best = static_cast<int>(k);
    return best;
  }
};

/// Binary field dump: header (int64 n, int64 counts[n], f64 h[n], f64 time),
/// payload row-major float64, little-endian (native on all supported hosts).
inline void write_field_binary(const std::string& path, const Grid& g,
                               const std::vector<double>& values, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field_binary: cannot open " + path);
  const std::int64_t n = g.n();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (int c : g.counts) {
    const std::int64_t cc = c;
    out.write(reinterpret_cast<const char*>(&cc), sizeof cc);
  }
  for (double hv : g.h) out.write(reinterpret_cast<const char*>(&hv), sizeof hv);
  out.write(reinterpret_cast<const char*>(&time), sizeof time);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

/// CSV dump: one row per cell — indices, coordinates, value.
inline void write_field_csv(const std::string& path, const Grid& g,
                            const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
  for (int i = 0; i < g.n(); ++i) out << "i" << i << ",";
  for (int i = 0; i < g.n(); ++i) out << "x" << i << ",";
  out << "value\n";
  char buf[32];
  for (std::size_t c = 0; c < g.size(); ++c) {
    const std::vector<int> idx = g.unflat(c);
    for (int v : idx) out << v << ",";
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", g.center(static_cast<int>(i), idx[i]));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", values[c]);
    out << buf << "\n";
  }
}

}  // namespace anisodiff
