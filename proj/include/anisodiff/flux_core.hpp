#pragma once

// Exponent arithmetic, regime classification, and the degenerate
// anisotropic flux/potential
//
//   d/dt u = sum_i d/dx_i [ a_i(x,t) (|d/dx_i u| - delta_i)_+^{p_i - 1} sgn(d/dx_i u) ]
//
// together with the derived quantities (harmonic mean, Sobolev conjugate,
// admissible exponent range, supercritical/subcritical split) that the
// verification probes depend on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anisodiff {

/// Positive part (x)_+.
inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

/// pow for non-negative bases with the convention 0^0 = 1.
inline double pow_pos(double base, double expo) {
  if (base <= 0.0) return expo == 0.0 ? 1.0 : 0.0;
  return std::pow(base, expo);
}

/// Anisotropic growth exponents p = (p_1,...,p_n), each > 1, n >= 2.
class ExponentVector {
 public:
  explicit ExponentVector(std::vector<double> p) : p_(std::move(p)) {
    if (p_.size() < 2)
      throw std::invalid_argument("ExponentVector: need at least 2 exponents");
    for (double pi : p_)
      if (!(pi > 1.0))
        throw std::invalid_argument("ExponentVector: every exponent must be > 1");
  }

  int n() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[static_cast<size_t>(i)]; }
  const std::vector<double>& values() const { return p_; }

  /// Harmonic mean p-bar = n / sum(1/p_i).
  double harmonic_mean() const {
    double s = 0.0;
    for (double pi : p_) s += 1.0 / pi;
    return static_cast<double>(p_.size()) / s;
  }

  /// Largest exponent.
  double max_exponent() const { return *std::max_element(p_.begin(), p_.end()); }
  double min_exponent() const { return *std::min_element(p_.begin(), p_.end()); }

  /// P = max{2, max p_i}.
  double big_p() const { return std::max(2.0, max_exponent()); }

  /// q = p-bar (1 + 2/n).
  double q() const { return harmonic_mean() * (1.0 + 2.0 / n()); }

 private:
  std::vector<double> p_;
};

inline double harmonic_mean(const ExponentVector& p) { return p.harmonic_mean(); }

/// Sobolev conjugate n*l/(n-l), defined only for l < n.  For l >= n the
/// conjugate is a free choice and this refuses rather than picking one.
inline double sobolev_conjugate(double pbar, int n) {
  if (!(pbar < static_cast<double>(n)))
    throw std::domain_error("sobolev_conjugate: requires pbar < n");
  return static_cast<double>(n) * pbar / (static_cast<double>(n) - pbar);
}

/// Admissible range: every p_i < pbar*(1 + 2/n) and pbar < n.
inline bool validate_range(const ExponentVector& p) {
  const double bound = p.q();
  if (!(p.harmonic_mean() < static_cast<double>(p.n()))) return false;
  for (int i = 0; i < p.n(); ++i)
    if (!(p[i] < bound)) return false;
  return true;
}

/// omega(n,p) = P - (n/pbar) [pbar (1+2/n) - P]; equals P-2+n(P/pbar - 1).
inline double omega(const ExponentVector& p) {
  const double pbar = p.harmonic_mean();
  const double P = p.big_p();
  return P - (p.n() / pbar) * (p.q() - P);
}

/// Alternative printed form of omega; agrees with omega() to roundoff.
inline double omega_alt(const ExponentVector& p) {
  const double pbar = p.harmonic_mean();
  const double P = p.big_p();
  return P - 2.0 + p.n() * (P / pbar - 1.0);
}

enum class RegimeTag { Supercritical, Subcritical };

struct Regime {
  RegimeTag tag;
  std::optional<double> extra_integrability_m;  // required when Subcritical

  bool supercritical() const { return tag == RegimeTag::Supercritical; }
};

/// Supercritical iff pbar > 2n/(n+2); Subcritical otherwise, in which case
/// an integrability exponent m > (n/pbar)(2 - pbar) must be supplied.
inline Regime classify_regime(const ExponentVector& p,
                              std::optional<double> m = std::nullopt) {
  const int n = p.n();
  const double pbar = p.harmonic_mean();
  const double crit = 2.0 * n / (n + 2.0);
  if (pbar > crit) return Regime{RegimeTag::Supercritical, std::nullopt};
  const double m_min = (n / pbar) * (2.0 - pbar);
  if (!m.has_value() || !(*m > m_min))
    throw std::invalid_argument(
        "classify_regime: subcritical regime needs m > (n/pbar)(2-pbar) = " +
        std::to_string(m_min));
  return Regime{RegimeTag::Subcritical, m};
}

/// Degeneracy thresholds delta = (delta_1,...,delta_n), each >= 0.
class DegeneracyVector {
 public:
  explicit DegeneracyVector(std::vector<double> d) : d_(std::move(d)) {
    for (double di : d_)
      if (!(di >= 0.0))
        throw std::invalid_argument("DegeneracyVector: thresholds must be >= 0");
  }

  int n() const { return static_cast<int>(d_.size()); }
  double operator[](int i) const { return d_[static_cast<size_t>(i)]; }
  const std::vector<double>& values() const { return d_; }
  double max_threshold() const {
    return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end());
  }

 private:
  std::vector<double> d_;
};

/// Gamma = sum_i delta_i^{p_i}.
inline double gamma_threshold(const DegeneracyVector& d, const ExponentVector& p) {
  if (d.n() != p.n())
    throw std::invalid_argument("gamma_threshold: dimension mismatch");
  double g = 0.0;
  for (int i = 0; i < p.n(); ++i) g += pow_pos(d[i], p[i]);
  return g;
}

/// Directional flux a * (|g| - delta)_+^{p-1} * sgn(g).  Odd in g and
/// identically zero on |g| <= delta.
inline double flux(double g, double a, double p_i, double delta_i) {
  const double mag = positive_part(std::abs(g) - delta_i);
  if (mag == 0.0) return 0.0;
  const double f = a * std::pow(mag, p_i - 1.0);
  return g > 0.0 ? f : -f;
}

/// Named analytic coefficient families.  The equation only needs measurable
/// a_i in [1/Lambda, Lambda]; a grid cannot represent that generality, so
/// coefficients are restricted to these evaluable families.
enum class CoeffFamily { Constant, SeparableTrig, Checkerboard };

struct CoefficientField {
  CoeffFamily family = CoeffFamily::Constant;
  double lambda = 1.0;  // ellipticity ratio, >= 1

  double eval(int axis, std::span<const double> x, double t) const {
    const double lo = 1.0 / lambda;
    const double hi = lambda;
    const double mid = 0.5 * (lo + hi);
    const double amp = 0.45 * (hi - lo);  // stays strictly inside [lo, hi]
    switch (family) {
      case CoeffFamily::Constant:
        return mid;
      case CoeffFamily::SeparableTrig: {
        double s = std::sin(3.0 * x[static_cast<size_t>(axis % static_cast<int>(x.size()))] +
                            2.0 * t + 0.7 * axis);
        return mid + amp * s;
      }
      case CoeffFamily::Checkerboard: {
        long cell = 0;
        for (size_t i = 0; i < x.size(); ++i)
          cell += static_cast<long>(std::floor(4.0 * x[i]));
        cell += static_cast<long>(std::floor(8.0 * t));
        return (cell % 2 == 0) ? mid + amp : mid - amp;
      }
    }
    return mid;
  }
};

/// Rectangular space-time domain Omega x (0, T].
struct Box {
  std::vector<double> lo, hi;
  double t_end = 1.0;

  int n() const { return static_cast<int>(lo.size()); }
};

/// A full instance of the equation: exponents, thresholds, coefficients,
/// ellipticity ratio, and the space-time domain.
struct ProblemSpec {
  ExponentVector exponents;
  DegeneracyVector degeneracy;
  double lambda = 1.0;
  CoefficientField coeff;
  Box domain;

  ProblemSpec(ExponentVector p, DegeneracyVector d, double lam,
              CoefficientField c, Box dom)
      : exponents(std::move(p)),
        degeneracy(std::move(d)),
        lambda(lam),
        coeff(c),
        domain(std::move(dom)) {
    if (!(lambda >= 1.0))
      throw std::invalid_argument("ProblemSpec: lambda must be >= 1");
    if (degeneracy.n() != exponents.n() || domain.n() != exponents.n())
      throw std::invalid_argument("ProblemSpec: dimension mismatch");
    coeff.lambda = lambda;
  }

  int n() const { return exponents.n(); }
};

/// Potential F(x,t,xi) = sum_i a_i/p_i (|xi_i| - delta_i)_+^{p_i}.
/// Its partial derivative in xi_i is the directional flux.
inline double potential(std::span<const double> xi, std::span<const double> a,
                        const ProblemSpec& spec) {
  double f = 0.0;
  for (int i = 0; i < spec.n(); ++i) {
    const double mag =
        positive_part(std::abs(xi[static_cast<size_t>(i)]) - spec.degeneracy[i]);
    if (mag > 0.0)
      f += a[static_cast<size_t>(i)] / spec.exponents[i] *
           std::pow(mag, spec.exponents[i]);
  }
  return f;
}

}  // namespace anisodiff
