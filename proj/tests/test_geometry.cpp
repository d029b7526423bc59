#include <doctest.h>

#include <cmath>
#include <random>

#include "anisodiff/geometry.hpp"

using namespace anisodiff;

TEST_CASE("anisotropic cube half-widths and measure") {
  const ExponentVector p({2, 2});
  AnisoCube k({0.0, 0.0}, 4.0, p);
  CHECK(k.half_width(0) == doctest::Approx(2.0).epsilon(1e-14));
  // oracle: |Q_4| = 2^2 * 4^{(2+2)/2} = 64
  StdCylinder q({0.0, 0.0}, 0.0, 4.0, p);
  CHECK(q.measure() == doctest::Approx(64.0).epsilon(1e-14));

  const ExponentVector p23({2, 3});
  AnisoCube k2({1.0, -1.0}, 8.0, p23);
  CHECK(k2.half_width(0) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));
  CHECK(k2.half_width(1) == doctest::Approx(2.0).epsilon(1e-14));
  // measure = 2^n rho^{n/pbar}; pbar = 2/(1/2+1/3) = 12/5
  CHECK(k2.measure() ==
        doctest::Approx(4.0 * std::pow(8.0, 2.0 / (12.0 / 5.0))).epsilon(1e-13));
}

TEST_CASE("standard cylinder time interval is open") {
  StdCylinder q({0.0, 0.0}, 1.0, 0.5, ExponentVector({2, 2}));
  CHECK(q.contains_time(0.75));
  CHECK_FALSE(q.contains_time(0.5));  // lower endpoint excluded
  CHECK_FALSE(q.contains_time(1.0));  // upper cap excluded
  std::vector<double> in{0.1, -0.2}, out{0.8, 0.0};
  CHECK(q.contains(in, 0.75));
  CHECK_FALSE(q.contains(out, 0.75));
}

TEST_CASE("intrinsic cylinder half-widths") {
  const ExponentVector p({2, 3});
  // oracle: M=8, rho=1, pbar = 12/5; axis 1 (p_i=3):
  // 8^{1/3} * 1^{...} = 2
  IntrinsicCylinder c({0.0, 0.0}, 0.0, 1.0, 8.0, p);
  CHECK(c.half_width(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(c.half_width(0) == doctest::Approx(1.0).epsilon(1e-14));  // 8^0 * 1
  CHECK(c.time_depth() == doctest::Approx(1.0).epsilon(1e-14));
  // time interval (s - rho^pbar, s]: upper endpoint included
  CHECK(c.contains_time(0.0));
  CHECK_FALSE(c.contains_time(-1.0));
  // M = 1 reduces to the standard spatial cube with radius rho^{pbar/p_i}
  IntrinsicCylinder c1({0.0, 0.0}, 0.0, 2.0, 1.0, p);
  const double pbar = p.harmonic_mean();
  CHECK(c1.half_width(0) == doctest::Approx(std::pow(2.0, pbar / 2.0)).epsilon(1e-14));
  CHECK(c1.half_width(1) == doctest::Approx(std::pow(2.0, pbar / 3.0)).epsilon(1e-14));
}

TEST_CASE("iteration schedules") {
  const ExponentVector p({2, 2});

  SUBCASE("shrink-out radii and levels") {
    IterationSchedule s(ScheduleMode::ShrinkOut, 1.0, 0.5, 1.0, p);
    // rho_j = 0.5 + 0.5/2^j: 1, 0.75, 0.625, ... -> 0.5
    CHECK(s.radius(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.radius(1) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(s.radius(2) == doctest::Approx(0.625).epsilon(1e-14));
    CHECK(s.radius(60) == doctest::Approx(0.5).epsilon(1e-12));
    // k_j = k - k/2^j: 0, 0.5, 0.75, ... -> k
    CHECK(s.level(0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(s.level(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.level(60) == doctest::Approx(1.0).epsilon(1e-12));
    // strictly decreasing radii, increasing levels
    for (int j = 0; j < 30; ++j) {
      CHECK(s.radius(j + 1) < s.radius(j));
      CHECK(s.level(j + 1) > s.level(j));
    }
    // intermediate radius sits between neighbours
    auto e = s.entry(3);
    CHECK(e.rho_tilde_j < s.radius(3));
    CHECK(e.rho_tilde_j > s.radius(4));
  }

  SUBCASE("grow-out radii") {
    IterationSchedule s(ScheduleMode::GrowOut, 1.0, 0.5, 2.0, p);
    CHECK(s.radius(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.radius(1) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(s.radius(60) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.level(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.level(60) == doctest::Approx(4.0).epsilon(1e-12));
  }

  SUBCASE("intrinsic shrink radii and levels") {
    IterationSchedule s(ScheduleMode::IntrinsicShrink, 1.0, 0.25, 4.0, p, {}, 0.0,
                        -1.0);
    CHECK(s.radius(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.radius(60) == doctest::Approx(1.0).epsilon(1e-12));
    // k_j = mu- + a M + (1-a) M / 2^j: j=0 -> -1 + 1 + 3 = 3
    CHECK(s.level(0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(s.level(60) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("nested cylinder inclusions and measure ratio") {
    // Q_{rho_{j+1}} subset Q_{rho~_j} subset Q_{rho_j}, and
    // |Q_{rho_{j+1}}| >= 2^{-(n+pbar)} |Q_{rho_j}| along ShrinkOut.
    const ExponentVector p23({2, 3});
    IterationSchedule s(ScheduleMode::ShrinkOut, 1.5, 0.5, 1.0, p23);
    const double pbar = p23.harmonic_mean();
    std::mt19937_64 rng(31);
    for (int j = 0; j < 10; ++j) {
      auto e = s.entry(j);
      StdCylinder qj({0, 0}, 0.0, e.rho_j, p23);
      StdCylinder qt({0, 0}, 0.0, e.rho_tilde_j, p23);
      StdCylinder qn({0, 0}, 0.0, s.radius(j + 1), p23);
      // random points of the inner cylinder lie in the outer one
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      std::uniform_real_distribution<double> ut(0.0, 1.0);
      for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x{u(rng) * qn.base.half_width(0),
                              u(rng) * qn.base.half_width(1)};
        const double t = qn.time_lo() + 1e-12 + ut(rng) * (qn.rho() - 2e-12);
        if (!qn.contains(x, t)) continue;
        CHECK(qt.contains(x, t));
        CHECK(qj.contains(x, t));
      }
      CHECK(qn.measure() >=
            std::pow(2.0, -(2.0 + pbar)) * qj.measure() - 1e-14);
    }
  }
}

TEST_CASE("intrinsic inflation exponent") {
  // p=(2,2): pbar/p_i = 1, need 1 + 2^-l <= 2 -> l = 0
  CHECK(intrinsic_inflation_exponent(ExponentVector({2, 2})) == 0);
  // p=(2,3): pbar = 12/5, pbar/p_i = {1.2, 0.8}; 2^{0.8} ~= 1.741 -> l = 1
  CHECK(intrinsic_inflation_exponent(ExponentVector({2, 3})) == 1);
  // check defining property for a few vectors
  for (auto pv : {std::vector<double>{2, 5}, {1.5, 1.9}, {2, 2, 3}}) {
    ExponentVector p(pv);
    const int l = intrinsic_inflation_exponent(p);
    const double pbar = p.harmonic_mean();
    for (int i = 0; i < p.n(); ++i) {
      CHECK(1.0 + std::pow(2.0, -l) <= std::pow(2.0, pbar / p[i]) + 1e-14);
      if (l > 0)
        CHECK_FALSE([&] {
          for (int k = 0; k < p.n(); ++k)
            if (!(1.0 + std::pow(2.0, -(l - 1)) <= std::pow(2.0, pbar / p[k])))
              return false;
          return true;
        }());
    }
  }
}

TEST_CASE("intrinsic box half width shrinks toward the intrinsic cube") {
  const ExponentVector p({2, 3});
  IterationSchedule s(ScheduleMode::IntrinsicShrink, 0.5, 0.5, 4.0, p);
  const int l = intrinsic_inflation_exponent(p);
  IntrinsicCylinder base({0, 0}, 0.0, 0.5, 4.0, p);
  for (int axis = 0; axis < 2; ++axis) {
    double prev = intrinsic_box_half_width(s, 0, l, axis);
    // j = 0 box fits inside the doubled cylinder's spatial cube
    IntrinsicCylinder twice({0, 0}, 0.0, 1.0, 4.0, p);
    CHECK(prev <= twice.half_width(axis) + 1e-14);
    for (int j = 1; j <= 12; ++j) {
      const double cur = intrinsic_box_half_width(s, j, l, axis);
      CHECK(cur < prev);
      CHECK(cur > base.half_width(axis) - 1e-14);
      prev = cur;
    }
  }
}

TEST_CASE("parabolic boundary distance") {
  Box dom{{-1, -1}, {1, 1}, 1.0};
  // rho = 0.25, p=(2,2): half-widths 0.5; centered cylinder at t0 = 0.5
  StdCylinder q({0, 0}, 0.5, 0.25, ExponentVector({2, 2}));
  CHECK(parabolic_boundary_distance(q, dom) == doctest::Approx(0.25).epsilon(1e-14));
  // poking out spatially
  StdCylinder q2({0.9, 0}, 0.5, 0.25, ExponentVector({2, 2}));
  CHECK(parabolic_boundary_distance(q2, dom) < 0.0);
  // poking out in time (time_lo < 0)
  StdCylinder q3({0, 0}, 0.1, 0.25, ExponentVector({2, 2}));
  CHECK(parabolic_boundary_distance(q3, dom) < 0.0);
}
