#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <rrmap/cgo2d.hpp>
#include <rrmap/domain.hpp>
#include <rrmap/errors.hpp>
#include <rrmap/forward.hpp>
#include <rrmap/impedance.hpp>
#include <rrmap/potentials.hpp>

#include "support.hpp"

using namespace rrmap;
using testsupport::kPi;

namespace {

GridFunction random_interior(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction f(g.spec);
  for (int k = 0; k < g.spec.interior_count(); ++k)
    f[k] = Complex(u(rng), u(rng));
  return f;
}

double sup_abs(const GridFunction& f) {
  double m = 0.0;
  for (int k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k]));
  return m;
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

CgoParams params_at(Complex lambda, Complex z0 = Complex(0.5, 0.5)) {
  CgoParams p;
  p.z0 = z0;
  p.lambda = lambda;
  return p;
}

} // namespace

TEST_CASE("phase factor is unimodular and centered") {
  Grid g = build_grid(24);
  GridFunction f0 = phase_F(g, Complex(0.5, 0.5), Complex(0.0, 0.0));
  for (int k = 0; k < f0.size(); ++k) CHECK(f0[k] == Complex(1.0, 0.0));

  Complex z0(0.4, 0.55), lam(37.0, 11.0);
  GridFunction f = phase_F(g, z0, lam);
  double worst = 0.0;
  for (int k = 0; k < f.size(); ++k)
    worst = std::max(worst, std::abs(std::abs(f[k]) - 1.0));
  CHECK(worst <= 1e-14);

  // Node sitting exactly at z0 carries phase 1.
  Grid gc = build_grid(15);
  int center = gc.spec.interior_index(7, 7);
  GridFunction fc = phase_F(gc, gc.spec.point_c(center), Complex(50.0, 3.0));
  CHECK(std::abs(fc[center] - Complex(1.0, 0.0)) <= 1e-14);
}

TEST_CASE("Cauchy transform of the disk indicator matches the closed form") {
  // Inside the disk of radius R at c, T(1_disk)(z) = -conj(z - c).
  const Complex c(0.5, 0.5);
  const double R = 0.3;
  std::vector<double> errs;
  for (int n : {32, 64}) {
    Grid g = build_grid(n);
    GridFunction u(g.spec);
    for (int k = 0; k < g.spec.interior_count(); ++k)
      u[k] = std::abs(g.spec.point_c(k) - c) < R ? Complex(1.0, 0.0)
                                                 : Complex(0.0, 0.0);
    GridFunction Tu = cauchy_T(g, u);
    double worst = 0.0;
    for (int k = 0; k < g.spec.interior_count(); ++k) {
      Complex z = g.spec.point_c(k);
      if (std::abs(z - c) > 0.2) continue;
      worst = std::max(worst, std::abs(Tu[k] + std::conj(z - c)));
    }
    errs.push_back(worst);
  }
  CHECK(errs[0] <= 3e-3);
  CHECK(errs[1] <= 1e-3);
  CHECK(testsupport::decreasing(errs));

  GridFunction zero(build_grid(16).spec);
  Grid g16 = build_grid(16);
  CHECK(sup_abs(cauchy_T(g16, zero)) == 0.0);
}

TEST_CASE("discrete dbar inverts the Cauchy transform on smooth fields") {
  std::vector<double> errs;
  for (int n : {32, 64}) {
    Grid g = build_grid(n);
    GridFunction u = make_potential(g, testsupport::center_bump_spec());
    GridFunction Tu = cauchy_T(g, u);
    const double h = g.spec.h;
    double worst = 0.0;
    for (int iy = 1; iy < n - 1; ++iy)
      for (int ix = 1; ix < n - 1; ++ix) {
        Complex dx = (Tu[g.spec.interior_index(ix + 1, iy)] -
                      Tu[g.spec.interior_index(ix - 1, iy)]) /
                     (2 * h);
        Complex dy = (Tu[g.spec.interior_index(ix, iy + 1)] -
                      Tu[g.spec.interior_index(ix, iy - 1)]) /
                     (2 * h);
        Complex dbar = 0.5 * (dx + Complex(0.0, 1.0) * dy);
        worst = std::max(worst,
                         std::abs(dbar - u[g.spec.interior_index(ix, iy)]));
      }
    errs.push_back(worst);
  }
  CHECK(testsupport::decreasing(errs));
  CHECK(errs.back() <= 2e-2);
}

TEST_CASE("Beurling operator matches the z-derivative of the Cauchy transform") {
  Grid g0 = build_grid(16);
  GridFunction zero(g0.spec);
  CHECK(sup_abs(beurling_Pi(g0, zero)) == 0.0);

  std::vector<double> errs;
  for (int n : {32, 64}) {
    Grid g = build_grid(n);
    GridFunction u = make_potential(g, testsupport::center_bump_spec());
    GridFunction Tu = cauchy_T(g, u);
    GridFunction Pu = beurling_Pi(g, u);
    const double h = g.spec.h;
    double worst = 0.0;
    for (int iy = 1; iy < n - 1; ++iy)
      for (int ix = 1; ix < n - 1; ++ix) {
        Complex dx = (Tu[g.spec.interior_index(ix + 1, iy)] -
                      Tu[g.spec.interior_index(ix - 1, iy)]) /
                     (2 * h);
        Complex dy = (Tu[g.spec.interior_index(ix, iy + 1)] -
                      Tu[g.spec.interior_index(ix, iy - 1)]) /
                     (2 * h);
        Complex dz = 0.5 * (dx - Complex(0.0, 1.0) * dy);
        worst = std::max(worst,
                         std::abs(dz - Pu[g.spec.interior_index(ix, iy)]));
      }
    errs.push_back(worst);
  }
  CHECK(testsupport::decreasing(errs));
  CHECK(errs.back() <= 1e-2);

  // Linearity.
  Grid g = build_grid(16);
  GridFunction a = random_interior(g, 3u), b = random_interior(g, 4u);
  GridFunction comb(g.spec);
  comb.values = Complex(2.0, 1.0) * a.values + Complex(-0.5, 0.25) * b.values;
  GridFunction lhs = beurling_Pi(g, comb);
  GridFunction ra = beurling_Pi(g, a), rb = beurling_Pi(g, b);
  double worst = 0.0;
  for (int k = 0; k < lhs.size(); ++k)
    worst = std::max(worst, std::abs(lhs[k] - (Complex(2.0, 1.0) * ra[k] +
                                               Complex(-0.5, 0.25) * rb[k])));
  CHECK(worst <= 1e-12);
}

TEST_CASE("phased conjugate transform reduces to the plain one at lambda 0") {
  Grid g = build_grid(20);
  GridFunction u = random_interior(g, 11u);
  GridFunction plain = cauchy_Tbar(g, u);
  GridFunction phased = cauchy_Tbar(g, u, Complex(0.5, 0.5), Complex(0.0, 0.0));
  CHECK(sup_diff(plain, phased) == 0.0);
}

TEST_CASE("phased conjugate transform obeys the absolute-kernel bound") {
  Grid g = build_grid(24);
  GridFunction u = random_interior(g, 12u);
  GridFunction w = cauchy_Tbar(g, u, Complex(0.45, 0.5), Complex(25.0, 7.0));
  const double h = g.spec.h;
  double worst = 0.0;
  for (int t = 0; t < g.spec.interior_count(); ++t) {
    Complex zt = g.spec.point_c(t);
    double bound = 0.0;
    for (int s = 0; s < g.spec.interior_count(); ++s) {
      if (s == t) continue;
      bound += std::abs(u[s]) / std::abs(g.spec.point_c(s) - zt);
    }
    bound *= h * h / kPi;
    worst = std::max(worst, std::abs(w[t]) - bound);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("phased conjugate transform matches the direct phased sum") {
  Grid g = build_grid(16);
  GridFunction u = random_interior(g, 13u);
  const Complex z0(0.5, 0.5), lam(40.0, 0.0);
  GridFunction got = cauchy_Tbar(g, u, z0, lam);
  GridFunction Fp = phase_F(g, z0, lam);
  GridFunction Fm = phase_F(g, z0, -lam);
  const double h = g.spec.h;
  double worst = 0.0;
  for (int t = 0; t < g.spec.interior_count(); ++t) {
    Complex zt = g.spec.point_c(t);
    Complex acc(0.0, 0.0);
    for (int s = 0; s < g.spec.interior_count(); ++s) {
      if (s == t) continue;
      acc += Fp[s] * u[s] / std::conj(g.spec.point_c(s) - zt);
    }
    Complex want = -(h * h / kPi) * Fm[t] * acc;
    worst = std::max(worst, std::abs(got[t] - want));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("phased conjugate transform decays in lambda on smooth input") {
  Grid g = build_grid(320);
  PotentialSpec wide;
  wide.family = PotentialFamily::gaussian_bump;
  wide.centers = {{0.5, 0.5}};
  wide.amplitudes = {1.0};
  wide.widths = {0.35};
  wide.margin = 0.05;
  GridFunction u = make_potential(g, wide);
  std::vector<double> sups;
  std::vector<double> lams = {10.0, 40.0, 160.0};
  for (double lam : lams)
    sups.push_back(
        sup_abs(cauchy_Tbar(g, u, Complex(0.5, 0.5), Complex(lam, 0.0))));
  CHECK(testsupport::decreasing(sups));
  double slope = (std::log(sups.back()) - std::log(sups.front())) /
                 (std::log(lams.back()) - std::log(lams.front()));
  // Stationary-phase decay; the ideal -1/2 is masked by the slowly varying
  // log factor at these frequencies.
  CHECK(slope <= -0.35);
}

TEST_CASE("amplitude equation solutions") {
  SUBCASE("zero potential gives the constant amplitude immediately") {
    Grid g = build_grid(24);
    GridFunction zero(g.spec);
    CgoSolution sol = mu_solve(g, zero, params_at(Complex(20.0, 0.0)));
    CHECK(sol.converged);
    CHECK(sol.iterations <= 2);
    double worst = 0.0;
    for (int k = 0; k < sol.mu.size(); ++k)
      worst = std::max(worst, std::abs(sol.mu[k] - Complex(1.0, 0.0)));
    CHECK(worst == 0.0);
  }

  SUBCASE("amplitude approaches 1 as lambda grows") {
    Grid g = build_grid(32);
    GridFunction v = make_potential(g, testsupport::bump_spec(0.5));
    CgoSolution s10 = mu_solve(g, v, params_at(Complex(10.0, 0.0)));
    CgoSolution s40 = mu_solve(g, v, params_at(Complex(40.0, 0.0)));
    REQUIRE(s10.converged);
    REQUIRE(s40.converged);
    GridFunction one(g.spec, Complex(1.0, 0.0));
    CHECK(sup_diff(s40.mu, one) < sup_diff(s10.mu, one));
  }

  SUBCASE("first-order term dominates quadratically in the amplitude") {
    Grid g = build_grid(32);
    CgoParams p = params_at(Complex(40.0, 0.0));
    std::vector<double> remainders;
    for (double amp : {0.5, 0.25}) {
      GridFunction v = make_potential(g, testsupport::bump_spec(amp));
      CgoSolution sol = mu_solve(g, v, p);
      REQUIRE(sol.converged);
      // Remainder after subtracting the first term of the series.
      GridFunction tb = cauchy_Tbar(g, v, p.z0, p.lambda);
      GridFunction first = cauchy_T(g, tb);
      double worst = 0.0;
      for (int k = 0; k < sol.mu.size(); ++k)
        worst = std::max(worst, std::abs(sol.mu[k] - Complex(1.0, 0.0) -
                                         0.25 * first[k]));
      remainders.push_back(worst);
    }
    double ratio = remainders[0] / remainders[1];
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
  }

  SUBCASE("budget and hypothesis guards") {
    Grid g = build_grid(16);
    GridFunction v = make_potential(g, testsupport::bump_spec());
    CgoParams low = params_at(Complex(0.5, 0.0));
    CHECK_THROWS_AS((void)mu_solve(g, v, low), ConfigError);

    CgoParams edge = params_at(Complex(20.0, 0.0), Complex(g.spec.h, g.spec.h));
    CHECK_THROWS_AS((void)mu_solve(g, v, edge), ConfigError);

    GridFunction ones(g.spec, Complex(1.0, 0.0));
    CHECK_THROWS_AS((void)mu_solve(g, ones, params_at(Complex(20.0, 0.0))),
                    ConfigError);
  }
}

TEST_CASE("field assembly from the amplitude") {
  Grid g = build_grid(15);
  GridFunction zero(g.spec);
  int center = g.spec.interior_index(7, 7);
  Complex z0 = g.spec.point_c(center);
  CgoParams p = params_at(Complex(12.0, 0.0), z0);
  CgoSolution sol = mu_solve(g, zero, p);
  GridFunction psi = psi_from_mu(g, sol, p);

  // With mu = 1 the field is the bare growth factor.
  double worst = 0.0;
  for (int k = 0; k < psi.size(); ++k) {
    Complex z = g.spec.point_c(k);
    worst = std::max(worst,
                     std::abs(psi[k] - std::exp(p.lambda * (z - z0) * (z - z0))));
  }
  CHECK(worst <= 1e-12);
  CHECK(std::abs(psi[center] - sol.mu[center]) == 0.0);

  CgoParams hot = params_at(Complex(3000.0, 0.0), z0);
  CgoSolution hot_sol = mu_solve(g, zero, hot);
  CHECK_THROWS_AS((void)psi_from_mu(g, hot_sol, hot), RangeError);
}

TEST_CASE("conjugate field for real potentials") {
  Grid g = build_grid(24);
  GridFunction v = make_potential(g, testsupport::bump_spec());
  CgoParams p = params_at(Complex(15.0, 0.0));
  CgoSolution sol = mu_solve(g, v, p);
  GridFunction psi = psi_from_mu(g, sol, p);
  GridFunction tpsi = psi_tilde(g, sol, p);
  double worst = 0.0;
  for (int k = 0; k < psi.size(); ++k)
    worst = std::max(worst, std::abs(tpsi[k] - std::conj(psi[k])));
  CHECK(worst == 0.0);

  GridFunction vc = v;
  vc[g.spec.interior_index(12, 12)] += Complex(0.0, 0.05);
  CgoSolution solc = mu_solve(g, vc, p);
  CHECK(!solc.potential_is_real);
  CHECK_THROWS_AS((void)psi_tilde(g, solc, p), UnsupportedModeError);
}

TEST_CASE("field satisfies the equation near the phase center") {
  std::vector<double> errs;
  for (int n : {32, 64}) {
    Grid g = build_grid(n);
    GridFunction v = make_potential(g, testsupport::bump_spec());
    CgoParams p = params_at(Complex(8.0, 0.0));
    CgoSolution sol = mu_solve(g, v, p);
    GridFunction psi = psi_from_mu(g, sol, p);
    const double h = g.spec.h;
    double worst = 0.0, scale = 0.0;
    for (int iy = 1; iy < n - 1; ++iy)
      for (int ix = 1; ix < n - 1; ++ix) {
        int k = g.spec.interior_index(ix, iy);
        if (std::abs(g.spec.point_c(k) - p.z0) > 0.15) continue;
        Complex lap = (psi[g.spec.interior_index(ix + 1, iy)] +
                       psi[g.spec.interior_index(ix - 1, iy)] +
                       psi[g.spec.interior_index(ix, iy + 1)] +
                       psi[g.spec.interior_index(ix, iy - 1)] -
                       4.0 * psi[k]) /
                      (h * h);
        worst = std::max(worst, std::abs(-lap + v[k] * psi[k]));
        scale = std::max(scale, std::abs(psi[k]) / (h * h));
      }
    errs.push_back(worst / scale);
  }
  CHECK(testsupport::decreasing(errs));
  CHECK(errs.back() <= 0.2);
}

TEST_CASE("volume pairing") {
  Grid g = build_grid(32);
  GridFunction zero(g.spec);
  GridFunction v = make_potential(g, testsupport::bump_spec());
  CgoParams p = params_at(Complex(20.0, 0.0));

  CHECK(delta_h_volume(g, v, v, p) == Complex(0.0, 0.0));

  // Independent accumulation for a vanishing first potential: the conjugate
  // amplitude is 1, so the pairing is the phased moment of v mu.
  CgoSolution sol = mu_solve(g, v, p);
  GridFunction F = phase_F(g, p.z0, p.lambda);
  Complex want(0.0, 0.0);
  const double h = g.spec.h;
  for (int k = 0; k < g.spec.interior_count(); ++k)
    want += F[k] * v[k] * sol.mu[k] * (h * h);
  Complex got = delta_h_volume(g, zero, v, p);
  CHECK(std::abs(got - want) <= 1e-13 * std::abs(want));

  // Swapping potentials and negating lambda conjugates and negates the value.
  GridFunction v2 = make_potential(g, testsupport::center_bump_spec(0.7));
  CgoParams pneg = params_at(-p.lambda);
  Complex fwd = delta_h_volume(g, v, v2, p);
  Complex swp = delta_h_volume(g, v2, v, pneg);
  CHECK(std::abs(swp + std::conj(fwd)) <= 1e-15);
}

TEST_CASE("boundary pairing agrees with the volume pairing") {
  const double E = 0.0;
  CgoParams p = params_at(Complex(20.0, 0.0));

  SUBCASE("equal maps pair to zero") {
    Grid g = build_grid(16);
    GridFunction v = make_potential(g, testsupport::bump_spec());
    BoundaryOperator M = assemble_map(g, {v, E, kPi / 4});
    auto [t1, t2] = delta_h_boundary_traces(g, v, v, E, kPi / 4, p);
    CHECK(delta_h_boundary(M, M, t1, t2) == Complex(0.0, 0.0));
  }

  SUBCASE("difference from the volume value refines away") {
    std::vector<double> gap;
    for (int n : {16, 32, 48}) {
      Grid g = build_grid(n);
      GridFunction zero(g.spec);
      GridFunction v = make_potential(g, testsupport::bump_spec());
      Complex vol = delta_h_volume(g, zero, v, p);
      BoundaryOperator M1 = assemble_map(g, {zero, E, kPi / 4});
      BoundaryOperator M2 = assemble_map(g, {v, E, kPi / 4});
      auto [t1, t2] = delta_h_boundary_traces(g, zero, v, E, kPi / 4, p);
      gap.push_back(std::abs(delta_h_boundary(M1, M2, t1, t2) - vol));
    }
    CHECK(testsupport::decreasing(gap));
  }

  SUBCASE("value is stable across alpha") {
    Grid g = build_grid(48);
    GridFunction zero(g.spec);
    GridFunction v = make_potential(g, testsupport::bump_spec());
    Complex vol = delta_h_volume(g, zero, v, p);
    for (double a : {kPi / 6, kPi / 4, kPi / 3}) {
      BoundaryOperator M1 = assemble_map(g, {zero, E, a});
      BoundaryOperator M2 = assemble_map(g, {v, E, a});
      auto [t1, t2] = delta_h_boundary_traces(g, zero, v, E, a, p);
      CHECK(std::abs(delta_h_boundary(M1, M2, t1, t2) - vol) <= 5e-3);
    }
  }
}

TEST_CASE("point estimate basics") {
  PointEstimate zero = reconstruct_point(Complex(0.0, 0.0), Complex(50.0, 0.0));
  CHECK(zero.value == 0.0);
  CHECK(zero.imag_diagnostic == 0.0);

  Complex dh(0.3, -0.1), lam(40.0, 0.0);
  PointEstimate one = reconstruct_point(dh, lam);
  PointEstimate two = reconstruct_point(2.0 * dh, lam);
  CHECK(two.value == doctest::Approx(2.0 * one.value).epsilon(1e-15));
  CHECK(one.value ==
        doctest::Approx(2.0 / kPi * 40.0 * dh.real()).epsilon(1e-15));
}

TEST_CASE("pointwise estimate converges at the phase center") {
  Grid g = build_grid(256);
  GridFunction zero(g.spec);
  GridFunction v = make_potential(g, testsupport::center_bump_spec());
  const Complex z0(0.5, 0.5);
  std::vector<double> errs;
  for (double lam : {20.0, 80.0, 320.0}) {
    CgoParams p = params_at(Complex(lam, 0.0), z0);
    Complex dh = delta_h_volume(g, zero, v, p);
    PointEstimate est = reconstruct_point(dh, p.lambda);
    double truth = interpolate(g, v, 0.5, 0.5).real();
    errs.push_back(std::abs(truth - est.value));
  }
  CHECK(testsupport::decreasing(errs));
  CHECK(errs.back() <= 1e-2);
}

TEST_CASE("rate table fits the laddered decay") {
  SUBCASE("identical potentials produce a zero table") {
    Grid g = build_grid(24);
    GridFunction v = make_potential(g, testsupport::bump_spec());
    RateTable t = rate_check(g, {Complex(0.5, 0.5)}, {20.0, 40.0}, v, v,
                             params_at(Complex(20.0, 0.0)));
    for (const auto& rec : t.records) CHECK(rec.err == 0.0);
    for (const auto& row : t.rows) CHECK(row.max_err == 0.0);
  }

  SUBCASE("bump pair decays faster than the guaranteed envelope") {
    Grid g = build_grid(48);
    GridFunction zero(g.spec);
    GridFunction v = make_potential(g, testsupport::center_bump_spec());
    RateTable t = rate_check(g, {Complex(0.5, 0.5)}, {20.0, 40.0, 80.0, 160.0},
                             zero, v, params_at(Complex(20.0, 0.0)));
    REQUIRE(t.rows.size() == 4);
    CHECK(t.fit_p >= 0.5);
    CHECK(t.fit_p <= 5.0);
  }

  SUBCASE("error at fixed lambda decreases under grid refinement") {
    std::vector<double> errs;
    for (int n : {32, 48, 64}) {
      Grid g = build_grid(n);
      GridFunction zero(g.spec);
      GridFunction v = make_potential(g, testsupport::center_bump_spec());
      CgoParams p = params_at(Complex(160.0, 0.0));
      Complex dh = delta_h_volume(g, zero, v, p);
      double truth = interpolate(g, v, 0.5, 0.5).real();
      errs.push_back(std::abs(truth - reconstruct_point(dh, p.lambda).value));
    }
    CHECK(testsupport::decreasing(errs));
  }
}

TEST_CASE("bilinear interpolation reproduces nodal and cell-mean values") {
  Grid g = build_grid(16);
  GridFunction f = sample_grid(g.spec, [](double x, double y) {
    return Complex(x * x + 2 * y, x - y);
  });
  int k = g.spec.interior_index(5, 8);
  auto pt = g.spec.point(k);
  CHECK(std::abs(interpolate(g, f, pt[0], pt[1]) - f[k]) <= 1e-14);

  // Cell-center value is the average of the four surrounding nodes.
  const double h = g.spec.h;
  Complex mid = interpolate(g, f, pt[0] + h / 2, pt[1] + h / 2);
  Complex avg = 0.25 * (f[g.spec.interior_index(5, 8)] +
                        f[g.spec.interior_index(6, 8)] +
                        f[g.spec.interior_index(5, 9)] +
                        f[g.spec.interior_index(6, 9)]);
  CHECK(std::abs(mid - avg) <= 1e-14);
}
