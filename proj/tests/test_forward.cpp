#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <rrmap/domain.hpp>
#include <rrmap/errors.hpp>
#include <rrmap/forward.hpp>
#include <rrmap/potentials.hpp>

#include "support.hpp"

using namespace rrmap;
using testsupport::kPi;

namespace {

BoundaryTrace random_trace(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BoundaryTrace t(g.spec);
  for (int j = 0; j < t.size(); ++j) t[j] = Complex(u(rng), 0.0);
  return t;
}

double dense_sigma_min(const SpMat& A) {
  Eigen::MatrixXd Ad(A);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Ad);
  return svd.singularValues().minCoeff();
}

} // namespace

TEST_CASE("assembled operator rows match the declared stencils") {
  Grid g = build_grid(8);
  const double h = g.spec.h;
  GridFunction v = sample_grid(g.spec, [](double x, double y) {
    return Complex(0.25 * x + y, 0.0);
  });
  const double E = -1.0;

  Eigen::MatrixXd dirichlet(assemble_operator(g, {v, E, 0.0}));
  for (int j = 0; j < g.spec.boundary_count(); ++j) {
    int b = g.spec.boundary_index(j);
    for (int c = 0; c < dirichlet.cols(); ++c) {
      double want = (c == b) ? 1.0 : 0.0;
      CHECK(dirichlet(b, c) == doctest::Approx(want).epsilon(1e-15));
    }
  }

  Eigen::MatrixXd neumann(assemble_operator(g, {v, E, kPi / 2}));
  for (int j = 0; j < g.spec.boundary_count(); ++j) {
    int b = g.spec.boundary_index(j);
    int i1 = g.boundary.inward1[j], i2 = g.boundary.inward2[j];
    CHECK(neumann(b, b) == doctest::Approx(-3.0 / (2 * h)).epsilon(1e-13));
    CHECK(neumann(b, i1) == doctest::Approx(2.0 / h).epsilon(1e-13));
    CHECK(neumann(b, i2) == doctest::Approx(-0.5 / h).epsilon(1e-13));
  }

  // Interior row away from the boundary: 4/h^2 + v - E on the diagonal,
  // -1/h^2 on the four neighbors.
  int k = g.spec.interior_index(3, 4);
  auto p = g.spec.point(k);
  CHECK(dirichlet(k, k) ==
        doctest::Approx(4.0 / (h * h) + v[k].real() - E).epsilon(1e-13));
  (void)p;
  for (int nb : {g.spec.interior_index(2, 4), g.spec.interior_index(4, 4),
                 g.spec.interior_index(3, 3), g.spec.interior_index(3, 5)})
    CHECK(dirichlet(k, nb) == doctest::Approx(-1.0 / (h * h)).epsilon(1e-13));
}

TEST_CASE("system matrix is identical for (v, E) and (v - E, 0)") {
  Grid g = build_grid(16);
  GridFunction v = make_potential(g, testsupport::bump_spec());
  const double E = -2.5, a = kPi / 5;
  SpMat A = assemble_operator(g, {v, E, a});
  GridFunction vs(g.spec);
  vs.values = v.values.array() - Complex(E, 0.0);
  SpMat B = assemble_operator(g, {vs, 0.0, a});
  Eigen::MatrixXd D = Eigen::MatrixXd(A) - Eigen::MatrixXd(B);
  CHECK(D.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("robin_solve reproduces harmonic fields the stencil resolves exactly") {
  Grid g = build_grid(16);
  GridFunction zero(g.spec);

  // Linear harmonic field, Dirichlet data.
  GridFunction lin = sample_grid(g.spec, [](double x, double y) {
    return Complex(x - y, 0.0);
  });
  SolveReport rep = robin_solve(g, {zero, 0.0, 0.0}, trace(g, lin));
  CHECK(rep.residual <= 1e-10);
  CHECK(!rep.near_singular);
  double worst = 0.0;
  for (int k = 0; k < lin.size(); ++k)
    worst = std::max(worst, std::abs(rep.solution[k] - lin[k]));
  CHECK(worst < 1e-11);

  // Zero data with a definite operator gives the zero field.
  SolveReport rep0 = robin_solve(g, {zero, -1.0, 0.0}, BoundaryTrace(g.spec));
  for (int k = 0; k < rep0.solution.size(); ++k)
    CHECK(std::abs(rep0.solution[k]) < 1e-14);
}

TEST_CASE("robin_solve is exact on the quadratic harmonic x^2 - y^2") {
  // The 5-point stencil annihilates quadratics exactly, so the whole ladder
  // sits at solver roundoff.
  for (int n : {16, 32, 64}) {
    Grid g = build_grid(n);
    GridFunction zero(g.spec);
    GridFunction quad = sample_grid(g.spec, [](double x, double y) {
      return Complex(x * x - y * y, 0.0);
    });
    SolveReport rep = robin_solve(g, {zero, 0.0, 0.0}, trace(g, quad));
    double worst = 0.0;
    for (int k = 0; k < quad.size(); ++k)
      worst = std::max(worst, std::abs(rep.solution[k] - quad[k]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("solved fields satisfy the prescribed Robin data") {
  Grid g = build_grid(24);
  GridFunction v = make_potential(g, testsupport::bump_spec());
  const double a = kPi / 3;
  BoundaryTrace f = random_trace(g, 99u);
  SolveReport rep = robin_solve(g, {v, -1.0, a}, f);
  BoundaryTrace got = robin_trace(g, rep.solution, a);
  double scale = 0.0, worst = 0.0;
  for (int j = 0; j < f.size(); ++j) {
    scale = std::max(scale, std::abs(f[j]));
    worst = std::max(worst, std::abs(got[j] - f[j]));
  }
  CHECK(worst <= 1e-10 * scale);
}

TEST_CASE("discrete maximum principle for the Dirichlet Laplace problem") {
  Grid g = build_grid(20);
  GridFunction zero(g.spec);
  BoundaryTrace f = random_trace(g, 7u);
  double lo = 1e300, hi = -1e300;
  for (int j = 0; j < f.size(); ++j) {
    lo = std::min(lo, f[j].real());
    hi = std::max(hi, f[j].real());
  }
  SolveReport rep = robin_solve(g, {zero, 0.0, 0.0}, f);
  for (int k = 0; k < g.spec.interior_count(); ++k) {
    CHECK(rep.solution[k].real() >= lo - 1e-12);
    CHECK(rep.solution[k].real() <= hi + 1e-12);
    CHECK(std::abs(rep.solution[k].imag()) < 1e-13);
  }
}

TEST_CASE("near-singular detection throws the spectral-condition error") {
  Grid g = build_grid(16);
  GridFunction zero(g.spec);
  // Pure Neumann Laplacian at E = 0 has the constant nullspace.
  RobinProblem neumann{zero, 0.0, kPi / 2};
  CHECK(RobinSolver(g, neumann).near_singular());
  CHECK_THROWS_AS((void)robin_solve(g, neumann, BoundaryTrace(g.spec)),
                  SpectralConditionError);
}

TEST_CASE("sigma_min matches a dense singular-value factorization") {
  Grid g = build_grid(16);
  GridFunction zero(g.spec);
  RobinProblem p{zero, -1.0, 0.0};
  double sigma = sigma_min(g, p);
  double dense = dense_sigma_min(assemble_operator(g, p));
  CHECK(sigma > 0.4);
  CHECK(sigma == doctest::Approx(dense).epsilon(1e-6));
  // Free function and solver method agree.
  CHECK(RobinSolver(g, p).sigma_min() == doctest::Approx(sigma).epsilon(1e-12));
}

TEST_CASE("sigma_min collapses at a discrete Dirichlet eigenvalue") {
  Grid g = build_grid(16);
  const double h = g.spec.h;
  // Smallest eigenvalue of the 5-point Dirichlet Laplacian on the square.
  const double eig = 8.0 / (h * h) * std::pow(std::sin(kPi * h / 2.0), 2);
  GridFunction zero(g.spec);
  RobinProblem p{zero, eig, 0.0};
  double sigma = sigma_min(g, p);
  CHECK(sigma < 1e-3);
  CHECK(dense_sigma_min(assemble_operator(g, p)) < 1e-3);
  CHECK(RobinSolver(g, p).near_singular());
}

TEST_CASE("smallest singular value is invariant under unknown reordering") {
  Grid g = build_grid(16);
  GridFunction v = make_potential(g, testsupport::center_bump_spec());
  Eigen::MatrixXd A(assemble_operator(g, {v, -1.0, kPi / 6}));
  const int m = static_cast<int>(A.rows());
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(1234u);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) P(i, perm[i]) = 1.0;
  Eigen::MatrixXd B = P * A * P.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> sa(A), sb(B);
  CHECK(sa.singularValues().minCoeff() ==
        doctest::Approx(sb.singularValues().minCoeff()).epsilon(1e-10));
}

TEST_CASE("sigma_min throws when the iteration budget is exhausted") {
  Grid g = build_grid(16);
  GridFunction zero(g.spec);
  SigmaOptions opt;
  opt.max_iterations = 1;
  CHECK_THROWS_AS((void)sigma_min(g, {zero, -1.0, 0.0}, opt), ConvergenceError);
}

TEST_CASE("eig_sweep flags nothing for the definite operator at E = -1") {
  Grid g = build_grid(16);
  GridFunction zero(g.spec);
  std::vector<double> alphas(64);
  for (int i = 0; i < 64; ++i) alphas[i] = kPi * i / 64;
  EigSweepResult r = eig_sweep(g, zero, -1.0, alphas);
  CHECK(r.points.size() == alphas.size());
  CHECK(r.flagged.size() <= 4);
  CHECK(r.flagged.empty());
  for (const auto& pt : r.points) CHECK(pt.sigma > 1e-3);
}

TEST_CASE("eig_sweep pins the Neumann nullspace at E = 0") {
  Grid g = build_grid(16);
  GridFunction zero(g.spec);
  std::vector<double> alphas(64);
  for (int i = 0; i < 64; ++i) alphas[i] = kPi * i / 64;
  EigSweepResult r = eig_sweep(g, zero, 0.0, alphas);
  REQUIRE(r.flagged.size() == 1);
  CHECK(std::abs(r.flagged[0].alpha - kPi / 2) <= 1e-6);
  CHECK(r.flagged[0].sigma < 1e-6);
}

TEST_CASE("eig_sweep commutes with the energy shift exactly") {
  Grid g = build_grid(16);
  GridFunction v = make_potential(g, testsupport::bump_spec());
  const double E = 0.7;
  GridFunction vs(g.spec);
  vs.values = v.values.array() - Complex(E, 0.0);
  std::vector<double> alphas(32);
  for (int i = 0; i < 32; ++i) alphas[i] = kPi * i / 32;
  EigSweepResult a = eig_sweep(g, v, E, alphas);
  EigSweepResult b = eig_sweep(g, vs, 0.0, alphas);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].sigma == b.points[i].sigma);
    CHECK(a.points[i].flagged == b.points[i].flagged);
  }
  REQUIRE(a.flagged.size() == b.flagged.size());
  for (std::size_t i = 0; i < a.flagged.size(); ++i)
    CHECK(a.flagged[i].alpha == b.flagged[i].alpha);
}

TEST_CASE("sigma along the sweep becomes continuous under alpha refinement") {
  Grid g = build_grid(16);
  GridFunction zero(g.spec);
  std::vector<double> jumps;
  for (int m : {64, 128, 256}) {
    std::vector<double> alphas(m);
    for (int i = 0; i < m; ++i) alphas[i] = kPi * i / m;
    EigSweepResult r = eig_sweep(g, zero, -1.0, alphas);
    double jump = 0.0;
    for (std::size_t i = 1; i < r.points.size(); ++i)
      jump = std::max(jump,
                      std::abs(r.points[i].sigma - r.points[i - 1].sigma));
    jumps.push_back(jump);
  }
  CHECK(testsupport::decreasing(jumps));
}
