#include "rrmap/impedance.hpp"

#include <cmath>
#include <future>
#include <vector>

namespace rrmap {

namespace {
constexpr double kHalfPi = 1.57079632679489661923;

void check_same_frame(const BoundaryOperator& a, const BoundaryOperator& b,
                      bool require_same_alpha, const char* who) {
  if (a.spec.n != b.spec.n || a.E != b.E ||
      (require_same_alpha && a.alpha != b.alpha)) {
    throw ConfigError(std::string(who) +
                      ": operators live on different (alpha, E, grid) frames");
  }
}
} // namespace

BoundaryOperator assemble_map(const Grid& grid, const RobinProblem& p,
                              int workers) {
  RobinSolver solver(grid, p);
  solver.ensure_regular();

  const int m = grid.spec.boundary_count();
  BoundaryOperator M;
  M.K.resize(m, m);
  M.alpha = p.alpha;
  M.E = p.E;
  M.spec = grid.spec;
  M.kind = OperatorKind::map;

  const double out_angle = p.alpha - kHalfPi;
  auto fill_columns = [&](int j_begin, int j_end) {
    BoundaryTrace e(grid.spec);
    for (int j = j_begin; j < j_end; ++j) {
      e.values.setZero();
      e.values[j] = Complex(1.0, 0.0);
      const GridFunction psi = solver.solve_boundary(e);
      const BoundaryTrace col = robin_trace(grid, psi, out_angle);
      M.K.col(j) = col.values;
    }
  };

  workers = std::max(1, workers);
  if (workers == 1 || m < 2 * workers) {
    fill_columns(0, m);
  } else {
    // Disjoint column ranges on a shared read-only factorization: the result
    // is bitwise independent of the worker count.
    std::vector<std::future<void>> tasks;
    const int chunk = (m + workers - 1) / workers;
    for (int b = 0; b < m; b += chunk) {
      const int e_ = std::min(m, b + chunk);
      tasks.push_back(std::async(std::launch::async, fill_columns, b, e_));
    }
    for (auto& t : tasks) t.get();
  }
  return M;
}

BoundaryTrace apply_map(const BoundaryOperator& M, const BoundaryTrace& f) {
  if (M.dim() != f.size()) {
    throw ConfigError("apply_map: dimension mismatch");
  }
  BoundaryTrace out(f.spec);
  out.values = M.K * f.values;
  return out;
}

std::pair<double, double> trace_identities_residual(const Grid& grid,
                                                    const BoundaryOperator& M,
                                                    const GridFunction& psi) {
  const double c = std::cos(M.alpha);
  const double s = std::sin(M.alpha);
  const BoundaryTrace f = robin_trace(grid, psi, M.alpha);
  const Vector Mf = M.K * f.values;
  const Vector dirichlet = trace(grid, psi).values;
  const Vector neumann = normal_derivative(grid, psi).values;
  const double r1 = (s * Mf + c * f.values - dirichlet).lpNorm<Eigen::Infinity>();
  const double r2 = (c * Mf - s * f.values - neumann).lpNorm<Eigen::Infinity>();
  return {r1, r2};
}

double composition_residual(const BoundaryOperator& M1,
                            const BoundaryOperator& M2) {
  check_same_frame(M1, M2, /*require_same_alpha=*/false, "composition_residual");
  const int m = M1.dim();
  const double d = M1.alpha - M2.alpha;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(m, m);
  const Eigen::MatrixXcd P =
      (std::sin(d) * M1.K + std::cos(d) * I) *
      (std::sin(-d) * M2.K + std::cos(-d) * I) - I;
  return operator_norm(P);
}

double symmetry_residual(const BoundaryOperator& M, double corner_exclusion) {
  const Eigen::MatrixXcd D = M.K - M.K.transpose();
  if (corner_exclusion <= 0.0) {
    return D.cwiseAbs().maxCoeff() / M.spec.h;
  }
  // The boundary field behind a corner is scale invariant (log-type), so the
  // one-sided stencil leaves an O(1) defect on entry pairs that straddle a
  // corner; those pairs do not refine away and are excluded from the sup.
  const int nb = M.spec.boundary_count();
  const int n0 = M.spec.interior_count();
  std::vector<bool> keep(nb);
  for (int j = 0; j < nb; ++j) {
    const Complex z = M.spec.point_c(n0 + j);
    double d = 2.0;
    for (double cx : {0.0, 1.0}) {
      for (double cy : {0.0, 1.0}) {
        d = std::min(d, std::abs(z - Complex(cx, cy)));
      }
    }
    keep[j] = d >= corner_exclusion;
  }
  double best = 0.0;
  for (int i = 0; i < nb; ++i) {
    if (!keep[i]) continue;
    for (int j = 0; j < nb; ++j) {
      if (!keep[j]) continue;
      best = std::max(best, std::abs(D(i, j)));
    }
  }
  return best / M.spec.h;
}

double operator_norm(const Eigen::MatrixXcd& A) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    best = std::max(best, A.row(i).cwiseAbs().sum());
  }
  return best;
}

double operator_norm(const BoundaryOperator& A) { return operator_norm(A.K); }

BoundaryOperator map_difference(const BoundaryOperator& M1,
                                const BoundaryOperator& M2) {
  check_same_frame(M1, M2, /*require_same_alpha=*/true, "map_difference");
  BoundaryOperator D;
  D.K = M1.K - M2.K;
  D.alpha = M1.alpha;
  D.E = M1.E;
  D.spec = M1.spec;
  D.kind = OperatorKind::difference;
  return D;
}

double delta_alpha(const BoundaryOperator& M1, const BoundaryOperator& M2) {
  return operator_norm(map_difference(M1, M2));
}

double energy_shift_residual(const Grid& grid, const GridFunction& v, double E,
                             double alpha) {
  const BoundaryOperator at_E = assemble_map(grid, RobinProblem{v, E, alpha});
  GridFunction shifted(grid.spec);
  shifted.values = v.values.array() - Complex(E, 0.0);
  const BoundaryOperator at_zero =
      assemble_map(grid, RobinProblem{shifted, 0.0, alpha});
  return (at_E.K - at_zero.K).cwiseAbs().maxCoeff();
}

} // namespace rrmap
