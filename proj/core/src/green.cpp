#include "rrmap/green.hpp"

#include <cmath>
#include <unordered_map>

namespace rrmap {

bool GreenColumns::has(int source) const {
  for (int s : sources) {
    if (s == source) return true;
  }
  return false;
}

const GridFunction& GreenColumns::at(int source) const {
  for (size_t i = 0; i < sources.size(); ++i) {
    if (sources[i] == source) return columns[i];
  }
  throw ConfigError("GreenColumns: no column for source node " +
                    std::to_string(source));
}

GreenColumns green_columns(const Grid& grid, const RobinProblem& p,
                           const std::vector<int>& sources) {
  RobinSolver solver(grid, p);
  solver.ensure_regular();

  const GridSpec& spec = grid.spec;
  const double h = spec.h;
  const double c = std::cos(p.alpha);
  const double s = std::sin(p.alpha);

  GreenColumns G;
  G.spec = spec;
  G.alpha = p.alpha;
  G.E = p.E;
  G.sources = sources;
  G.columns.reserve(sources.size());

  std::unordered_map<int, GridFunction> interior_cache;
  auto interior_column = [&](int k) -> const GridFunction& {
    auto it = interior_cache.find(k);
    if (it != interior_cache.end()) return it->second;
    // (Delta_h - v + E) G = delta (1/h^2 at k); the assembled operator is
    // -(Delta_h - v + E), so the source enters with a minus sign.
    Vector rhs = Vector::Zero(spec.node_count());
    rhs[k] = Complex(-1.0 / (h * h), 0.0);
    return interior_cache.emplace(k, solver.solve_rhs(rhs)).first->second;
  };

  for (int src : sources) {
    if (src < 0 || src >= spec.node_count()) {
      throw ConfigError("green_columns: source index out of range");
    }
    if (spec.is_interior(src)) {
      G.columns.push_back(interior_column(src));
      continue;
    }
    // Boundary source: the delta lives on the boundary circuit, so it enters
    // through the boundary-condition row with the circuit quadrature weight h
    // (discrete boundary delta = 1/h at the node). The sin(alpha) factor is
    // the unique normalization under which the assembled map and these
    // columns satisfy K_ij/h = G(b_i,b_j)/sin^2(alpha) - cot(alpha)/h * d_ij
    // identically at fixed h, and the NtD matrix at alpha = pi/2 equals
    // h * (boundary restriction of G). At alpha = 0 the column vanishes,
    // matching the Dirichlet Green function's zero boundary limit.
    Vector rhs = Vector::Zero(spec.node_count());
    rhs[src] = Complex(s / h, 0.0);
    G.columns.push_back(solver.solve_rhs(rhs));
  }
  (void)c;
  return G;
}

double green_symmetry_residual(const GreenColumns& G) {
  std::vector<std::pair<int, int>> pairs;
  for (size_t a = 0; a < G.sources.size(); ++a) {
    for (size_t b = a + 1; b < G.sources.size(); ++b) {
      pairs.emplace_back(G.sources[a], G.sources[b]);
    }
  }
  return green_symmetry_residual(G, pairs);
}

double green_symmetry_residual(const GreenColumns& G,
                               const std::vector<std::pair<int, int>>& pairs) {
  double worst = 0.0;
  for (const auto& [s, t] : pairs) {
    const Complex g_ts = G.at(s)[t]; // G(x_t, s)
    const Complex g_st = G.at(t)[s]; // G(x_s, t)
    worst = std::max(worst, std::abs(g_ts - g_st));
  }
  return worst;
}

double kernel_relation_residual(const BoundaryOperator& M,
                                const GreenColumns& G, double alpha) {
  const double s = std::sin(alpha);
  if (std::abs(s) < 1e-12) {
    throw HypothesisError(
        "kernel_relation_residual: stated only for sin(alpha) != 0");
  }
  if (M.alpha != alpha || G.alpha != alpha || M.spec.n != G.spec.n ||
      M.E != G.E) {
    throw ConfigError(
        "kernel_relation_residual: map and Green columns disagree on "
        "(alpha, E, grid)");
  }
  const GridSpec& spec = G.spec;
  const double h = spec.h;
  const double s2 = s * s;
  const double cot = std::cos(alpha) / s;

  double worst = 0.0;
  bool any = false;
  for (size_t idx = 0; idx < G.sources.size(); ++idx) {
    const int src = G.sources[idx];
    if (!spec.is_boundary(src)) continue;
    const int j = src - spec.interior_count();
    const GridFunction& col = G.columns[idx];
    for (int i = 0; i < spec.boundary_count(); ++i) {
      Complex rhs = col[spec.boundary_index(i)] / s2;
      if (i == j) rhs -= Complex(cot / h, 0.0); // boundary delta carries 1/h
      const Complex lhs = M.K(i, j) / h;
      worst = std::max(worst, std::abs(lhs - rhs));
      any = true;
    }
  }
  if (!any) {
    throw ConfigError(
        "kernel_relation_residual: no boundary-source columns to compare");
  }
  return worst;
}

double resolvent_difference_residual(
    const Grid& grid, const GreenColumns& G1, const GreenColumns& G2,
    const GridFunction& v1, const GridFunction& v2,
    const std::vector<std::pair<int, int>>& pairs) {
  if (G1.alpha != G2.alpha || G1.E != G2.E || G1.spec.n != G2.spec.n) {
    throw ConfigError(
        "resolvent_difference_residual: columns disagree on (alpha, E, grid)");
  }
  const GridSpec& spec = grid.spec;
  const double h2 = spec.h * spec.h;
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const GridFunction& g1_y = G1.at(y); // G1(. , y)
    const GridFunction& g2_y = G2.at(y); // G2(. , y)
    const GridFunction& g1_x = G1.at(x); // G1(. , x), read as G1(x, .)
    Complex volume(0.0, 0.0);
    for (int k = 0; k < spec.interior_count(); ++k) {
      const Complex dv = v1.values[k] - v2.values[k];
      if (dv == Complex(0.0, 0.0)) continue;
      volume += dv * g1_x[k] * g2_y[k];
    }
    volume *= h2;
    const Complex lhs = g1_y[x] - g2_y[x];
    worst = std::max(worst, std::abs(lhs - volume));
  }
  return worst;
}

} // namespace rrmap
