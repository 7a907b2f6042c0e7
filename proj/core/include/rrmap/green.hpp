#pragma once

#include <utility>
#include <vector>

#include "rrmap/domain.hpp"
#include "rrmap/forward.hpp"
#include "rrmap/impedance.hpp"

namespace rrmap {

// ---------- Green columns ----------

/// Columns of the Robin Green function: for each requested source node y,
/// the grid field G(., y) solving (Delta_h - v + E) G = delta_y with the
/// homogeneous Robin boundary rows. The discrete point source is 1/h^2 at an
/// interior node.
///
/// Sources may also be boundary circuit nodes (global index >= n*n): a
/// boundary delta lives on the circuit and carries the circuit quadrature
/// weight h, so the column solves the same assembled system with the source
/// row's right-hand side set to sin(a)/h at that boundary row. Under this
/// normalization the assembled map and the columns satisfy
///   K_ij / h = G(b_i, b_j) / sin^2(a) - cot(a)/h * delta_ij
/// identically at fixed h, and the NtD matrix (a = pi/2) equals h times the
/// boundary restriction of G. At a = 0 boundary-source columns vanish, the
/// Dirichlet Green function's boundary limit.
struct GreenColumns {
  GridSpec spec;
  double alpha = 0.0;
  double E = 0.0;
  std::vector<int> sources;          // global node indices, request order
  std::vector<GridFunction> columns; // parallel to sources

  bool has(int source) const;
  const GridFunction& at(int source) const; // ConfigError if absent
};

/// Solve the Green columns for the given sources (interior or boundary global
/// node indices). Throws SpectralConditionError when E is near the Robin
/// spectrum for (v, alpha).
GreenColumns green_columns(const Grid& grid, const RobinProblem& p,
                           const std::vector<int>& sources);

// ---------- residuals ----------

/// max over sampled source pairs (s, t) of |G(x_t, s) - G(x_s, t)|.
/// Pairs default to all unordered pairs of the stored sources.
double green_symmetry_residual(const GreenColumns& G);
double green_symmetry_residual(const GreenColumns& G,
                               const std::vector<std::pair<int, int>>& pairs);

/// Sup over all boundary pairs (x_i, y_j), diagonal included, of
///   | K_ij / h - [ G(x_i, y_j) / sin^2(a) - cot(a)/h * delta_ij ] |,
/// with the kernel convention K_ij = h * M(x_i, x_j) and the boundary delta
/// carrying weight h (delta_ij / h on the diagonal). G must hold
/// boundary-source columns; requires sin(a) != 0 (HypothesisError).
double kernel_relation_residual(const BoundaryOperator& M,
                                const GreenColumns& G, double alpha);

/// Max over sampled interior pairs (x, y) of
///   | G1(x,y) - G2(x,y) - sum_xi (v1-v2)(xi) G1(x,xi) G2(xi,y) h^2 |.
/// G1(x, xi) is evaluated through the source-point symmetry as the column with
/// source x. The discrete symmetry defect of the Robin rows is confined to
/// nodes adjacent to the boundary, so with sources and supp(v1-v2) at least
/// one cell inside the residual sits at roundoff; it grows to O(h^2) when
/// either touches the first interior collar.
/// Requires: G1 and G2 hold columns at each y; G1 holds columns at each x.
double resolvent_difference_residual(const Grid& grid, const GreenColumns& G1,
                                     const GreenColumns& G2,
                                     const GridFunction& v1,
                                     const GridFunction& v2,
                                     const std::vector<std::pair<int, int>>& pairs);

} // namespace rrmap
