#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "rrmap/errors.hpp"

namespace rrmap {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;

// ---------- grid ----------

/// Uniform Cartesian discretization of the closed unit square.
///
/// Interior nodes: n per axis at coordinates ((ix+1)h, (iy+1)h), h = 1/(n+1),
/// stored row-major (index iy*n + ix). Boundary nodes: the 4n edge nodes
/// excluding the 4 corners, stored after the interior block in
/// counterclockwise circuit order starting at (h, 0).
struct GridSpec {
  int n = 0;      // interior nodes per axis, >= 8
  double h = 0.0; // spacing, h*(n+1) = 1

  int interior_count() const { return n * n; }
  int boundary_count() const { return 4 * n; }
  int node_count() const { return n * n + 4 * n; }

  /// Global index of interior node (ix, iy), 0 <= ix, iy < n.
  int interior_index(int ix, int iy) const { return iy * n + ix; }
  /// Global index of boundary circuit node j, 0 <= j < 4n.
  int boundary_index(int j) const { return n * n + j; }

  bool is_interior(int k) const { return k >= 0 && k < n * n; }
  bool is_boundary(int k) const { return k >= n * n && k < node_count(); }

  /// Coordinates of any global node index.
  std::array<double, 2> point(int k) const;
  Complex point_c(int k) const {
    auto p = point(k);
    return {p[0], p[1]};
  }
};

/// Ordered boundary circuit: coordinates, outward unit normals, quadrature
/// weights (uniformly h), and the two interior nodes on each node's inward
/// normal line (used by the one-sided normal-derivative stencil).
struct BoundaryIndex {
  std::vector<std::array<double, 2>> points;   // circuit order
  std::vector<std::array<double, 2>> normals;  // one of +-e1, +-e2
  std::vector<double> weights;                 // = h
  std::vector<double> arclength;               // perimeter coordinate from (0,0)
  std::vector<int> inward1;                    // global index 1 step inward
  std::vector<int> inward2;                    // global index 2 steps inward

  int count() const { return static_cast<int>(points.size()); }
};

struct Grid {
  GridSpec spec;
  BoundaryIndex boundary;
};

/// Build the grid for n interior nodes per axis. Throws ConfigError if n < 8.
Grid build_grid(int n);

// ---------- fields ----------

/// Complex scalar field over all nodes (interior block then boundary block).
struct GridFunction {
  GridSpec spec;
  Vector values;

  GridFunction() = default;
  GridFunction(const GridSpec& s, Complex fill = Complex(0.0, 0.0))
      : spec(s), values(Vector::Constant(s.node_count(), fill)) {}

  Complex& operator[](int k) { return values[k]; }
  Complex operator[](int k) const { return values[k]; }
  int size() const { return static_cast<int>(values.size()); }

  bool is_real(double tol = 0.0) const;
};

/// Evaluate f(x, y) at every node.
template <typename F>
GridFunction sample_grid(const GridSpec& spec, F&& f) {
  GridFunction g(spec);
  for (int k = 0; k < spec.node_count(); ++k) {
    auto p = spec.point(k);
    g.values[k] = Complex(f(p[0], p[1]));
  }
  return g;
}

/// Complex values on the boundary circuit.
struct BoundaryTrace {
  GridSpec spec;
  Vector values; // length 4n, circuit order

  BoundaryTrace() = default;
  explicit BoundaryTrace(const GridSpec& s, Complex fill = Complex(0.0, 0.0))
      : spec(s), values(Vector::Constant(s.boundary_count(), fill)) {}

  Complex& operator[](int j) { return values[j]; }
  Complex operator[](int j) const { return values[j]; }
  int size() const { return static_cast<int>(values.size()); }
};

// ---------- traces and quadrature ----------

/// Restriction of a grid field to the boundary circuit.
BoundaryTrace trace(const Grid& grid, const GridFunction& psi);

/// Outward normal derivative by the second-order one-sided stencil
/// (3 psi_b - 4 psi_1 + psi_2) / (2h), psi_1/psi_2 one and two steps along the
/// inward normal. Exact on fields affine in the normal coordinate.
BoundaryTrace normal_derivative(const Grid& grid, const GridFunction& psi);

/// Robin trace [psi]_alpha = cos(alpha) psi - sin(alpha) dpsi/dnu, nodewise.
BoundaryTrace robin_trace(const Grid& grid, const GridFunction& psi,
                          double alpha);

/// Composite quadrature sum f_i h^2 over interior nodes.
Complex volume_integral(const Grid& grid, const GridFunction& f);

/// Circuit quadrature sum g_j h over boundary nodes (corners excluded).
Complex boundary_integral(const Grid& grid, const BoundaryTrace& g);

} // namespace rrmap
