#include "rrmap/domain.hpp"

#include <cmath>

namespace rrmap {

std::array<double, 2> GridSpec::point(int k) const {
  if (k < n * n) {
    const int ix = k % n;
    const int iy = k / n;
    return {(ix + 1) * h, (iy + 1) * h};
  }
  const int j = k - n * n;
  const int side = j / n;
  const int r = j % n;
  switch (side) {
    case 0: return {(r + 1) * h, 0.0};        // bottom, x increasing
    case 1: return {1.0, (r + 1) * h};        // right, y increasing
    case 2: return {(n - r) * h, 1.0};        // top, x decreasing
    default: return {0.0, (n - r) * h};       // left, y decreasing
  }
}

Grid build_grid(int n) {
  if (n < 8) {
    throw ConfigError("build_grid: n must be >= 8, got " + std::to_string(n));
  }
  Grid grid;
  grid.spec.n = n;
  grid.spec.h = 1.0 / (n + 1);
  const double h = grid.spec.h;
  const auto& spec = grid.spec;

  BoundaryIndex& b = grid.boundary;
  const int m = spec.boundary_count();
  b.points.resize(m);
  b.normals.resize(m);
  b.weights.assign(m, h);
  b.arclength.resize(m);
  b.inward1.resize(m);
  b.inward2.resize(m);

  for (int j = 0; j < m; ++j) {
    const int side = j / n;
    const int r = j % n;
    b.points[j] = spec.point(spec.boundary_index(j));
    const double x = b.points[j][0];
    const double y = b.points[j][1];
    switch (side) {
      case 0: // bottom edge y = 0, outward -e2, inward +e2
        b.normals[j] = {0.0, -1.0};
        b.arclength[j] = x;
        b.inward1[j] = spec.interior_index(r, 0);
        b.inward2[j] = spec.interior_index(r, 1);
        break;
      case 1: // right edge x = 1, outward +e1, inward -e1
        b.normals[j] = {1.0, 0.0};
        b.arclength[j] = 1.0 + y;
        b.inward1[j] = spec.interior_index(n - 1, r);
        b.inward2[j] = spec.interior_index(n - 2, r);
        break;
      case 2: // top edge y = 1, outward +e2, inward -e2
        b.normals[j] = {0.0, 1.0};
        b.arclength[j] = 2.0 + (1.0 - x);
        b.inward1[j] = spec.interior_index(n - 1 - r, n - 1);
        b.inward2[j] = spec.interior_index(n - 1 - r, n - 2);
        break;
      default: // left edge x = 0, outward -e1, inward +e1
        b.normals[j] = {-1.0, 0.0};
        b.arclength[j] = 3.0 + (1.0 - y);
        b.inward1[j] = spec.interior_index(0, n - 1 - r);
        b.inward2[j] = spec.interior_index(1, n - 1 - r);
        break;
    }
  }
  return grid;
}

bool GridFunction::is_real(double tol) const {
  for (int k = 0; k < size(); ++k) {
    if (std::abs(values[k].imag()) > tol) return false;
  }
  return true;
}

BoundaryTrace trace(const Grid& grid, const GridFunction& psi) {
  BoundaryTrace t(grid.spec);
  const int nn = grid.spec.interior_count();
  for (int j = 0; j < grid.spec.boundary_count(); ++j) {
    t.values[j] = psi.values[nn + j];
  }
  return t;
}

BoundaryTrace normal_derivative(const Grid& grid, const GridFunction& psi) {
  BoundaryTrace t(grid.spec);
  const double h = grid.spec.h;
  const int nn = grid.spec.interior_count();
  for (int j = 0; j < grid.spec.boundary_count(); ++j) {
    const Complex pb = psi.values[nn + j];
    const Complex p1 = psi.values[grid.boundary.inward1[j]];
    const Complex p2 = psi.values[grid.boundary.inward2[j]];
    t.values[j] = (3.0 * pb - 4.0 * p1 + p2) / (2.0 * h);
  }
  return t;
}

BoundaryTrace robin_trace(const Grid& grid, const GridFunction& psi,
                          double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  BoundaryTrace tr = trace(grid, psi);
  BoundaryTrace dn = normal_derivative(grid, psi);
  BoundaryTrace out(grid.spec);
  out.values = c * tr.values - s * dn.values;
  return out;
}

Complex volume_integral(const Grid& grid, const GridFunction& f) {
  const double w = grid.spec.h * grid.spec.h;
  Complex acc(0.0, 0.0);
  for (int k = 0; k < grid.spec.interior_count(); ++k) {
    acc += f.values[k];
  }
  return acc * w;
}

Complex boundary_integral(const Grid& grid, const BoundaryTrace& g) {
  Complex acc(0.0, 0.0);
  for (int j = 0; j < grid.spec.boundary_count(); ++j) {
    acc += g.values[j] * grid.boundary.weights[j];
  }
  return acc;
}

} // namespace rrmap
