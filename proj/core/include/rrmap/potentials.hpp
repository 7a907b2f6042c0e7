#pragma once

#include <array>
#include <vector>

#include "rrmap/domain.hpp"

namespace rrmap {

enum class PotentialFamily { zero, gaussian_bump, multi_bump };

/// Recipe for a compactly supported C^2 potential on the unit square:
/// a sum of Gaussian bumps multiplied by a quintic-smoothstep cutoff that
/// vanishes identically within distance `margin` of the boundary and equals 1
/// at distance >= 2*margin.
struct PotentialSpec {
  PotentialFamily family = PotentialFamily::zero;
  std::vector<std::array<double, 2>> centers;
  std::vector<double> amplitudes;
  std::vector<double> widths; // Gaussian scale s_k > 0
  double margin = 0.1;        // cutoff margin m_c
};

/// Analytic evaluation of the potential at (x, y). Deterministic; usable on
/// grids of any resolution (fine-grid comparisons).
double evaluate_potential(const PotentialSpec& spec, double x, double y);

/// Nodal samples of evaluate_potential over all grid nodes.
///
/// Throws ConfigError when the margin is infeasible: margin < 4h (support
/// would not clear the discrete boundary collar) or margin > 0.25 (cutoff
/// plateaus from opposite sides would overlap and break C^2), or when the
/// per-family parameter lists are inconsistent.
GridFunction make_potential(const Grid& grid, const PotentialSpec& spec);

/// Largest nodal magnitude; for real potentials this is the discrete sup norm.
double sup_norm(const GridFunction& v);

} // namespace rrmap
