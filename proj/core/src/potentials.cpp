#include "rrmap/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace rrmap {

namespace {

// 6u^5 - 15u^4 + 10u^3 on [0,1]: value/first/second derivatives vanish at 0,
// value 1 with vanishing derivatives at 1, so clamped composition stays C^2.
double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

double edge_distance(double t) { return std::min(t, 1.0 - t); }

double cutoff(double x, double y, double margin) {
  const double sx = smoothstep((edge_distance(x) - margin) / margin);
  const double sy = smoothstep((edge_distance(y) - margin) / margin);
  return sx * sy;
}

void validate_lists(const PotentialSpec& spec) {
  const size_t m = spec.centers.size();
  if (spec.amplitudes.size() != m || spec.widths.size() != m) {
    throw ConfigError("make_potential: centers/amplitudes/widths length mismatch");
  }
  if (spec.family == PotentialFamily::gaussian_bump && m != 1) {
    throw ConfigError("make_potential: gaussian-bump takes exactly one bump");
  }
  if (spec.family == PotentialFamily::multi_bump && m == 0) {
    throw ConfigError("make_potential: multi-bump needs at least one bump");
  }
  for (double w : spec.widths) {
    if (!(w > 0.0)) throw ConfigError("make_potential: widths must be positive");
  }
}

} // namespace

double evaluate_potential(const PotentialSpec& spec, double x, double y) {
  if (spec.family == PotentialFamily::zero) return 0.0;
  double sum = 0.0;
  for (size_t k = 0; k < spec.centers.size(); ++k) {
    const double dx = x - spec.centers[k][0];
    const double dy = y - spec.centers[k][1];
    const double s2 = spec.widths[k] * spec.widths[k];
    sum += spec.amplitudes[k] * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
  }
  return sum * cutoff(x, y, spec.margin);
}

GridFunction make_potential(const Grid& grid, const PotentialSpec& spec) {
  if (spec.family != PotentialFamily::zero) {
    validate_lists(spec);
    if (spec.margin < 4.0 * grid.spec.h) {
      throw ConfigError("make_potential: margin must be >= 4h at this resolution");
    }
    if (spec.margin > 0.25) {
      throw ConfigError("make_potential: margin must be <= 0.25");
    }
  }
  return sample_grid(grid.spec, [&](double x, double y) {
    return evaluate_potential(spec, x, y);
  });
}

double sup_norm(const GridFunction& v) {
  return v.values.size() == 0 ? 0.0 : v.values.cwiseAbs().maxCoeff();
}

} // namespace rrmap
