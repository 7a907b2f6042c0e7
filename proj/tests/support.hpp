#pragma once

// Shared fixtures for the test suites: reference potentials, refinement-ladder
// helpers, and the floor rule for residuals that start at roundoff.

#include <algorithm>
#include <cmath>
#include <vector>

#include <rrmap/domain.hpp>
#include <rrmap/potentials.hpp>

namespace testsupport {

inline constexpr double kPi = 3.14159265358979323846;

// Single off-center bump, usable from n = 16 up (margin 0.24 >= 4h there).
inline rrmap::PotentialSpec bump_spec(double amplitude = 1.0) {
  rrmap::PotentialSpec s;
  s.family = rrmap::PotentialFamily::gaussian_bump;
  s.centers = {{0.45, 0.55}};
  s.amplitudes = {amplitude};
  s.widths = {0.12};
  s.margin = 0.24;
  return s;
}

// Centered bump used as a perturbation direction.
inline rrmap::PotentialSpec center_bump_spec(double amplitude = 1.0,
                                             double width = 0.18) {
  rrmap::PotentialSpec s;
  s.family = rrmap::PotentialFamily::gaussian_bump;
  s.centers = {{0.5, 0.5}};
  s.amplitudes = {amplitude};
  s.widths = {width};
  s.margin = 0.24;
  return s;
}

// Two-bump pair partner for identity checks.
inline rrmap::PotentialSpec pair_spec() {
  rrmap::PotentialSpec s;
  s.family = rrmap::PotentialFamily::multi_bump;
  s.centers = {{0.45, 0.55}, {0.55, 0.45}};
  s.amplitudes = {1.0, -0.8};
  s.widths = {0.12, 0.15};
  s.margin = 0.24;
  return s;
}

inline rrmap::PotentialSpec zero_spec() { return rrmap::PotentialSpec{}; }

// Strictly decreasing ladder.
inline bool decreasing(const std::vector<double>& e) {
  for (std::size_t i = 1; i < e.size(); ++i)
    if (!(e[i] < e[i - 1])) return false;
  return true;
}

// Exact identities start at roundoff; refinement only amplifies conditioning.
// A ladder counts as converged when it decreases or sits below the floor.
inline bool decreasing_or_floor(const std::vector<double>& e,
                                double floor = 1e-8) {
  if (decreasing(e)) return true;
  return std::all_of(e.begin(), e.end(), [&](double x) { return x <= floor; });
}

// Least-squares slope of log(err) against log(h) over n = {16, 32, 64}-style
// ladders; err ~ C h^p gives p back.
inline double empirical_order(const std::vector<int>& ns,
                              const std::vector<double>& errs) {
  const std::size_t m = ns.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(1.0 / (ns[i] + 1.0));
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// Snap a physical coordinate to the nearest interior axis index (0-based).
inline int snap_axis(double coord, int n) {
  int i = static_cast<int>(std::lround(coord * (n + 1))) - 1;
  return std::clamp(i, 0, n - 1);
}

inline int snap_interior(const rrmap::GridSpec& spec, double x, double y) {
  return spec.interior_index(snap_axis(x, spec.n), snap_axis(y, spec.n));
}

} // namespace testsupport
