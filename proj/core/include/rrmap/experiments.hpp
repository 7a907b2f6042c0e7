#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrmap/domain.hpp"
#include "rrmap/impedance.hpp"
#include "rrmap/potentials.hpp"

namespace rrmap {

// ---------- boundary data identity check ----------

/// One pair of Robin boundary data: f1 drives the field for the first
/// potential, f2 the field for the second.
struct DataPair {
  BoundaryTrace f1;
  BoundaryTrace f2;
};

struct IdentityCheckReport {
  std::vector<double> residuals; // one per data pair
  double max_residual = 0.0;
};

/// Standard smooth boundary-data set: the constant mode, cosine and sine
/// circuit modes k = 1..4, and 3 seeded random low-frequency combinations.
/// Deterministic for a fixed (grid, seed).
std::vector<BoundaryTrace> standard_boundary_data(const Grid& grid,
                                                  std::uint64_t seed);

/// Pairs each trace with itself. The two fields of a pair still differ (they
/// solve different potentials), and the volume pairing stays away from zero,
/// so the scale-free residual is meaningful; cross pairs of symmetric and
/// antisymmetric data can make both sides of the identity vanish and turn the
/// residual ratio into noise.
std::vector<DataPair> make_data_pairs(const std::vector<BoundaryTrace>& data);

/// For each data pair, solves the two Robin problems and compares the volume
/// pairing of (v1 - v2) against the boundary pairing through the map
/// difference. Residuals are scale-free: |L - R| / (|L| + |R| + eps_mach).
/// Throws SpectralConditionError if either operator is near-singular.
IdentityCheckReport alessandrini_check(const Grid& grid, const GridFunction& v1,
                                       const GridFunction& v2, double E,
                                       double alpha,
                                       const std::vector<DataPair>& pairs,
                                       int workers = 1);

// ---------- stability sweep ----------

/// Pair family v1 = base, v2(eps) = base + eps * perturbation, with the
/// amplitude ladder eps and a declared smoothness bound for bookkeeping.
struct PotentialPairFamily {
  PotentialSpec base;
  PotentialSpec perturbation;
  std::vector<double> eps;
  double c2_bound = 0.0;
};

/// One (eps, alpha) cell of the sweep. The envelope parameters (C_fit, s_fit)
/// are shared by every record of the same alpha; in_fit marks the members the
/// fit was computed from (delta_alpha > 0 required).
struct StabilityRecord {
  double eps = 0.0;
  double alpha = 0.0;
  double delta_alpha = 0.0; // operator norm of the map difference
  double sup_diff = 0.0;    // max nodal |v1 - v2|
  double C_fit = 0.0;
  double s_fit = 0.0;
  bool in_fit = false;
};

struct SkippedMember {
  double eps = 0.0;
  double alpha = 0.0;
  std::string reason;
};

struct StabilitySweepResult {
  std::vector<StabilityRecord> records; // ordered by (alpha, eps) input order
  std::vector<SkippedMember> skipped;
};

/// Per (eps, alpha): assembles both maps, records delta_alpha and sup_diff.
/// Members hitting the spectral condition at some alpha are skipped and
/// logged, not fatal. Per alpha, fits the envelope
///     sup_diff <= C * (ln(3 + 1/delta_alpha))^{-s}
/// by log-log least squares for the shape, then takes the largest exponent
/// that keeps the bound satisfied at the regression constant, capped at 3/4,
/// and tightens C to the touching envelope. The resulting (C_fit, s_fit)
/// satisfy the bound on every fitted member by construction.
/// Throws ConfigError if no (eps, alpha) cell is admissible.
StabilitySweepResult stability_sweep(const Grid& grid,
                                     const PotentialPairFamily& family,
                                     double E,
                                     const std::vector<double>& alpha_grid,
                                     int workers = 1);

struct MinOverAlphaRow {
  double eps = 0.0;
  double alpha = 0.0; // minimizing alpha
  double value = 0.0; // minimized envelope value C * (ln(3 + 1/delta))^{-s}
};

/// For each eps with at least one positive-delta record, the alpha minimizing
/// the fitted envelope value and that value. Ties break toward smaller alpha,
/// so the result is invariant under permutation of the input records.
/// Throws ConfigError when no record qualifies.
std::vector<MinOverAlphaRow> min_over_alpha(
    const std::vector<StabilityRecord>& records);

} // namespace rrmap
