#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <optional>
#include <vector>

#include "rrmap/domain.hpp"

namespace rrmap {

using SpMat = Eigen::SparseMatrix<double>;

// ---------- problem data ----------

/// Robin boundary-value problem for -Laplacian + v - E on the unit square:
/// interior equation (-Delta_h + v - E) psi = load, boundary rows
/// cos(alpha) psi - sin(alpha) dpsi/dnu = data.
struct RobinProblem {
  GridFunction v;     // real-valued potential
  double E = 0.0;     // energy
  double alpha = 0.0; // boundary-condition angle, radians
};

struct SolveReport {
  GridFunction solution;
  double residual = 0.0;   // relative 2-norm residual of the linear system
  double sigma_min = 0.0;  // smallest-singular-value estimate of the system
  bool near_singular = false;
};

struct SigmaOptions {
  int max_iterations = 800;
  double tol = 1e-10;       // relative change of the estimate
  unsigned seed = 0x5eed;   // start vector seed (fixed: deterministic)
};

/// Assemble the sparse system. Interior rows carry the 5-point Laplacian plus
/// (v - E); boundary rows carry the one-sided Robin combination. Row/column
/// order is the global node order (interior block, then boundary circuit).
SpMat assemble_operator(const Grid& grid, const RobinProblem& p);

// ---------- factorized solver ----------

/// Sparse direct factorization of the assembled system, shareable read-only
/// across concurrent solves. Construction does not check the spectral
/// condition; call sigma_min()/ensure_regular() or use robin_solve.
class RobinSolver {
public:
  RobinSolver(const Grid& grid, RobinProblem p);

  const Grid& grid() const { return *grid_; }
  const RobinProblem& problem() const { return problem_; }
  const SpMat& matrix() const { return A_; }
  double inf_norm() const { return inf_norm_; }

  /// Solve with prescribed Robin boundary data, zero interior load.
  GridFunction solve_boundary(const BoundaryTrace& f) const;
  /// Solve with a raw right-hand side over all nodes.
  GridFunction solve_rhs(const Vector& rhs) const;

  /// Smallest-singular-value estimate by inverse power iteration on A^T A
  /// (deterministic seeded start). Cached after the first call.
  double sigma_min(const SigmaOptions& opt = {}) const;
  /// sigma_min below 1e-6 * ||A||_inf marks the system near-singular.
  bool near_singular(const SigmaOptions& opt = {}) const;
  /// Throws SpectralConditionError if near-singular (E too close to the
  /// Robin spectrum for this (v, alpha)).
  void ensure_regular(const SigmaOptions& opt = {}) const;

  double relative_residual(const Vector& x, const Vector& rhs) const;

  static constexpr double kNearSingularFactor = 1e-6;

private:
  Eigen::VectorXd solve_real(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_real_transposed(const Eigen::VectorXd& rhs) const;

  const Grid* grid_;
  RobinProblem problem_;
  SpMat A_;
  SpMat AT_;
  double inf_norm_ = 0.0;
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
  std::unique_ptr<Eigen::SparseLU<SpMat>> luT_;
  bool factorization_ok_ = false;
  mutable std::optional<double> sigma_min_cache_;
};

/// One-shot forward solve: factorize, check the spectral condition, solve,
/// report. Throws SpectralConditionError when E is within tolerance of the
/// Robin spectrum.
SolveReport robin_solve(const Grid& grid, const RobinProblem& p,
                        const BoundaryTrace& f);

/// Smallest-singular-value estimate for the assembled system.
double sigma_min(const Grid& grid, const RobinProblem& p,
                 const SigmaOptions& opt = {});

// ---------- spectral sweep over alpha ----------

struct SweepPoint {
  double alpha = 0.0;
  double sigma = 0.0;
  bool flagged = false; // local minimum below threshold
};

struct FlaggedAlpha {
  double alpha = 0.0; // refined location of the sigma_min dip, in [0, pi)
  double sigma = 0.0; // sigma_min at the refined location
};

struct EigSweepOptions {
  double flag_threshold = 1e-3;  // sigma_min below this flags a candidate
  double refine_width = 1e-6;    // golden-section bracket width target
  double dedupe_width = 1e-5;    // refined minima closer than this collapse
  SigmaOptions sigma;
};

struct EigSweepResult {
  std::vector<SweepPoint> points;
  std::vector<FlaggedAlpha> flagged; // refined, deduplicated, sorted
};

/// sigma_min per alpha over the grid; local minima below threshold are
/// refined by golden-section minimization. sigma_min(alpha) is pi-periodic
/// (the system matrix flips sign under alpha -> alpha + pi), so brackets at
/// the grid edges wrap around.
EigSweepResult eig_sweep(const Grid& grid, const GridFunction& v, double E,
                         const std::vector<double>& alpha_grid,
                         const EigSweepOptions& opt = {});

} // namespace rrmap
