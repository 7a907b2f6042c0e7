#include "rrmap/forward.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace rrmap {

namespace {

// Boundary circuit index of the edge node adjacent to an interior node that
// sits on the grid margin. Side layout matches build_grid.
int adjacent_boundary_node(int n, int side, int ix, int iy) {
  switch (side) {
    case 0: return ix;               // bottom neighbor of (ix, 0)
    case 1: return n + iy;           // right neighbor of (n-1, iy)
    case 2: return 3 * n - 1 - ix;   // top neighbor of (ix, n-1)
    default: return 4 * n - 1 - iy;  // left neighbor of (0, iy)
  }
}

} // namespace

SpMat assemble_operator(const Grid& grid, const RobinProblem& p) {
  const GridSpec& spec = grid.spec;
  if (p.v.spec.n != spec.n) {
    throw ConfigError("assemble_operator: potential grid does not match");
  }
  if (!p.v.is_real()) {
    throw ConfigError("assemble_operator: potential must be real-valued");
  }
  const int n = spec.n;
  const int nn = spec.interior_count();
  const int N = spec.node_count();
  const double h = spec.h;
  const double ih2 = 1.0 / (h * h);
  const double c = std::cos(p.alpha);
  const double s = std::sin(p.alpha);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(5 * nn + 3 * spec.boundary_count()));

  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int k = spec.interior_index(ix, iy);
      trip.emplace_back(k, k, 4.0 * ih2 + (p.v.values[k].real() - p.E));
      // left
      if (ix > 0) trip.emplace_back(k, spec.interior_index(ix - 1, iy), -ih2);
      else trip.emplace_back(k, nn + adjacent_boundary_node(n, 3, ix, iy), -ih2);
      // right
      if (ix < n - 1) trip.emplace_back(k, spec.interior_index(ix + 1, iy), -ih2);
      else trip.emplace_back(k, nn + adjacent_boundary_node(n, 1, ix, iy), -ih2);
      // down
      if (iy > 0) trip.emplace_back(k, spec.interior_index(ix, iy - 1), -ih2);
      else trip.emplace_back(k, nn + adjacent_boundary_node(n, 0, ix, iy), -ih2);
      // up
      if (iy < n - 1) trip.emplace_back(k, spec.interior_index(ix, iy + 1), -ih2);
      else trip.emplace_back(k, nn + adjacent_boundary_node(n, 2, ix, iy), -ih2);
    }
  }
  // Boundary rows: cos(a) psi_b - sin(a) (3 psi_b - 4 psi_1 + psi_2) / (2h).
  for (int j = 0; j < spec.boundary_count(); ++j) {
    const int row = nn + j;
    trip.emplace_back(row, row, c - 1.5 * s / h);
    trip.emplace_back(row, grid.boundary.inward1[j], 2.0 * s / h);
    trip.emplace_back(row, grid.boundary.inward2[j], -0.5 * s / h);
  }

  SpMat A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

// ---------- RobinSolver ----------

RobinSolver::RobinSolver(const Grid& grid, RobinProblem p)
    : grid_(&grid), problem_(std::move(p)) {
  A_ = assemble_operator(grid, problem_);
  AT_ = SpMat(A_.transpose());
  inf_norm_ = 0.0;
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(A_.rows());
  for (int k = 0; k < A_.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A_, k); it; ++it) {
      row_sums[it.row()] += std::abs(it.value());
    }
  }
  inf_norm_ = row_sums.maxCoeff();

  lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
  lu_->compute(A_);
  factorization_ok_ = (lu_->info() == Eigen::Success);
  if (factorization_ok_) {
    luT_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    luT_->compute(AT_);
    factorization_ok_ = (luT_->info() == Eigen::Success);
  }
}

Eigen::VectorXd RobinSolver::solve_real(const Eigen::VectorXd& rhs) const {
  return lu_->solve(rhs);
}

Eigen::VectorXd RobinSolver::solve_real_transposed(
    const Eigen::VectorXd& rhs) const {
  return luT_->solve(rhs);
}

GridFunction RobinSolver::solve_rhs(const Vector& rhs) const {
  if (!factorization_ok_) {
    throw SpectralConditionError(
        "robin solve: factorization failed (E lies on the discrete Robin "
        "spectrum for this alpha)");
  }
  GridFunction out(grid_->spec);
  const Eigen::VectorXd re = solve_real(rhs.real());
  if (rhs.imag().isZero(0.0)) {
    out.values = re.cast<Complex>();
  } else {
    const Eigen::VectorXd im = solve_real(rhs.imag());
    out.values = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
  }
  return out;
}

GridFunction RobinSolver::solve_boundary(const BoundaryTrace& f) const {
  const int nn = grid_->spec.interior_count();
  Vector rhs = Vector::Zero(grid_->spec.node_count());
  for (int j = 0; j < grid_->spec.boundary_count(); ++j) {
    rhs[nn + j] = f.values[j];
  }
  return solve_rhs(rhs);
}

double RobinSolver::sigma_min(const SigmaOptions& opt) const {
  if (sigma_min_cache_) return *sigma_min_cache_;
  if (!factorization_ok_) {
    sigma_min_cache_ = 0.0;
    return 0.0;
  }
  const int N = static_cast<int>(A_.rows());
  // Block inverse iteration on A^T A with Rayleigh-Ritz extraction. A single
  // vector contracts at (sigma_1/sigma_2)^2 and stalls when the two smallest
  // singular values nearly coincide (which happens one grid step away from a
  // spectral crossing); a block of three contracts at (sigma_1/sigma_4)^2 and
  // its smallest Ritz value stays well defined as sigma_min -> 0.
  const int block = std::min(3, N);
  std::mt19937 gen(opt.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd X(N, block);
  for (int j = 0; j < block; ++j) {
    for (int i = 0; i < N; ++i) X(i, j) = dist(gen);
  }

  double lam_prev = -1.0;
  int stall = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(N, block);
    const Eigen::MatrixXd AQ = A_ * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(AQ.transpose() * AQ);
    if (es.info() != Eigen::Success) {
      sigma_min_cache_ = 0.0;
      return 0.0;
    }
    const double lam = std::max(es.eigenvalues()[0], 0.0);
    const double lam_top = std::max(es.eigenvalues()[block - 1], 0.0);
    if (!std::isfinite(lam) || !std::isfinite(lam_top)) {
      sigma_min_cache_ = 0.0;
      return 0.0;
    }
    // Convergence is tested on the Ritz value lam = sigma^2. The absolute
    // term is the rounding floor of the block Gram matrix: when sigma_min
    // sits at or below that floor (alpha essentially on the spectrum) a
    // purely relative test would chase noise forever.
    const double lam_noise =
        1e3 * std::numeric_limits<double>::epsilon() * lam_top;
    if (lam_prev >= 0.0) {
      const double change = std::abs(lam - lam_prev);
      bool accept = change <= opt.tol * lam + lam_noise;
      if (!accept) {
        // A cluster of nearly equal smallest singular values makes the Ritz
        // value drift geometrically with ratio just below one. Sustained
        // slow drift means the estimate is already resolved far beyond any
        // downstream threshold, so accept it.
        if (change <= 1e-7 * lam) {
          accept = ++stall >= 8;
        } else {
          stall = 0;
        }
      }
      if (accept) {
        const double sigma = std::sqrt(lam);
        sigma_min_cache_ = sigma;
        return sigma;
      }
    }
    lam_prev = lam;
    for (int j = 0; j < block; ++j) {
      X.col(j) = solve_real(solve_real_transposed(Q.col(j)));
    }
    if (!X.allFinite()) {
      sigma_min_cache_ = 0.0;
      return 0.0;
    }
  }
  throw ConvergenceError(
      "sigma_min: inverse power iteration did not converge within budget");
}

bool RobinSolver::near_singular(const SigmaOptions& opt) const {
  return sigma_min(opt) < kNearSingularFactor * inf_norm_;
}

void RobinSolver::ensure_regular(const SigmaOptions& opt) const {
  if (near_singular(opt)) {
    throw SpectralConditionError(
        "spectral condition violated: sigma_min = " +
        std::to_string(sigma_min(opt)) + " below tolerance " +
        std::to_string(kNearSingularFactor * inf_norm_));
  }
}

double RobinSolver::relative_residual(const Vector& x,
                                      const Vector& rhs) const {
  const Vector r = A_.cast<Complex>() * x - rhs;
  const double denom = std::max(rhs.norm(), 1e-300);
  return r.norm() / denom;
}

// ---------- one-shot operations ----------

SolveReport robin_solve(const Grid& grid, const RobinProblem& p,
                        const BoundaryTrace& f) {
  RobinSolver solver(grid, p);
  solver.ensure_regular();
  SolveReport rep;
  rep.sigma_min = solver.sigma_min();
  rep.near_singular = solver.near_singular();
  rep.solution = solver.solve_boundary(f);
  const int nn = grid.spec.interior_count();
  Vector rhs = Vector::Zero(grid.spec.node_count());
  for (int j = 0; j < grid.spec.boundary_count(); ++j) rhs[nn + j] = f.values[j];
  rep.residual = solver.relative_residual(rep.solution.values, rhs);
  return rep;
}

double sigma_min(const Grid& grid, const RobinProblem& p,
                 const SigmaOptions& opt) {
  return RobinSolver(grid, p).sigma_min(opt);
}

// ---------- eig_sweep ----------

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_alpha(double a) {
  double w = std::fmod(a, kPi);
  if (w < 0.0) w += kPi;
  return w;
}

// Golden-section minimization of f over [a, b] down to bracket width `width`.
double golden_min(const std::function<double(double)>& f, double a, double b,
                  double width) {
  const double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > width) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

} // namespace

EigSweepResult eig_sweep(const Grid& grid, const GridFunction& v, double E,
                         const std::vector<double>& alpha_grid,
                         const EigSweepOptions& opt) {
  if (alpha_grid.empty()) {
    throw ConfigError("eig_sweep: alpha grid must be non-empty");
  }
  auto sigma_at = [&](double alpha) -> double {
    RobinProblem p{v, E, wrap_alpha(alpha)};
    return RobinSolver(grid, std::move(p)).sigma_min(opt.sigma);
  };

  EigSweepResult result;
  result.points.reserve(alpha_grid.size());
  for (double a : alpha_grid) {
    result.points.push_back({a, sigma_at(a), false});
  }

  const int m = static_cast<int>(result.points.size());
  // sigma_min(alpha) has period pi, so neighbor comparisons wrap around.
  auto neighbor_alpha = [&](int i, int step) -> double {
    const int j = i + step;
    if (j < 0) return result.points[m - 1].alpha - kPi;
    if (j >= m) return result.points[0].alpha + kPi;
    return result.points[j].alpha;
  };
  auto neighbor_sigma = [&](int i, int step) -> double {
    int j = i + step;
    if (j < 0) j += m;
    if (j >= m) j -= m;
    return result.points[j].sigma;
  };

  for (int i = 0; i < m; ++i) {
    const double s = result.points[i].sigma;
    if (s >= opt.flag_threshold) continue;
    if (m > 1 && (s > neighbor_sigma(i, -1) || s > neighbor_sigma(i, +1))) {
      continue; // not a local minimum along the sampled grid
    }
    result.points[i].flagged = true;
    // Localize the dip within the bracketing grid interval.
    const double lo = (m > 1) ? neighbor_alpha(i, -1) : result.points[i].alpha - 0.05;
    const double hi = (m > 1) ? neighbor_alpha(i, +1) : result.points[i].alpha + 0.05;
    const double refined = golden_min(sigma_at, lo, hi, opt.refine_width);
    result.flagged.push_back({wrap_alpha(refined), sigma_at(refined)});
  }

  std::sort(result.flagged.begin(), result.flagged.end(),
            [](const FlaggedAlpha& a, const FlaggedAlpha& b) {
              return a.alpha < b.alpha;
            });
  // Collapse refinements that converged to the same dip (wrap-around too).
  std::vector<FlaggedAlpha> dedup;
  for (const auto& f : result.flagged) {
    if (!dedup.empty() && f.alpha - dedup.back().alpha < opt.dedupe_width) {
      if (f.sigma < dedup.back().sigma) dedup.back() = f;
    } else {
      dedup.push_back(f);
    }
  }
  if (dedup.size() > 1) {
    const double gap = dedup.front().alpha + kPi - dedup.back().alpha;
    if (gap < opt.dedupe_width) {
      if (dedup.back().sigma < dedup.front().sigma) dedup.front() = dedup.back();
      dedup.pop_back();
    }
  }
  result.flagged = std::move(dedup);
  return result;
}

} // namespace rrmap
