#include "rrmap/cgo2d.hpp"

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace rrmap {

namespace {

constexpr double kPi = 3.14159265358979323846;

double boundary_distance(double x, double y) {
  return std::min(std::min(x, 1.0 - x), std::min(y, 1.0 - y));
}

// Nodes where the field is nonzero; the singular quadratures skip exact
// zeros, which leaves the sums bitwise unchanged.
std::vector<int> nonzero_interior(const GridSpec& spec, const Vector& u) {
  std::vector<int> idx;
  idx.reserve(spec.interior_count());
  for (int k = 0; k < spec.interior_count(); ++k) {
    if (u[k] != Complex(0.0, 0.0)) idx.push_back(k);
  }
  return idx;
}

enum class Kernel { cauchy, cauchy_conj, beurling };

Complex kernel_value(Kernel kernel, Complex w) {
  switch (kernel) {
    case Kernel::cauchy: return 1.0 / w;
    case Kernel::cauchy_conj: return 1.0 / std::conj(w);
    default: return 1.0 / (w * w);
  }
}

int next_pow2(int x) {
  int m = 1;
  while (m < x) m <<= 1;
  return m;
}

using CField = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

// In-place 2D FFT by axis-wise 1D transforms.
void fft2(CField& a, bool inverse) {
  Eigen::FFT<double> fft;
  const int M = static_cast<int>(a.rows());
  Eigen::VectorXcd line(M), res(M);
  for (int c = 0; c < M; ++c) {
    line = a.col(c);
    if (inverse) fft.inv(res, line); else fft.fwd(res, line);
    a.col(c) = res;
  }
  for (int r = 0; r < M; ++r) {
    line = a.row(r).transpose();
    if (inverse) fft.inv(res, line); else fft.fwd(res, line);
    a.row(r) = res.transpose();
  }
}

// out[t] = -(h^2/pi) sum_{s in sources, s != t} u[s] * k(zeta_s - z_t)
// with k = 1/w, 1/conj(w), or 1/w^2. All nodes sit on the uniform h-lattice
// (boundary nodes included), so the sum is a lattice cross-correlation and is
// evaluated by zero-padded FFT; a zeroed origin entry realizes the skipped
// self-cell (the principal value of all three kernels over a centered square
// cell vanishes).
void kernel_apply(const GridSpec& spec, const Vector& u,
                  const std::vector<int>& sources,
                  const std::vector<int>& targets, Kernel kernel, Vector& out) {
  const double h = spec.h;
  const double w = -h * h / kPi;
  const int L = spec.n + 2;            // lattice points per axis, 0..n+1
  const int M = next_pow2(2 * L - 1);  // circular size that avoids wrap

  auto lattice = [&](int node) -> std::pair<int, int> {
    const Complex z = spec.point_c(node);
    return {static_cast<int>(std::lround(z.real() / h)),
            static_cast<int>(std::lround(z.imag() / h))};
  };

  CField U = CField::Zero(M, M);
  for (int s : sources) {
    const auto [jx, jy] = lattice(s);
    U(jx, jy) = u[s];
  }

  // The transformed kernel depends only on (n, kernel); solves apply the
  // same operator many times, so keep it around.
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const CField>> cache;
  std::shared_ptr<const CField> Ghat;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto& slot = cache[{spec.n, static_cast<int>(kernel)}];
    if (!slot) {
      // G holds k at the negated displacement so that the circular
      // convolution produces sum_s U[s] k[s - t] at index t.
      CField G = CField::Zero(M, M);
      for (int dy = -(L - 1); dy <= L - 1; ++dy) {
        for (int dx = -(L - 1); dx <= L - 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const Complex d(h * dx, h * dy);
          G((M - dx) % M, (M - dy) % M) = kernel_value(kernel, d);
        }
      }
      fft2(G, false);
      slot = std::make_shared<const CField>(std::move(G));
    }
    Ghat = slot;
  }

  fft2(U, false);
  U.array() *= Ghat->array();
  fft2(U, true);

  for (int t : targets) {
    const auto [jx, jy] = lattice(t);
    out[t] = w * U(jx, jy);
  }
}

std::vector<int> all_node_targets(const GridSpec& spec) {
  std::vector<int> t(spec.node_count());
  for (int k = 0; k < spec.node_count(); ++k) t[k] = k;
  return t;
}

std::vector<int> interior_targets(const GridSpec& spec) {
  std::vector<int> t(spec.interior_count());
  for (int k = 0; k < spec.interior_count(); ++k) t[k] = k;
  return t;
}

} // namespace

// ---------- phase and operators ----------

GridFunction phase_F(const Grid& grid, Complex z0, Complex lambda) {
  GridFunction F(grid.spec);
  for (int k = 0; k < grid.spec.node_count(); ++k) {
    const Complex d = grid.spec.point_c(k) - z0;
    // exponent lambda d^2 - conj(lambda d^2) = 2i Im(lambda d^2): unimodular.
    F.values[k] = std::polar(1.0, 2.0 * std::imag(lambda * d * d));
  }
  return F;
}

GridFunction cauchy_T(const Grid& grid, const GridFunction& u) {
  GridFunction out(grid.spec);
  kernel_apply(grid.spec, u.values, nonzero_interior(grid.spec, u.values),
               all_node_targets(grid.spec), Kernel::cauchy, out.values);
  return out;
}

GridFunction cauchy_Tbar(const Grid& grid, const GridFunction& u) {
  GridFunction out(grid.spec);
  kernel_apply(grid.spec, u.values, nonzero_interior(grid.spec, u.values),
               all_node_targets(grid.spec), Kernel::cauchy_conj, out.values);
  return out;
}

GridFunction cauchy_Tbar(const Grid& grid, const GridFunction& u, Complex z0,
                         Complex lambda) {
  const GridFunction Fp = phase_F(grid, z0, lambda);
  const GridFunction Fm = phase_F(grid, z0, -lambda);
  GridFunction staged(grid.spec);
  staged.values = Fp.values.cwiseProduct(u.values);
  GridFunction out = cauchy_Tbar(grid, staged);
  out.values = Fm.values.cwiseProduct(out.values);
  return out;
}

GridFunction beurling_Pi(const Grid& grid, const GridFunction& u) {
  GridFunction out(grid.spec);
  kernel_apply(grid.spec, u.values, nonzero_interior(grid.spec, u.values),
               all_node_targets(grid.spec), Kernel::beurling, out.values);
  return out;
}

// ---------- amplitude equation ----------

namespace {

// One application of B = (1/4) T . Tbar_{z0,lambda} . (v .) evaluated on the
// requested targets, with the iteration state given on `active` nodes.
class MuApply {
public:
  MuApply(const Grid& grid, const GridFunction& v, Complex z0, Complex lambda)
      : grid_(grid),
        v_(v),
        active_(nonzero_interior(grid.spec, v.values)),
        interior_(interior_targets(grid.spec)),
        Fp_(phase_F(grid, z0, lambda)),
        Fm_(phase_F(grid, z0, -lambda)) {}

  const std::vector<int>& active() const { return active_; }

  // mu_active: values on active nodes (in active() order).
  // Returns B(mu) on the requested targets (global indexing).
  Vector apply(const Eigen::VectorXcd& mu_active,
               const std::vector<int>& targets) const {
    const GridSpec& spec = grid_.spec;
    Vector staged = Vector::Zero(spec.node_count());
    for (size_t i = 0; i < active_.size(); ++i) {
      const int k = active_[i];
      staged[k] = Fp_.values[k] * v_.values[k] * mu_active[i];
    }
    Vector tb = Vector::Zero(spec.node_count());
    kernel_apply(spec, staged, active_, interior_, Kernel::cauchy_conj, tb);
    for (int k : interior_) tb[k] *= Fm_.values[k];
    Vector out = Vector::Zero(spec.node_count());
    kernel_apply(spec, tb, interior_, targets, Kernel::cauchy, out);
    for (int t : targets) out[t] *= 0.25;
    return out;
  }

  Eigen::VectorXcd apply_active(const Eigen::VectorXcd& mu_active) const {
    const Vector full = apply(mu_active, active_);
    Eigen::VectorXcd out(active_.size());
    for (size_t i = 0; i < active_.size(); ++i) out[i] = full[active_[i]];
    return out;
  }

private:
  const Grid& grid_;
  const GridFunction& v_;
  std::vector<int> active_;
  std::vector<int> interior_;
  GridFunction Fp_;
  GridFunction Fm_;
};

} // namespace

class MuFixedPointOperator;

} // namespace rrmap

namespace Eigen {
namespace internal {
template <>
struct traits<rrmap::MuFixedPointOperator>
    : public Eigen::internal::traits<
          Eigen::SparseMatrix<std::complex<double>>> {};
} // namespace internal
} // namespace Eigen

namespace rrmap {

// Matrix-free wrapper for (I - B) over the active nodes, in the form Eigen's
// Krylov solvers expect.
class MuFixedPointOperator : public Eigen::EigenBase<MuFixedPointOperator> {
public:
  using Scalar = std::complex<double>;
  using RealScalar = double;
  using StorageIndex = int;
  enum {
    ColsAtCompileTime = Eigen::Dynamic,
    MaxColsAtCompileTime = Eigen::Dynamic,
    IsRowMajor = false
  };

  explicit MuFixedPointOperator(const MuApply& op) : op_(&op) {}

  Index rows() const { return static_cast<Index>(op_->active().size()); }
  Index cols() const { return static_cast<Index>(op_->active().size()); }

  template <typename Rhs>
  Eigen::Product<MuFixedPointOperator, Rhs, Eigen::AliasFreeProduct>
  operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<MuFixedPointOperator, Rhs, Eigen::AliasFreeProduct>(
        *this, x.derived());
  }

  Eigen::VectorXcd residual_apply(const Eigen::VectorXcd& x) const {
    return x - op_->apply_active(x);
  }

private:
  const MuApply* op_;
};

} // namespace rrmap

namespace Eigen {
namespace internal {
template <typename Rhs>
struct generic_product_impl<rrmap::MuFixedPointOperator, Rhs, SparseShape,
                            DenseShape, GemvProduct>
    : generic_product_impl_base<
          rrmap::MuFixedPointOperator, Rhs,
          generic_product_impl<rrmap::MuFixedPointOperator, Rhs>> {
  using Scalar = typename Product<rrmap::MuFixedPointOperator, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const rrmap::MuFixedPointOperator& lhs,
                            const Rhs& rhs, const Scalar& alpha) {
    dst.noalias() += alpha * lhs.residual_apply(rhs);
  }
};
} // namespace internal
} // namespace Eigen

namespace rrmap {

namespace {

CgoSolution mu_solve_impl(const Grid& grid, const GridFunction& v,
                          const CgoParams& params, bool require_margin) {
  const GridSpec& spec = grid.spec;
  if (v.spec.n != spec.n) {
    throw ConfigError("mu_solve: potential grid does not match");
  }
  if (std::abs(params.lambda) < params.lambda_min) {
    throw ConfigError("mu_solve: |lambda| below the asymptotic-regime floor");
  }
  const double z0_dist =
      boundary_distance(params.z0.real(), params.z0.imag());
  if (z0_dist < 4.0 * spec.h) {
    throw ConfigError("mu_solve: z0 must keep distance >= 4h from the boundary");
  }
  if (require_margin) {
    for (int k = 0; k < spec.node_count(); ++k) {
      const auto p = spec.point(k);
      if (boundary_distance(p[0], p[1]) < 2.0 * spec.h &&
          v.values[k] != Complex(0.0, 0.0)) {
        throw ConfigError("mu_solve: potential must vanish near the boundary");
      }
    }
  }

  CgoSolution sol;
  sol.potential_is_real = v.is_real();

  const MuApply op(grid, v, params.z0, params.lambda);
  const auto& active = op.active();

  auto finalize = [&](const Eigen::VectorXcd& mu_active, int iterations,
                      bool used_krylov) {
    const Vector full = op.apply(mu_active, all_node_targets(spec));
    sol.mu = GridFunction(spec);
    sol.mu.values = (full.array() + Complex(1.0, 0.0)).matrix();
    double res = 0.0;
    for (size_t i = 0; i < active.size(); ++i) {
      res = std::max(res, std::abs(sol.mu.values[active[i]] - mu_active[i]));
    }
    sol.residual = res;
    sol.iterations = iterations;
    sol.used_krylov = used_krylov;
    sol.converged = res <= params.tol;
  };

  if (active.empty()) {
    sol.mu = GridFunction(spec, Complex(1.0, 0.0));
    sol.converged = true;
    return sol;
  }

  Eigen::VectorXcd mu =
      Eigen::VectorXcd::Constant(static_cast<int>(active.size()), 1.0);
  double r_prev = std::numeric_limits<double>::infinity();
  int stall = 0;
  int used = 0;
  for (; used < params.max_iterations; ++used) {
    const Eigen::VectorXcd next =
        Eigen::VectorXcd::Ones(mu.size()) + op.apply_active(mu);
    const double r = (next - mu).lpNorm<Eigen::Infinity>();
    mu = next;
    if (r <= params.tol) {
      finalize(mu, used + 1, false);
      return sol;
    }
    stall = (r > 0.9 * r_prev) ? stall + 1 : 0;
    r_prev = r;
    if (stall >= 3) break; // contraction too weak: switch to Krylov
  }

  // Matrix-free GMRES on (I - B) mu = 1, warm-started from the last iterate.
  MuFixedPointOperator A(op);
  Eigen::GMRES<MuFixedPointOperator, Eigen::IdentityPreconditioner> gmres(A);
  gmres.setTolerance(params.tol * 1e-2);
  const int budget = std::max(16, params.max_iterations - used);
  gmres.setMaxIterations(budget);
  const Eigen::VectorXcd rhs = Eigen::VectorXcd::Ones(mu.size());
  const Eigen::VectorXcd x = gmres.solveWithGuess(rhs, mu);
  finalize(x, used + static_cast<int>(gmres.iterations()), true);
  if (!sol.converged) {
    throw ConvergenceError(
        "mu_solve: no convergence within budget (|lambda| = " +
        std::to_string(std::abs(params.lambda)) +
        " is below the contraction regime for this potential)");
  }
  return sol;
}

} // namespace

CgoSolution mu_solve(const Grid& grid, const GridFunction& v,
                     const CgoParams& params) {
  return mu_solve_impl(grid, v, params, /*require_margin=*/true);
}

GridFunction psi_from_mu(const Grid& grid, const CgoSolution& sol,
                         const CgoParams& params) {
  const GridSpec& spec = grid.spec;
  double maxd2 = 0.0;
  for (double cx : {0.0, 1.0}) {
    for (double cy : {0.0, 1.0}) {
      const Complex d = Complex(cx, cy) - params.z0;
      maxd2 = std::max(maxd2, std::norm(d));
    }
  }
  if (std::abs(params.lambda) * maxd2 > 700.0) {
    throw RangeError("psi_from_mu: growth factor exceeds double range");
  }
  GridFunction psi(spec);
  for (int k = 0; k < spec.node_count(); ++k) {
    const Complex d = spec.point_c(k) - params.z0;
    psi.values[k] = std::exp(params.lambda * d * d) * sol.mu.values[k];
  }
  return psi;
}

GridFunction psi_tilde(const Grid& grid, const CgoSolution& sol,
                       const CgoParams& params) {
  if (!sol.potential_is_real) {
    throw UnsupportedModeError(
        "psi_tilde: conjugate-phase solutions are defined here for real "
        "potentials only");
  }
  GridFunction psi = psi_from_mu(grid, sol, params);
  psi.values = psi.values.conjugate();
  return psi;
}

// ---------- pairing and reconstruction ----------

Complex delta_h_volume(const Grid& grid, const GridFunction& v1,
                       const GridFunction& v2, const CgoParams& params) {
  CgoParams p1 = params;
  p1.lambda = -params.lambda;
  const CgoSolution sol1 = mu_solve(grid, v1, p1);
  const CgoSolution sol2 = mu_solve(grid, v2, params);

  const GridFunction F = phase_F(grid, params.z0, params.lambda);
  GridFunction integrand(grid.spec);
  for (int k = 0; k < grid.spec.interior_count(); ++k) {
    integrand.values[k] = F.values[k] * std::conj(sol1.mu.values[k]) *
                          (v2.values[k] - v1.values[k]) * sol2.mu.values[k];
  }
  return volume_integral(grid, integrand);
}

Complex delta_h_boundary(const BoundaryOperator& M1, const BoundaryOperator& M2,
                         const BoundaryTrace& trace_tilde1,
                         const BoundaryTrace& trace2) {
  if (M1.alpha != M2.alpha || M1.E != M2.E || M1.spec.n != M2.spec.n) {
    throw ConfigError(
        "delta_h_boundary: maps disagree on (alpha, E, grid)");
  }
  if (M1.dim() != trace2.size() || M1.dim() != trace_tilde1.size()) {
    throw ConfigError("delta_h_boundary: trace dimensions do not match");
  }
  const Vector g = M2.K * trace2.values - M1.K * trace2.values;
  Complex acc(0.0, 0.0);
  for (int j = 0; j < M1.dim(); ++j) {
    acc += trace_tilde1.values[j] * g[j];
  }
  return acc * M1.spec.h;
}

std::pair<BoundaryTrace, BoundaryTrace> delta_h_boundary_traces(
    const Grid& grid, const GridFunction& v1, const GridFunction& v2, double E,
    double alpha, const CgoParams& params) {
  // At energy E the fields solve the equation with v_j - E at energy zero;
  // the shift is constant, so it need not vanish near the boundary.
  GridFunction v1s(grid.spec), v2s(grid.spec);
  v1s.values = (v1.values.array() - Complex(E, 0.0)).matrix();
  v2s.values = (v2.values.array() - Complex(E, 0.0)).matrix();
  const bool margin = (E == 0.0);

  CgoParams p1 = params;
  p1.lambda = -params.lambda;
  const CgoSolution sol1 = mu_solve_impl(grid, v1s, p1, margin);
  const CgoSolution sol2 = mu_solve_impl(grid, v2s, params, margin);

  GridFunction psi_t1 = psi_tilde(grid, sol1, p1);
  GridFunction psi_2 = psi_from_mu(grid, sol2, params);
  return {robin_trace(grid, psi_t1, alpha), robin_trace(grid, psi_2, alpha)};
}

PointEstimate reconstruct_point(Complex delta_h, Complex lambda) {
  const Complex scaled = (2.0 / kPi) * std::abs(lambda) * delta_h;
  return {scaled.real(), scaled.imag()};
}

Complex interpolate(const Grid& grid, const GridFunction& f, double x,
                    double y) {
  const GridSpec& spec = grid.spec;
  const int n = spec.n;
  auto lattice = [&](int i, int j) -> Complex {
    if (i >= 1 && i <= n && j >= 1 && j <= n) {
      return f.values[spec.interior_index(i - 1, j - 1)];
    }
    const int nn = spec.interior_count();
    if (j == 0 && i >= 1 && i <= n) return f.values[nn + (i - 1)];
    if (i == n + 1 && j >= 1 && j <= n) return f.values[nn + n + (j - 1)];
    if (j == n + 1 && i >= 1 && i <= n) return f.values[nn + 2 * n + (n - i)];
    if (i == 0 && j >= 1 && j <= n) return f.values[nn + 3 * n + (n - j)];
    return Complex(0.0, 0.0); // excluded corners
  };
  const double gx = std::clamp(x, 0.0, 1.0) / spec.h;
  const double gy = std::clamp(y, 0.0, 1.0) / spec.h;
  const int i0 = std::min(static_cast<int>(gx), n);
  const int j0 = std::min(static_cast<int>(gy), n);
  const double tx = gx - i0;
  const double ty = gy - j0;
  return (1.0 - tx) * (1.0 - ty) * lattice(i0, j0) +
         tx * (1.0 - ty) * lattice(i0 + 1, j0) +
         (1.0 - tx) * ty * lattice(i0, j0 + 1) +
         tx * ty * lattice(i0 + 1, j0 + 1);
}

RateTable rate_check(const Grid& grid, const std::vector<Complex>& z0_list,
                     const std::vector<double>& lambda_list,
                     const GridFunction& v1, const GridFunction& v2,
                     const CgoParams& base_params) {
  if (z0_list.empty() || lambda_list.size() < 2) {
    throw ConfigError("rate_check: need at least one z0 and two lambda values");
  }
  for (size_t i = 1; i < lambda_list.size(); ++i) {
    if (lambda_list[i] <= lambda_list[i - 1]) {
      throw ConfigError("rate_check: lambda list must be strictly increasing");
    }
  }

  RateTable table;
  for (double lam : lambda_list) {
    double max_err = 0.0;
    for (Complex z0 : z0_list) {
      CgoParams p = base_params;
      p.z0 = z0;
      p.lambda = Complex(lam, 0.0);
      const Complex dh = delta_h_volume(grid, v1, v2, p);
      const PointEstimate est = reconstruct_point(dh, p.lambda);
      const double truth = (interpolate(grid, v2, z0.real(), z0.imag()) -
                            interpolate(grid, v1, z0.real(), z0.imag()))
                               .real();
      const double err = std::abs(truth - est.value);
      table.records.push_back(
          {z0.real(), z0.imag(), truth, est.value, err, lam});
      max_err = std::max(max_err, err);
    }
    table.rows.push_back({lam, max_err});
  }

  // Least squares for e ~ C lambda^{-p} (ln 3 lambda)^2 in log coordinates.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (const auto& row : table.rows) {
    if (row.max_err <= 0.0) continue;
    const double xlog = std::log(row.lambda);
    const double ylog =
        std::log(row.max_err) - 2.0 * std::log(std::log(3.0 * row.lambda));
    sx += xlog;
    sy += ylog;
    sxx += xlog * xlog;
    sxy += xlog * ylog;
    ++m;
  }
  if (m >= 2) {
    const double denom = m * sxx - sx * sx;
    table.fit_p = -(m * sxy - sx * sy) / denom;
  } else {
    table.fit_p = 0.0; // degenerate ladder (all errors zero)
  }
  return table;
}

} // namespace rrmap
