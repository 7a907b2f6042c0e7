#pragma once

#include <string>
#include <vector>

#include "rrmap/cgo2d.hpp"
#include "rrmap/domain.hpp"
#include "rrmap/experiments.hpp"
#include "rrmap/forward.hpp"
#include "rrmap/green.hpp"
#include "rrmap/impedance.hpp"

namespace rrmap {

/// CSV/JSON artifact writers. All floating-point fields are printed with
/// "%.17g" so artifacts are byte-identical across runs of the same build.
/// Writers throw ConfigError when the output path cannot be opened.

/// Header `x,y,re,im`; all nodes in global order (interior row-major block,
/// then the boundary circuit).
void write_grid_function_csv(const std::string& path, const Grid& grid,
                             const GridFunction& f);

/// Header `s,x,y,re,im`; boundary circuit order, s = arclength.
void write_boundary_trace_csv(const std::string& path, const Grid& grid,
                              const BoundaryTrace& t);

/// Header `i,j,re,im`; dense row-major entries of K.
void write_boundary_operator_csv(const std::string& path,
                                 const BoundaryOperator& M);

/// JSON sidecar {alpha, E, n, kind}.
void write_boundary_operator_sidecar(const std::string& path,
                                     const BoundaryOperator& M);

/// Header `src_i,src_j,x_i,x_j,re,im`. Nodes are addressed by integer lattice
/// coordinates on the (n+2)^2 lattice (node at (i*h, j*h)); src_* is the
/// source, x_* the evaluation node. One row per (source, node) pair.
void write_green_csv(const std::string& path, const GreenColumns& G);

/// Header `x,y,v_true_diff,v_est,err,lambda`.
void write_reconstruction_csv(const std::string& path,
                              const std::vector<ReconstructionRecord>& records);

/// Header `lambda,max_err,fit_p`; fit_p repeated on every row.
void write_rate_csv(const std::string& path, const RateTable& table);

/// Header `eps,alpha,delta_alpha,sup_diff,C_fit,s_fit`.
void write_sweep_csv(const std::string& path,
                     const std::vector<StabilityRecord>& records);

/// JSON report: record count, skipped-member log, min-over-alpha summary.
void write_stability_report_json(const std::string& path,
                                 const StabilitySweepResult& sweep,
                                 const std::vector<MinOverAlphaRow>& min_rows);

/// Header `alpha,sigma,flagged` over the sweep grid (flagged 0/1).
void write_eig_sweep_csv(const std::string& path, const EigSweepResult& sweep);

/// Header `alpha,sigma`; one row per refined flagged minimum.
void write_flagged_csv(const std::string& path, const EigSweepResult& sweep);

struct ResidualRow {
  std::string check;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Header `check,residual,threshold,pass`.
void write_residual_suite_csv(const std::string& path,
                              const std::vector<ResidualRow>& rows);

/// Header `pair,residual`.
void write_identity_report_csv(const std::string& path,
                               const IdentityCheckReport& report);

/// Manifest JSON {command, config_hash, versions, wall_time_seconds} where
/// versions records the library, Eigen, and compiler.
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_hash, double wall_time_seconds);

/// "%.17g" rendering used by every writer; exposed for tests.
std::string format_double(double x);

} // namespace rrmap
