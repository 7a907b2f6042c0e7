#include "rrmap/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <memory>

#ifndef RRMAP_VERSION
#define RRMAP_VERSION "unknown"
#endif

#include <Eigen/Core>

namespace rrmap {

namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_out(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw ConfigError("cannot open output file: " + path);
  return f;
}

// Integer lattice coordinates of a global node index: node sits at (i*h, j*h)
// on the (n+2)^2 lattice (corners carry no node).
std::array<int, 2> lattice_coords(const GridSpec& spec, int k) {
  const int n = spec.n;
  if (spec.is_interior(k)) {
    return {k % n + 1, k / n + 1};
  }
  const int j = k - spec.interior_count();
  const int side = j / n;
  const int r = j % n;
  switch (side) {
    case 0: return {r + 1, 0};         // bottom
    case 1: return {n + 1, r + 1};     // right
    case 2: return {n - r, n + 1};     // top
    default: return {0, n - r};        // left
  }
}

const char* kind_name(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::map: return "map";
    case OperatorKind::difference: return "difference";
    case OperatorKind::kernel: return "kernel";
  }
  return "map";
}

} // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_grid_function_csv(const std::string& path, const Grid& grid,
                             const GridFunction& f) {
  auto out = open_out(path);
  std::fprintf(out.get(), "x,y,re,im\n");
  for (int k = 0; k < grid.spec.node_count(); ++k) {
    const auto p = grid.spec.point(k);
    std::fprintf(out.get(), "%.17g,%.17g,%.17g,%.17g\n", p[0], p[1],
                 f.values[k].real(), f.values[k].imag());
  }
}

void write_boundary_trace_csv(const std::string& path, const Grid& grid,
                              const BoundaryTrace& t) {
  auto out = open_out(path);
  std::fprintf(out.get(), "s,x,y,re,im\n");
  for (int j = 0; j < grid.boundary.count(); ++j) {
    std::fprintf(out.get(), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 grid.boundary.arclength[j], grid.boundary.points[j][0],
                 grid.boundary.points[j][1], t.values[j].real(),
                 t.values[j].imag());
  }
}

void write_boundary_operator_csv(const std::string& path,
                                 const BoundaryOperator& M) {
  auto out = open_out(path);
  std::fprintf(out.get(), "i,j,re,im\n");
  for (int i = 0; i < M.dim(); ++i) {
    for (int j = 0; j < M.dim(); ++j) {
      std::fprintf(out.get(), "%d,%d,%.17g,%.17g\n", i, j, M.K(i, j).real(),
                   M.K(i, j).imag());
    }
  }
}

void write_boundary_operator_sidecar(const std::string& path,
                                     const BoundaryOperator& M) {
  nlohmann::json j;
  j["alpha"] = M.alpha;
  j["E"] = M.E;
  j["n"] = M.spec.n;
  j["kind"] = kind_name(M.kind);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

void write_green_csv(const std::string& path, const GreenColumns& G) {
  auto out = open_out(path);
  std::fprintf(out.get(), "src_i,src_j,x_i,x_j,re,im\n");
  for (size_t s = 0; s < G.sources.size(); ++s) {
    const auto sc = lattice_coords(G.spec, G.sources[s]);
    const Vector& col = G.columns[s].values;
    for (int k = 0; k < G.spec.node_count(); ++k) {
      const auto tc = lattice_coords(G.spec, k);
      std::fprintf(out.get(), "%d,%d,%d,%d,%.17g,%.17g\n", sc[0], sc[1], tc[0],
                   tc[1], col[k].real(), col[k].imag());
    }
  }
}

void write_reconstruction_csv(
    const std::string& path,
    const std::vector<ReconstructionRecord>& records) {
  auto out = open_out(path);
  std::fprintf(out.get(), "x,y,v_true_diff,v_est,err,lambda\n");
  for (const auto& r : records) {
    std::fprintf(out.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.x, r.y,
                 r.v_true_diff, r.v_est, r.err, r.lambda);
  }
}

void write_rate_csv(const std::string& path, const RateTable& table) {
  auto out = open_out(path);
  std::fprintf(out.get(), "lambda,max_err,fit_p\n");
  for (const auto& row : table.rows) {
    std::fprintf(out.get(), "%.17g,%.17g,%.17g\n", row.lambda, row.max_err,
                 table.fit_p);
  }
}

void write_sweep_csv(const std::string& path,
                     const std::vector<StabilityRecord>& records) {
  auto out = open_out(path);
  std::fprintf(out.get(), "eps,alpha,delta_alpha,sup_diff,C_fit,s_fit\n");
  for (const auto& r : records) {
    std::fprintf(out.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eps,
                 r.alpha, r.delta_alpha, r.sup_diff, r.C_fit, r.s_fit);
  }
}

void write_stability_report_json(const std::string& path,
                                 const StabilitySweepResult& sweep,
                                 const std::vector<MinOverAlphaRow>& min_rows) {
  nlohmann::json j;
  j["record_count"] = sweep.records.size();
  j["skipped"] = nlohmann::json::array();
  for (const auto& s : sweep.skipped) {
    j["skipped"].push_back(
        {{"eps", s.eps}, {"alpha", s.alpha}, {"reason", s.reason}});
  }
  j["min_over_alpha"] = nlohmann::json::array();
  for (const auto& r : min_rows) {
    j["min_over_alpha"].push_back(
        {{"eps", r.eps}, {"alpha", r.alpha}, {"value", r.value}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

void write_eig_sweep_csv(const std::string& path, const EigSweepResult& sweep) {
  auto out = open_out(path);
  std::fprintf(out.get(), "alpha,sigma,flagged\n");
  for (const auto& p : sweep.points) {
    std::fprintf(out.get(), "%.17g,%.17g,%d\n", p.alpha, p.sigma,
                 p.flagged ? 1 : 0);
  }
}

void write_flagged_csv(const std::string& path, const EigSweepResult& sweep) {
  auto out = open_out(path);
  std::fprintf(out.get(), "alpha,sigma\n");
  for (const auto& f : sweep.flagged) {
    std::fprintf(out.get(), "%.17g,%.17g\n", f.alpha, f.sigma);
  }
}

void write_residual_suite_csv(const std::string& path,
                              const std::vector<ResidualRow>& rows) {
  auto out = open_out(path);
  std::fprintf(out.get(), "check,residual,threshold,pass\n");
  for (const auto& r : rows) {
    std::fprintf(out.get(), "%s,%.17g,%.17g,%d\n", r.check.c_str(), r.residual,
                 r.threshold, r.pass ? 1 : 0);
  }
}

void write_identity_report_csv(const std::string& path,
                               const IdentityCheckReport& report) {
  auto out = open_out(path);
  std::fprintf(out.get(), "pair,residual\n");
  for (size_t i = 0; i < report.residuals.size(); ++i) {
    std::fprintf(out.get(), "%zu,%.17g\n", i, report.residuals[i]);
  }
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_hash, double wall_time_seconds) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["versions"] = {
      {"rrmap", RRMAP_VERSION},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__},
  };
  j["wall_time_seconds"] = wall_time_seconds;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

} // namespace rrmap
