// rrmap: command-line driver for the Robin-to-Robin impedance map
// experiments. Every command reads one plain-text config file, writes CSV
// artifacts plus a manifest.json into the configured output directory, and
// maps the library error taxonomy onto documented exit codes.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <rrmap/cgo2d.hpp>
#include <rrmap/domain.hpp>
#include <rrmap/errors.hpp>
#include <rrmap/experiments.hpp>
#include <rrmap/forward.hpp>
#include <rrmap/green.hpp>
#include <rrmap/impedance.hpp>
#include <rrmap/io.hpp>
#include <rrmap/potentials.hpp>

namespace {

using namespace rrmap;

constexpr double kPi = 3.14159265358979323846;

// ---------- config file ----------

// Flat `key = value` grammar with [section] headers and '#' comments.
// Values keep their raw text; list values use ',' between numbers and ';'
// between tuples. Keys are case-sensitive and may not repeat.
struct Config {
  std::map<std::string, std::string> kv; // "section.key" -> trimmed value

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  const std::string& require(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("config: missing key '" + key + "'");
    return it->second;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  }

  double require_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int require_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t require_seed(const std::string& key) const;
  std::vector<double> require_list(const std::string& key) const;
  std::vector<std::array<double, 2>> require_tuples(const std::string& key) const;
};

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& raw, const std::string& key) {
  const std::string t = trim(raw);
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a number: '" + t + "'");
  }
  if (used != t.size())
    throw ConfigError("config: trailing text after number in '" + key + "'");
  return x;
}

double Config::require_double(const std::string& key) const {
  return parse_double(require(key), key);
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? require_double(key) : fallback;
}

int Config::require_int(const std::string& key) const {
  const double x = require_double(key);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw ConfigError("config: key '" + key + "' must be an integer");
  return i;
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? require_int(key) : fallback;
}

std::uint64_t Config::require_seed(const std::string& key) const {
  const std::string t = trim(require(key));
  std::size_t used = 0;
  std::uint64_t s = 0;
  try {
    s = std::stoull(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a seed: '" + t + "'");
  }
  if (used != t.size())
    throw ConfigError("config: trailing text after seed in '" + key + "'");
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<double> Config::require_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& part : split(require(key), ','))
    out.push_back(parse_double(part, key));
  if (out.empty()) throw ConfigError("config: empty list in '" + key + "'");
  return out;
}

std::vector<std::array<double, 2>> Config::require_tuples(
    const std::string& key) const {
  std::vector<std::array<double, 2>> out;
  for (const std::string& tuple : split(require(key), ';')) {
    std::vector<std::string> parts = split(tuple, ',');
    if (parts.size() != 2)
      throw ConfigError("config: key '" + key + "' expects 'x,y' tuples");
    out.push_back({parse_double(parts[0], key), parse_double(parts[1], key)});
  }
  if (out.empty()) throw ConfigError("config: empty tuple list in '" + key + "'");
  return out;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  Config cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: bad section header at line " +
                          std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config: empty section name at line " +
                          std::to_string(lineno));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " +
                        std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || section.empty())
      throw ConfigError("config: key outside a section at line " +
                        std::to_string(lineno));
    const std::string full = section + "." + key;
    if (!cfg.kv.emplace(full, value).second)
      throw ConfigError("config: duplicate key '" + full + "'");
  }
  return cfg;
}

// FNV-1a over the sorted canonical lines "section.key=value\n" with all
// whitespace stripped from values, so the hash is invariant under key order,
// spacing, and comments, and changes exactly when a value changes.
std::string config_hash(const Config& cfg) {
  std::vector<std::string> lines;
  for (const auto& [key, value] : cfg.kv) {
    std::string v;
    for (char c : value)
      if (!std::isspace(static_cast<unsigned char>(c))) v.push_back(c);
    lines.push_back(key + "=" + v + "\n");
  }
  std::sort(lines.begin(), lines.end());
  std::uint64_t h = 1469598103934665603ull;
  for (const std::string& l : lines)
    for (char c : l) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------- shared pieces ----------

PotentialSpec potential_spec(const Config& cfg, const std::string& section) {
  PotentialSpec spec;
  const std::string family = trim(cfg.require(section + ".family"));
  if (family == "zero") {
    spec.family = PotentialFamily::zero;
    return spec;
  }
  if (family == "gaussian-bump")
    spec.family = PotentialFamily::gaussian_bump;
  else if (family == "multi-bump")
    spec.family = PotentialFamily::multi_bump;
  else
    throw ConfigError("config: unknown potential family '" + family + "'");
  spec.centers = cfg.require_tuples(section + ".centers");
  spec.amplitudes = cfg.require_list(section + ".amplitudes");
  spec.widths = cfg.require_list(section + ".widths");
  spec.margin = cfg.get_double(section + ".margin", spec.margin);
  return spec;
}

std::filesystem::path out_dir(const Config& cfg) {
  std::filesystem::path dir(cfg.get("run.out_dir", "."));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec && !std::filesystem::is_directory(dir))
    throw ConfigError("config: cannot create output directory '" +
                      dir.string() + "'");
  return dir;
}

std::string artifact(const std::filesystem::path& dir, const char* name) {
  return (dir / name).string();
}

int workers_of(const Config& cfg) {
  const int w = cfg.get_int("run.workers", 1);
  if (w < 1) throw ConfigError("config: run.workers must be >= 1");
  return w;
}

// Seeded interior nodes at least two cells away from the boundary, pairwise
// distinct; used for the seeded residual checks.
std::vector<int> seeded_interior_nodes(const GridSpec& spec, std::uint64_t seed,
                                       int count) {
  std::mt19937 rng(static_cast<unsigned>(seed ^ 0x9e3779b97f4a7c15ull));
  std::uniform_int_distribution<int> pick(2, spec.n - 3);
  std::vector<int> nodes;
  while (static_cast<int>(nodes.size()) < count) {
    const int k = spec.interior_index(pick(rng), pick(rng));
    if (std::find(nodes.begin(), nodes.end(), k) == nodes.end())
      nodes.push_back(k);
  }
  return nodes;
}

// ---------- commands ----------

void run_forward(const Config& cfg, const std::filesystem::path& dir) {
  Grid g = build_grid(cfg.require_int("grid.n"));
  GridFunction v = make_potential(g, potential_spec(cfg, "potential"));
  const double E = cfg.require_double("problem.E");
  const double alpha = cfg.require_double("problem.alpha");
  auto data = standard_boundary_data(g, cfg.require_seed("problem.seed"));
  const int idx = cfg.get_int("problem.trace_index", 0);
  if (idx < 0 || idx >= static_cast<int>(data.size()))
    throw ConfigError("config: problem.trace_index out of range");
  SolveReport report = robin_solve(g, {v, E, alpha}, data[idx]);
  write_grid_function_csv(artifact(dir, "psi.csv"), g, report.solution);
}

void run_map(const Config& cfg, const std::filesystem::path& dir) {
  Grid g = build_grid(cfg.require_int("grid.n"));
  GridFunction v = make_potential(g, potential_spec(cfg, "potential"));
  const double E = cfg.require_double("problem.E");
  const double alpha = cfg.require_double("problem.alpha");
  BoundaryOperator M = assemble_map(g, {v, E, alpha}, workers_of(cfg));
  write_boundary_operator_csv(artifact(dir, "map.csv"), M);
  write_boundary_operator_sidecar(artifact(dir, "map.json"), M);
}

void run_check_identities(const Config& cfg,
                          const std::filesystem::path& dir) {
  Grid g = build_grid(cfg.require_int("grid.n"));
  GridFunction v = make_potential(g, potential_spec(cfg, "potential"));
  GridFunction zero(g.spec);
  const double E = cfg.require_double("problem.E");
  const double alpha = cfg.get_double("problem.alpha", kPi / 4);
  const std::uint64_t seed = cfg.require_seed("problem.seed");
  const int workers = workers_of(cfg);
  std::vector<ResidualRow> rows;

  // Trace identities for a solved field, scale-free in the field size.
  BoundaryOperator M = assemble_map(g, {v, E, alpha}, workers);
  auto data = standard_boundary_data(g, seed);
  SolveReport solve = robin_solve(g, {v, E, alpha}, data[1]);
  auto [r1, r2] = trace_identities_residual(g, M, solve.solution);
  double scale = 0.0;
  for (int k = 0; k < solve.solution.size(); ++k)
    scale = std::max(scale, std::abs(solve.solution[k]));
  rows.push_back({"trace_identities", std::max(r1, r2) / std::max(1.0, scale),
                  1e-6, false});

  // Composition at the provably regular complementary pair.
  BoundaryOperator M0 = assemble_map(g, {v, E, 0.0}, workers);
  BoundaryOperator M90 = assemble_map(g, {v, E, kPi / 2}, workers);
  rows.push_back({"composition", composition_residual(M0, M90), 1e-6, false});

  // Kernel symmetry away from corners; first-order boundary stencils keep
  // this at O(h), not at roundoff.
  rows.push_back(
      {"symmetry", symmetry_residual(M), 2.0 * g.spec.h, false});

  // Kernel relation needs sin(alpha) != 0; fall back to the Neumann map.
  const double alpha_k = std::abs(std::sin(alpha)) < 1e-12 ? kPi / 2 : alpha;
  std::vector<int> boundary_sources(g.spec.boundary_count());
  for (int j = 0; j < g.spec.boundary_count(); ++j)
    boundary_sources[j] = g.spec.interior_count() + j;
  const BoundaryOperator& Mk =
      alpha_k == alpha ? M : M90;
  GreenColumns Gb = green_columns(g, {v, E, alpha_k}, boundary_sources);
  rows.push_back({"kernel_relation", kernel_relation_residual(Mk, Gb, alpha_k),
                  1e-8, false});

  // Seeded interior sources two cells inside, where the discrete Green
  // function is symmetric to roundoff.
  std::vector<int> interior = seeded_interior_nodes(g.spec, seed, 6);
  GreenColumns Gv = green_columns(g, {v, E, alpha}, interior);
  rows.push_back(
      {"green_symmetry", green_symmetry_residual(Gv), 1e-8, false});

  GreenColumns G0 = green_columns(g, {zero, E, alpha}, interior);
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < interior.size(); ++a)
    for (std::size_t b = a + 1; b < interior.size(); ++b)
      pairs.push_back({interior[a], interior[b]});
  rows.push_back({"resolvent",
                  resolvent_difference_residual(g, Gv, G0, v, zero, pairs),
                  1e-6, false});

  for (ResidualRow& row : rows) row.pass = row.residual <= row.threshold;
  write_residual_suite_csv(artifact(dir, "residual_suite.csv"), rows);
}

void run_eig_sweep(const Config& cfg, const std::filesystem::path& dir) {
  Grid g = build_grid(cfg.require_int("grid.n"));
  GridFunction v = make_potential(g, potential_spec(cfg, "potential"));
  const double E = cfg.require_double("problem.E");
  const int count = cfg.get_int("eig.alpha_count", 64);
  if (count < 2) throw ConfigError("config: eig.alpha_count must be >= 2");
  std::vector<double> alphas(count);
  for (int k = 0; k < count; ++k) alphas[k] = kPi * k / count;
  EigSweepOptions opt;
  opt.flag_threshold = cfg.get_double("eig.flag_threshold", opt.flag_threshold);
  opt.refine_width = cfg.get_double("eig.refine_width", opt.refine_width);
  opt.sigma.max_iterations =
      cfg.get_int("eig.sigma_max_iterations", opt.sigma.max_iterations);
  EigSweepResult sweep = eig_sweep(g, v, E, alphas, opt);
  write_eig_sweep_csv(artifact(dir, "eig_sweep.csv"), sweep);
  write_flagged_csv(artifact(dir, "flagged.csv"), sweep);
}

void run_alessandrini(const Config& cfg, const std::filesystem::path& dir) {
  Grid g = build_grid(cfg.require_int("grid.n"));
  GridFunction v1 = make_potential(g, potential_spec(cfg, "potential"));
  GridFunction v2 = make_potential(g, potential_spec(cfg, "potential2"));
  const double E = cfg.require_double("problem.E");
  const double alpha = cfg.require_double("problem.alpha");
  auto pairs =
      make_data_pairs(standard_boundary_data(g, cfg.require_seed("problem.seed")));
  IdentityCheckReport report =
      alessandrini_check(g, v1, v2, E, alpha, pairs, workers_of(cfg));
  write_identity_report_csv(artifact(dir, "identity_report.csv"), report);
}

void run_reconstruct(const Config& cfg, const std::filesystem::path& dir) {
  Grid g = build_grid(cfg.require_int("grid.n"));
  GridFunction v1 = make_potential(g, potential_spec(cfg, "potential"));
  GridFunction v2 = make_potential(g, potential_spec(cfg, "potential2"));
  auto z0_tuples = cfg.require_tuples("cgo.z0");
  std::vector<Complex> z0_list;
  for (const auto& t : z0_tuples) z0_list.emplace_back(t[0], t[1]);
  std::vector<double> lambdas = cfg.require_list("cgo.lambda");
  CgoParams base;
  base.z0 = z0_list.front();
  base.lambda = Complex(lambdas.front(), 0.0);
  base.tol = cfg.get_double("cgo.tol", base.tol);
  base.max_iterations = cfg.get_int("cgo.max_iterations", base.max_iterations);
  base.lambda_min = cfg.get_double("cgo.lambda_min", base.lambda_min);
  RateTable table = rate_check(g, z0_list, lambdas, v1, v2, base);
  write_reconstruction_csv(artifact(dir, "reconstruction.csv"), table.records);
  write_rate_csv(artifact(dir, "rate.csv"), table);
}

void run_stability(const Config& cfg, const std::filesystem::path& dir) {
  Grid g = build_grid(cfg.require_int("grid.n"));
  PotentialPairFamily family;
  family.base = potential_spec(cfg, "potential");
  family.perturbation = potential_spec(cfg, "potential2");
  family.eps = cfg.require_list("sweep.eps");
  family.c2_bound = cfg.require_double("sweep.c2_bound");
  const double E = cfg.require_double("problem.E");
  std::vector<double> alphas = cfg.require_list("sweep.alpha_grid");
  StabilitySweepResult sweep =
      stability_sweep(g, family, E, alphas, workers_of(cfg));
  std::vector<MinOverAlphaRow> min_rows = min_over_alpha(sweep.records);
  write_sweep_csv(artifact(dir, "sweep.csv"), sweep.records);
  write_stability_report_json(artifact(dir, "stability_report.json"), sweep,
                              min_rows);
}

int dispatch(const std::string& command, const Config& cfg) {
  const std::filesystem::path dir = out_dir(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  if (command == "forward")
    run_forward(cfg, dir);
  else if (command == "map")
    run_map(cfg, dir);
  else if (command == "check-identities")
    run_check_identities(cfg, dir);
  else if (command == "eig-sweep")
    run_eig_sweep(cfg, dir);
  else if (command == "alessandrini")
    run_alessandrini(cfg, dir);
  else if (command == "reconstruct")
    run_reconstruct(cfg, dir);
  else if (command == "stability")
    run_stability(cfg, dir);
  else
    throw ConfigError("unknown command '" + command + "'");
  const std::chrono::duration<double> wall =
      std::chrono::steady_clock::now() - t0;
  write_manifest((dir / "manifest.json").string(), command, config_hash(cfg),
                 wall.count());
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::spectral_condition:
      return 3;
    case ErrorKind::convergence:
      return 4;
    default:
      return 2;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robin-to-Robin impedance map toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"forward", "solve one Robin problem and write the field"},
      {"map", "assemble the boundary map at (v, E, alpha)"},
      {"check-identities", "run the structural residual suite"},
      {"eig-sweep", "scan sigma_min over alpha and flag dips"},
      {"alessandrini", "boundary-vs-volume identity over a data set"},
      {"reconstruct", "pointwise reconstruction with a rate fit"},
      {"stability", "map-difference stability sweep over a family"},
  };
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help() << std::flush;
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Config cfg = load_config(config_path);
    return dispatch(command, cfg);
  } catch (const Error& e) {
    std::cerr << "rrmap " << command << ": " << e.what() << std::endl;
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "rrmap " << command << ": " << e.what() << std::endl;
    return 2;
  }
}
