#include "hkcg/cli.hpp"

#include <omp.h>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hkcg/diagnostics.hpp"
#include "hkcg/ensemble_io.hpp"
#include "hkcg/error.hpp"
#include "hkcg/extension.hpp"

namespace hkcg {

namespace {

using json = nlohmann::json;

struct Params {
  int dim = 1;
  int group_n = 2;
  int sobolev_k = 2;
  int modes = 16;
  int grid = 64;
  int steps = 256;
  double t_end = 1.0;
  std::int64_t samples = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> checks;
  double sigma = 1.0;
  int threads = 0;
  std::uint64_t stream = 0;
  std::optional<std::vector<double>> lattice;

  // Whether the value came from the command line or the config file;
  // verify falls back to per-check defaults otherwise.
  bool steps_set = false;
  bool t_end_set = false;
  bool samples_set = false;
};

const std::vector<std::string> kChecks{"drift",      "character", "covariance", "weak-order",     "strong-order",
                                       "regularity", "cocycle",   "extension",  "mixing", "left-invariance"};

template <class T>
void take(const json& cfg, const char* key, T& dst) {
  if (cfg.contains(key)) dst = cfg.at(key).get<T>();
}

void apply_config_file(const std::string& path, Params& p) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw PreconditionError("config file " + path + " is not valid JSON: " + e.what());
  }
  require(cfg.is_object(), "config file " + path + " must hold a JSON object");
  static const std::vector<std::string> known{"dim",   "group_n", "sobolev_k", "modes",   "grid",   "steps",
                                              "t_end", "samples", "seed",      "out",     "check",  "sigma",
                                              "threads", "stream", "lattice"};
  for (const auto& [key, value] : cfg.items())
    require(std::find(known.begin(), known.end(), key) != known.end(), "config file " + path + ": unknown key '" + key + "'");
  try {
    take(cfg, "dim", p.dim);
    take(cfg, "group_n", p.group_n);
    take(cfg, "sobolev_k", p.sobolev_k);
    take(cfg, "modes", p.modes);
    take(cfg, "grid", p.grid);
    take(cfg, "out", p.out);
    take(cfg, "sigma", p.sigma);
    take(cfg, "threads", p.threads);
    take(cfg, "stream", p.stream);
    take(cfg, "seed", p.seed);
    if (cfg.contains("steps")) {
      p.steps = cfg.at("steps").get<int>();
      p.steps_set = true;
    }
    if (cfg.contains("t_end")) {
      p.t_end = cfg.at("t_end").get<double>();
      p.t_end_set = true;
    }
    if (cfg.contains("samples")) {
      p.samples = cfg.at("samples").get<std::int64_t>();
      p.samples_set = true;
    }
    if (cfg.contains("check")) {
      const json& c = cfg.at("check");
      p.checks = c.is_array() ? c.get<std::vector<std::string>>() : std::vector<std::string>{c.get<std::string>()};
    }
    if (cfg.contains("lattice")) p.lattice = cfg.at("lattice").get<std::vector<double>>();
  } catch (const json::type_error& e) {
    throw PreconditionError("config file " + path + ": wrong value type: " + e.what());
  }
}

SdeConfig make_config(const Params& p) {
  require(p.steps >= 1, "--steps must be >= 1 (got " + std::to_string(p.steps) + ")");
  require(p.t_end > 0, "--t-end must be > 0");
  auto lie = std::make_shared<const LieBasis>(p.group_n);
  auto basis = std::make_shared<const SpectralBasis>(TorusGrid(p.dim, p.grid), p.modes);
  CovarianceSpec spec = p.sobolev_k == 0 ? CovarianceSpec::white_noise_control(basis, lie)
                                         : CovarianceSpec(p.sobolev_k, basis, lie);
  SdeConfig cfg{spec, p.steps, p.t_end, p.seed};
  cfg.validate();
  return cfg;
}

LatticeSpec make_lattice(const Params& p) {
  const int dim_z = central_dimension(p.dim, p.group_n);
  if (!p.lattice) return LatticeSpec::identity(dim_z);
  require(p.lattice->size() == static_cast<std::size_t>(dim_z) * dim_z,
          "lattice must be a row-major " + std::to_string(dim_z) + "x" + std::to_string(dim_z) + " matrix");
  return LatticeSpec::from_row_major(dim_z, *p.lattice);
}

std::string handle_json(const EnsembleHandle& h) {
  json j;
  j["manifest"] = h.manifest_path.string();
  j["payload"] = h.payload_path.string();
  j["n_samples"] = h.manifest.n_samples;
  return j.dump() + "\n";
}

int cmd_sample(const Params& p, std::ostream& out) {
  const SdeConfig cfg = make_config(p);
  const std::vector<FieldState> field{sample_field(cfg, substream(cfg.seed, p.stream), Exec::parallel)};
  const EnsembleHandle h = write_ensemble(p.out.empty() ? "sample" : p.out, manifest_for(cfg, 1, p.stream), field);
  out << handle_json(h);
  return kExitOk;
}

int cmd_ensemble(const Params& p, std::ostream& out) {
  require(p.samples >= 1, "--samples must be >= 1");
  const SdeConfig cfg = make_config(p);
  const EnsembleHandle h =
      sample_ensemble(cfg, static_cast<int>(p.samples), p.out.empty() ? "ensemble" : p.out, Exec::parallel);
  out << handle_json(h);
  return kExitOk;
}

int cmd_extend(const Params& p, std::ostream& out) {
  require(p.samples >= 1, "--samples must be >= 1");
  const SdeConfig cfg = make_config(p);
  const LatticeSpec lattice = make_lattice(p);
  std::vector<FieldState> fields;
  std::vector<std::vector<double>> central;
  for (std::int64_t i = 0; i < p.samples; ++i) {
    ExtendedElement e = sample_extension(cfg, lattice, substream(cfg.seed, static_cast<std::uint64_t>(i)));
    fields.push_back(std::move(e.field));
    central.push_back(std::move(e.central.coords));
  }
  EnsembleManifest m = manifest_for(cfg, static_cast<int>(p.samples));
  const Eigen::MatrixXd& gens = lattice.generators();
  std::vector<double> row_major;
  for (int r = 0; r < gens.rows(); ++r)
    for (int c = 0; c < gens.cols(); ++c) row_major.push_back(gens(r, c));
  m.lattice = row_major;
  m.central = central;
  out << handle_json(write_ensemble(p.out.empty() ? "extension" : p.out, std::move(m), fields));
  return kExitOk;
}

AlgebraField read_field(const std::string& path, const LieBasis& lie, std::optional<TorusGrid>& grid) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field file " + path);
  json j;
  try {
    j = json::parse(in);
    const int d = j.at("dim").get<int>();
    const int p_axis = j.at("grid").get<int>();
    const int n = j.at("group_n").get<int>();
    require(n == lie.n(), "field file " + path + ": group_n " + std::to_string(n) + " differs from --group-n " +
                              std::to_string(lie.n()));
    const TorusGrid g(d, p_axis);
    if (grid) require(*grid == g, "field files are defined on different grids");
    grid = g;
    const auto values = j.at("values").get<std::vector<double>>();
    require(values.size() == static_cast<std::size_t>(g.size()) * lie.dim(),
            "field file " + path + ": values must hold P^d * (n^2 - 1) = " +
                std::to_string(static_cast<std::size_t>(g.size()) * lie.dim()) + " numbers");
    AlgebraField f(g, lie.dim());
    std::copy(values.begin(), values.end(), f.data().begin());
    return f;
  } catch (const json::exception& e) {
    throw PreconditionError("field file " + path + ": " + e.what());
  }
}

int cmd_cocycle(const Params& p, const std::string& eta_path, const std::string& eta1_path, std::ostream& out) {
  const LieBasis lie(p.group_n);
  std::optional<TorusGrid> grid;
  const AlgebraField eta = read_field(eta_path, lie, grid);
  const AlgebraField eta1 = read_field(eta1_path, lie, grid);
  const CohomologyVector c = cocycle(lie, eta, eta1);
  json j;
  j["axes"] = c.axes;
  j["coords"] = c.coords;
  j["leibniz_residual"] = leibniz_check(lie, eta, eta1);
  out << j.dump() << "\n";
  return kExitOk;
}

std::vector<StatReport> run_check(const std::string& name, Params p) {
  auto with = [&p](double t_end, int steps, std::int64_t samples) {
    if (!p.t_end_set) p.t_end = t_end;
    if (!p.steps_set) p.steps = steps;
    if (!p.samples_set) p.samples = samples;
  };
  if (name == "drift") {
    with(1.0, 1000, 1);
    const SdeConfig cfg = make_config(p);
    return {drift_report(sample_field(cfg, substream(cfg.seed, 0), Exec::parallel))};
  }
  if (name == "character") {
    with(1.0, 256, 20000);
    return {character_test(make_config(p), 0, p.samples)};
  }
  if (name == "covariance") {
    with(0.05, 8, 2000);
    const SdeConfig cfg = make_config(p);
    return covariance_test(cfg, dominant_pairs(cfg.spec), p.samples);
  }
  if (name == "weak-order") {
    with(16.0, 64, 4000000);
    return {weak_order_test(make_config(p), {8, 16, 32, 64}, p.samples).report};
  }
  if (name == "strong-order") {
    with(1.0, 1024, 2000);
    return {strong_order_test(make_config(p), {64, 128, 256, 512, 1024}, p.samples).report};
  }
  if (name == "regularity") {
    RegularityOptions opt;
    opt.d = p.dim;
    opt.n = p.group_n;
    opt.seed = p.seed;
    if (p.samples_set) opt.n_samples = p.samples;
    if (p.t_end_set) opt.t_end = p.t_end;
    if (p.steps_set) opt.n_steps = p.steps;
    return regularity_probe(opt);
  }
  if (name == "cocycle") {
    const LieBasis lie(p.group_n);
    const TorusGrid grid(p.dim, p.grid);
    const int band = std::max(1, std::min(p.modes, (p.grid - 1) / 4));
    return cocycle_suite(lie, grid, band, 100, p.seed);
  }
  if (name == "extension") {
    with(1.0, 32, 10000);
    return extension_suite(make_config(p), make_lattice(p), p.samples);
  }
  if (name == "mixing") {
    if (!p.samples_set) p.samples = 10000;
    return central_mixing_test(make_lattice(p), {0.1, 1.0, 10.0}, 0.05, p.sigma, p.samples, p.seed);
  }
  if (name == "left-invariance") {
    with(1.0, 64, 5000);
    const SdeConfig cfg = make_config(p);
    const LieBasis& lie = cfg.spec.lie();
    AlgebraElement x{Eigen::VectorXd::Zero(lie.dim())};
    for (int a = 0; a < lie.dim(); ++a) x.coeffs[a] = 0.9 / (a + 1);
    return {left_invariance_test(cfg, exp_map(lie, x), 0, p.samples)};
  }
  throw PreconditionError("unknown check '" + name + "'");
}

int cmd_verify(const Params& p, std::ostream& out) {
  std::vector<std::string> checks = p.checks.empty() ? std::vector<std::string>{"all"} : p.checks;
  std::vector<std::string> expanded;
  for (const auto& c : checks) {
    if (c == "all") {
      expanded.insert(expanded.end(), kChecks.begin(), kChecks.end());
    } else {
      const std::string name = c == "haar" ? "extension" : c;
      require(std::find(kChecks.begin(), kChecks.end(), name) != kChecks.end(),
              "unknown check '" + c + "' (valid: all, haar, " + [] {
                std::string s;
                for (const auto& k : kChecks) s += (s.empty() ? "" : ", ") + k;
                return s;
              }() + ")");
      expanded.push_back(name);
    }
  }
  std::vector<StatReport> reports;
  for (const auto& name : expanded) {
    auto r = run_check(name, p);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  const std::string text = reports_to_json(reports);
  out << text;
  if (!p.out.empty()) {
    std::ofstream file(p.out, std::ios::binary);
    if (!file) throw IoError("cannot write report " + p.out);
    file << text;
  }
  const bool all_pass = std::all_of(reports.begin(), reports.end(), [](const StatReport& r) { return r.pass; });
  return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heat-kernel measures on current groups: sampling, ensembles and verification", "hkcg"};
  app.require_subcommand(1);

  Params p;
  std::string config_path;
  std::string eta_path, eta1_path;

  auto* o_dim = app.add_option("--dim", p.dim, "torus dimension d (1..3)");
  auto* o_n = app.add_option("--group-n", p.group_n, "SU(n) matrix size");
  auto* o_k = app.add_option("--sobolev-k", p.sobolev_k, "Sobolev exponent k (0 = white-noise control)");
  auto* o_modes = app.add_option("--modes", p.modes, "spectral cutoff M_max");
  auto* o_grid = app.add_option("--grid", p.grid, "grid points per axis P (power of two)");
  auto* o_steps = app.add_option("--steps", p.steps, "time steps");
  auto* o_t = app.add_option("--t-end", p.t_end, "terminal time");
  auto* o_samples = app.add_option("--samples", p.samples, "number of samples");
  auto* o_seed = app.add_option("--seed", p.seed, "root seed");
  auto* o_out = app.add_option("--out", p.out, "output path (ensemble files get .json/.f64le)");
  auto* o_sigma = app.add_option("--sigma", p.sigma, "central Brownian scale");
  auto* o_threads = app.add_option("--threads", p.threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--config", config_path, "JSON config file; command-line flags override it");

  auto* sample = app.add_subcommand("sample", "sample one terminal field");
  auto* o_stream = sample->add_option("--stream", p.stream, "substream index");
  auto* ensemble = app.add_subcommand("ensemble", "sample an ensemble of terminal fields");
  auto* verify = app.add_subcommand("verify", "run diagnostics and print a JSON report");
  std::vector<std::string> cli_checks;
  auto* o_check = verify->add_option("--check", cli_checks, "check name (repeatable): all, drift, character, covariance, "
                                                           "weak-order, strong-order, regularity, cocycle, extension, "
                                                           "mixing, left-invariance");
  auto* cocycle_cmd = app.add_subcommand("cocycle", "evaluate the Killing cocycle on two fields");
  cocycle_cmd->add_option("--eta", eta_path, "first field (JSON)")->required();
  cocycle_cmd->add_option("--eta1", eta1_path, "second field (JSON)")->required();
  auto* extend = app.add_subcommand("extend", "sample the extended measure (field and central coordinates)");
  for (auto* sub : {sample, ensemble, verify, cocycle_cmd, extend}) sub->fallthrough();

  std::vector<const char*> argv{"hkcg"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    // Defaults < config file < command line.
    Params merged;
    if (!config_path.empty()) apply_config_file(config_path, merged);
    auto over = [](const CLI::Option* o, auto& dst, const auto& src) {
      if (o->count() > 0) dst = src;
    };
    over(o_dim, merged.dim, p.dim);
    over(o_n, merged.group_n, p.group_n);
    over(o_k, merged.sobolev_k, p.sobolev_k);
    over(o_modes, merged.modes, p.modes);
    over(o_grid, merged.grid, p.grid);
    over(o_seed, merged.seed, p.seed);
    over(o_out, merged.out, p.out);
    over(o_sigma, merged.sigma, p.sigma);
    over(o_threads, merged.threads, p.threads);
    over(o_stream, merged.stream, p.stream);
    over(o_check, merged.checks, cli_checks);
    if (o_steps->count() > 0) merged.steps = p.steps, merged.steps_set = true;
    if (o_t->count() > 0) merged.t_end = p.t_end, merged.t_end_set = true;
    if (o_samples->count() > 0) merged.samples = p.samples, merged.samples_set = true;

    require(merged.threads >= 0, "--threads must be >= 0");
    if (merged.threads > 0) omp_set_num_threads(merged.threads);

    if (sample->parsed()) return cmd_sample(merged, out);
    if (ensemble->parsed()) return cmd_ensemble(merged, out);
    if (verify->parsed()) return cmd_verify(merged, out);
    if (cocycle_cmd->parsed()) return cmd_cocycle(merged, eta_path, eta1_path, out);
    return cmd_extend(merged, out);
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace hkcg
