// kgr: command-line driver for the damped Klein-Gordon simulator.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dkg/dkg.hpp"

namespace fs = std::filesystem;
using namespace dkg;

namespace {

enum Exit { kOk = 0, kUsage = 2, kIo = 3, kInternal = 4 };

ScenarioSpec load_spec(const std::string& config) {
  return config.empty() ? parse_config_text("") : parse_config_file(config);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

int cmd_ground_state(const std::string& config, int dim, double p, int nodes, bool dim_set, bool p_set, bool nodes_set,
                     const std::string& out, double r_max, double step) {
  auto spec = load_spec(config);
  if (dim_set) spec.set("model.dim", std::to_string(dim));
  if (p_set) spec.set("model.p", format_number(p));
  if (nodes_set) spec.set("initial.nodes", std::to_string(nodes));
  if (spec.dim < 1 || spec.dim > 3) throw UsageError("model.dim must be 1, 2 or 3");
  require_admissible(spec.dim, spec.p);
  const auto q = spec.nodes == 0 ? ground_state(spec.dim, spec.p) : radial_shoot(spec.dim, spec.p, spec.nodes);
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const auto file = dir / (q.label() + "_d" + std::to_string(spec.dim) + "_p" + format_number(spec.p) + ".dkgq");
  {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw IoError("cannot open " + file.string() + " for writing");
    write_profile(os, q, r_max, step);
  }
  nlohmann::json j{{"label", q.label()},         {"dim", spec.dim},
                   {"p", spec.p},                {"nodes", q.nodes},
                   {"central_value", q.central_value()}, {"ode_residual", q.residual},
                   {"path", file.string()}};
  std::cout << j.dump() << '\n';
  return kOk;
}

int cmd_evolve(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed) {
  auto spec = parse_config_file(config);
  if (seed) spec.set("scenario.seed", std::to_string(*seed));
  const fs::path dir = out.empty() ? fs::path("out") / spec.name : fs::path(out);
  const auto r = run_scenario(spec, dir);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << spec.name << ": " << to_string(r.verdict.verdict);
  if (r.verdict.blowup) std::cout << " at t = " << format_number(r.verdict.blowup->time);
  std::cout << " (J = " << r.verdict.J << ", residual = " << csv_number(r.verdict.final_residual)
            << ", |u_t| = " << csv_number(r.verdict.final_ut) << ") -> " << dir.string() << '\n';
  return kOk;
}

int cmd_diagnose(const std::string& checkpoint, const std::string& config, const std::string& out) {
  const auto spec = load_spec(config);
  spec.diagnostics.validate();
  const auto ck = read_checkpoint(fs::path(checkpoint));
  const auto& s = ck.state;
  const auto& g = s.grid;
  const auto tail = frequency_tail(s, spec.diagnostics.tail_frequency(g));
  const auto set = detect_concentration_points(s, spec.diagnostics);
  nlohmann::json j;
  j["t"] = s.t;
  j["norms"] = to_json(norms(s));
  j["energy"] = energy(s);
  j["tail"] = {{"cutoff", spec.diagnostics.tail_frequency(g)}, {"h1_u", tail.h1_u}, {"l2_ut", tail.l2_ut}};
  j["concentration"] = to_json(set, g.dim());
  j["min_separation"] = min_separation(g, set.centers);
  j["exterior_energy"] = set.size() ? nlohmann::json(exterior_energy(s, set.centers, spec.diagnostics.exterior_radius))
                                    : nlohmann::json(nullptr);
  j["exterior_radius"] = spec.diagnostics.exterior_radius;
  const fs::path file = out.empty() ? fs::path("diagnostics.json") : fs::path(out) / "diagnostics.json";
  write_json(file, j);
  std::cout << "t = " << format_number(s.t) << ": " << set.size() << " concentration point(s), tail H1 = "
            << format_number(tail.h1_u) << " -> " << file.string() << '\n';
  return kOk;
}

int cmd_resolve(const std::string& checkpoint, const std::string& config, const std::string& out) {
  const auto spec = load_spec(config);
  spec.diagnostics.validate();
  const auto ck = read_checkpoint(fs::path(checkpoint));
  const auto& s = ck.state;
  const auto library = default_library(s.grid.dim(), s.p);
  const auto d = decompose(s, spec.diagnostics, library);
  const fs::path file = out.empty() ? fs::path("decomposition.json") : fs::path(out) / "decomposition.json";
  write_json(file, to_json(d, s.grid.dim()));
  std::cout << "t = " << format_number(s.t) << ": J = " << d.J << ", global residual = "
            << format_number(d.global_residual) << " -> " << file.string() << '\n';
  for (const auto& c : d.components) {
    std::cout << "  " << c.label << " at";
    for (int a = 0; a < s.grid.dim(); ++a) std::cout << ' ' << format_number(c.center[a]);
    std::cout << " (residual " << format_number(c.residual) << ")\n";
  }
  return kOk;
}

int cmd_sweep(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed, int workers) {
  auto spec = parse_config_file(config);
  if (seed) spec.set("scenario.seed", std::to_string(*seed));
  const fs::path dir = out.empty() ? fs::path("out") / (spec.name + "_sweep") : fs::path(out);
  const auto rows = run_sweep(spec, dir, workers);
  std::error_code ec;
  fs::create_directories(dir, ec);
  {
    std::ofstream os(dir / "sweep.csv");
    if (!os) throw IoError("cannot open " + (dir / "sweep.csv").string() + " for writing");
    write_sweep_csv(os, spec.sweep_parameter, rows);
  }
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++failed;
      std::cerr << "run " << r.index << " (" << spec.sweep_parameter << " = " << r.value << ") failed: " << r.error
                << '\n';
    }
  }
  std::cout << rows.size() << " run(s), " << failed << " failed -> " << (dir / "sweep.csv").string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped focusing Klein-Gordon simulator and soliton-resolution diagnostics"};
  app.require_subcommand(1);

  std::string config, out, checkpoint;
  std::optional<std::uint64_t> seed;
  int workers = 1;

  auto* gs = app.add_subcommand("ground-state", "solve for an equilibrium profile and save it (DKGQ)");
  int dim = 1, nodes = 0;
  double p = 3.0, r_max = 40.0, step = 1e-3;
  gs->add_option("--config", config, "scenario file supplying model.dim, model.p, initial.nodes");
  auto* dim_opt = gs->add_option("--dim", dim, "spatial dimension")->check(CLI::Range(1, 3));
  auto* p_opt = gs->add_option("--p", p, "nonlinearity exponent");
  auto* nodes_opt = gs->add_option("--nodes", nodes, "sign changes of the radial profile")->check(CLI::NonNegativeNumber);
  gs->add_option("--out", out, "output directory (default .)");
  gs->add_option("--r-max", r_max, "largest tabulated radius")->check(CLI::PositiveNumber);
  gs->add_option("--step", step, "radial sampling step")->check(CLI::PositiveNumber);

  auto* ev = app.add_subcommand("evolve", "run a scenario and write series, decompositions and verdict");
  ev->add_option("--config", config, "scenario file")->required();
  ev->add_option("--out", out, "output directory (default out/<name>)");
  ev->add_option("--seed", seed, "seed for random perturbations");

  auto* dg = app.add_subcommand("diagnose", "norms, frequency tail, concentration points of a checkpoint");
  dg->add_option("checkpoint", checkpoint, "DKGC file")->required();
  dg->add_option("--config", config, "scenario file supplying [diagnostics]");
  dg->add_option("--out", out, "output directory (default .)");

  auto* rs = app.add_subcommand("resolve", "decompose a checkpoint into matched equilibria");
  rs->add_option("checkpoint", checkpoint, "DKGC file")->required();
  rs->add_option("--config", config, "scenario file supplying [diagnostics]");
  rs->add_option("--out", out, "output directory (default .)");

  auto* sw = app.add_subcommand("sweep", "run a scenario over sweep.values of sweep.parameter");
  sw->add_option("--config", config, "scenario file with a [sweep] section")->required();
  sw->add_option("--out", out, "output directory (default out/<name>_sweep)");
  sw->add_option("--seed", seed, "seed for random perturbations");
  sw->add_option("--workers", workers, "parallel runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gs)
      return cmd_ground_state(config, dim, p, nodes, dim_opt->count() > 0, p_opt->count() > 0, nodes_opt->count() > 0,
                              out, r_max, step);
    if (*ev) return cmd_evolve(config, out, seed);
    if (*dg) return cmd_diagnose(checkpoint, config, out);
    if (*rs) return cmd_resolve(checkpoint, config, out);
    if (*sw) return cmd_sweep(config, out, seed, workers);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
