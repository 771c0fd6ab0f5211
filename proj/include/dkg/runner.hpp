#pragma once

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dkg/report.hpp"
#include "dkg/scenario.hpp"

namespace dkg {

struct RunReport {
  ScenarioSpec spec;
  std::vector<SeriesRow> rows;
  TrichotomyVerdict verdict;
  std::optional<GoodTime> good_time;
  std::vector<std::string> warnings;
  std::optional<FieldState> final_state;
  std::string started_utc;
  double wall_seconds = 0.0;
};

namespace detail {

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  return os;
}

}  // namespace detail

/// series.csv, decomposition.json, verdict.json, scenario.ini and final.dkgc.
inline void write_run_files(const RunReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const int dim = r.spec.dim;

  {
    auto os = detail::open_out(dir / "series.csv");
    write_series_csv(os, r.rows);
    if (!os) throw IoError("write failed: series.csv");
  }
  {
    auto os = detail::open_out(dir / "scenario.ini");
    os << r.spec.echo();
  }
  {
    nlohmann::json j;
    j["scenario"] = r.spec.name;
    auto list = nlohmann::json::array();
    for (const auto& row : r.rows)
      if (row.decomposition) list.push_back(to_json(*row.decomposition, dim));
    j["decompositions"] = list;
    auto os = detail::open_out(dir / "decomposition.json");
    os << j.dump(2) << '\n';
  }
  {
    auto j = to_json(r.verdict);
    j["scenario"] = r.spec.name;
    j["seed"] = r.spec.seed;
    j["t_end"] = r.rows.empty() ? 0.0 : r.rows.back().sample.t;
    j["samples"] = r.rows.size();
    if (r.good_time)
      j["good_time"] = {{"window", {r.good_time->window_lo, r.good_time->window_hi}},
                        {"t", r.good_time->t},
                        {"ut_l2", r.good_time->ut_l2}};
    j["warnings"] = r.warnings;
    j["started_utc"] = r.started_utc;
    j["wall_seconds"] = r.wall_seconds;
    auto os = detail::open_out(dir / "verdict.json");
    os << j.dump(2) << '\n';
  }
  if (r.final_state) write_checkpoint(dir / "final.dkgc", *r.final_state, r.spec.evolution.dt);
}

/// Evolve a scenario with per-sample diagnostics and classify the outcome.
/// Writes the run files when `out` is given.
inline RunReport run_scenario(ScenarioSpec spec, const std::optional<std::filesystem::path>& out = std::nullopt) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunReport r;
  r.started_utc = detail::utc_now();
  if (spec.kind == InitialKind::FromCheckpoint) (void)adopt_checkpoint(spec);
  spec.validate();
  auto init = make_initial_data(spec);
  r.warnings = std::move(init.warnings);

  const auto g = spec.grid();
  const auto cfg = spec.evolution_config(init.state.t);
  (void)step_count(cfg);  // whole number of steps from the start time
  const auto library = default_library(spec.dim, spec.p);
  const auto embedded = embed_library(g, library);
  for (std::size_t e = 0; e < library.size(); ++e)
    if (!embedded[e]) r.warnings.push_back(library[e].label() + " does not fit the box and is left out of matching");

  const auto decompose_at = [&](const FieldState& s) {
    SampledDecomposition sd;
    sd.decomposition = decompose(s, spec.diagnostics, library, embedded);
    const auto nr = norms(s);
    sd.h_norm_sq = nr.h_norm * nr.h_norm;
    if (sd.decomposition.J > 0) {
      std::vector<Point> centers;
      for (const auto& c : sd.decomposition.components) centers.push_back(c.detected);
      sd.exterior_energy = exterior_energy(s, centers, spec.diagnostics.exterior_radius);
    }
    return sd;
  };

  const double tail_cut = spec.diagnostics.tail_frequency(g);
  std::size_t index = 0;
  auto run = evolve(init.state, cfg, [&](const FieldState& s, const TrajectorySample& smp) {
    SeriesRow row;
    row.sample = smp;
    row.tail_h1 = frequency_tail(s, tail_cut).h1_u;
    if (spec.decompose_stride > 0 && index % static_cast<std::size_t>(spec.decompose_stride) == 0)
      row.decomposition = decompose_at(s);
    r.rows.push_back(std::move(row));
    ++index;
  });

  std::optional<ResolutionDecomposition> final_dec;
  if (!run.blowup) {
    if (!r.rows.back().decomposition) r.rows.back().decomposition = decompose_at(run.final_state);
    final_dec = r.rows.back().decomposition->decomposition;
  }
  r.verdict = classify(run.samples, run.blowup, final_dec, spec.thresholds);
  if (!run.samples.empty()) {
    const double t1 = run.samples.back().t;
    const double t0 = run.samples.front().t;
    r.good_time = select_good_time(run.samples, t0 + 0.5 * (t1 - t0), t1);
  }
  r.final_state = std::move(run.final_state);
  r.spec = std::move(spec);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  if (out) write_run_files(r, *out);
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  std::size_t index = 0;
  std::string value;
  std::string verdict;  // empty on failure
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  double t_end = std::numeric_limits<double>::quiet_NaN();
  double final_h_norm = std::numeric_limits<double>::quiet_NaN();
  double final_ut = std::numeric_limits<double>::quiet_NaN();
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  int J = 0;
  double diss_integral = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline std::string sweep_run_name(std::size_t i) {
  std::ostringstream os;
  os << "run_" << std::setw(3) << std::setfill('0') << i;
  return os.str();
}

/// Independent runs over sweep.values of sweep.parameter on `workers` threads.
/// Rows come back in value order; a failing run is recorded and skipped.
inline std::vector<SweepRow> run_sweep(const ScenarioSpec& base, const std::optional<std::filesystem::path>& out,
                                       int workers = 1) {
  base.validate();
  if (base.sweep_parameter.empty() || base.sweep_values.empty()) return {};
  if (workers < 1) throw UsageError("--workers must be at least 1");
  std::vector<SweepRow> rows(base.sweep_values.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      auto& row = rows[i];
      row.index = i;
      row.value = base.sweep_values[i];
      try {
        ScenarioSpec spec = base;
        spec.set(base.sweep_parameter, row.value);
        std::optional<std::filesystem::path> dir;
        if (out) dir = *out / sweep_run_name(i);
        const auto r = run_scenario(spec, dir);
        row.verdict = to_string(r.verdict.verdict);
        if (r.verdict.blowup) row.blowup_time = r.verdict.blowup->time;
        const auto& last = r.rows.back().sample;
        row.t_end = last.t;
        row.final_h_norm = last.norms.h_norm;
        row.final_ut = last.norms.l2_ut;
        row.final_residual = r.verdict.final_residual;
        row.J = r.verdict.J;
        row.diss_integral = last.dissipation;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), rows.size());
  for (std::size_t w = 1; w < count; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::string& parameter, const std::vector<SweepRow>& rows) {
  os << "index,parameter,value,verdict,blowup_time,t_end,final_H_norm,final_ut,final_residual,J,diss_integral,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (auto& c : err)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    os << r.index << ',' << parameter << ',' << r.value << ',' << r.verdict << ',' << csv_number(r.blowup_time) << ','
       << csv_number(r.t_end) << ',' << csv_number(r.final_h_norm) << ',' << csv_number(r.final_ut) << ','
       << csv_number(r.final_residual) << ',' << r.J << ',' << csv_number(r.diss_integral) << ',' << err << '\n';
  }
}

}  // namespace dkg
