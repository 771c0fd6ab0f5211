#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dkg/diagnostics.hpp"
#include "dkg/evolution.hpp"
#include "dkg/resolution.hpp"

namespace dkg {

inline constexpr const char* kSeriesColumns[] = {"t",      "energy",        "l2_ut",   "h1_u", "linf_u",        "H_norm",
                                                 "diss_integral", "tail_h1", "J",    "min_sep", "global_residual"};

/// Shortest round-trip text; NaN prints as "nan".
inline std::string csv_number(double v) { return std::isnan(v) ? "nan" : format_number(v); }

struct SampledDecomposition {
  ResolutionDecomposition decomposition;
  double exterior_energy = std::numeric_limits<double>::quiet_NaN();  // around detected points; NaN when J = 0
  double h_norm_sq = 0.0;
};

struct SeriesRow {
  TrajectorySample sample;
  double tail_h1 = 0.0;
  std::optional<SampledDecomposition> decomposition;
};

/// One row per sample; J, min_sep and global_residual stay blank where no
/// decomposition was taken.
inline void write_series_csv(std::ostream& os, const std::vector<SeriesRow>& rows) {
  for (std::size_t c = 0; c < std::size(kSeriesColumns); ++c) os << (c ? "," : "") << kSeriesColumns[c];
  os << '\n';
  for (const auto& r : rows) {
    const auto& s = r.sample;
    os << csv_number(s.t) << ',' << csv_number(s.energy) << ',' << csv_number(s.norms.l2_ut) << ','
       << csv_number(s.norms.h1_u) << ',' << csv_number(s.norms.linf_u) << ',' << csv_number(s.norms.h_norm) << ','
       << csv_number(s.dissipation) << ',' << csv_number(r.tail_h1) << ',';
    if (r.decomposition) {
      const auto& d = r.decomposition->decomposition;
      os << d.J << ',' << csv_number(d.min_separation) << ',' << csv_number(d.global_residual);
    } else {
      os << ",,";
    }
    os << '\n';
  }
}

inline nlohmann::json point_json(const Point& p, int dim) {
  auto a = nlohmann::json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

inline nlohmann::json to_json(const ResolutionDecomposition& d, int dim) {
  nlohmann::json j;
  j["t"] = d.t;
  j["J"] = d.J;
  j["global_residual"] = d.global_residual;
  j["ut_l2"] = d.ut_l2;
  j["min_separation"] = d.min_separation;
  auto comps = nlohmann::json::array();
  for (const auto& c : d.components) {
    nlohmann::json x;
    x["detected"] = point_json(c.detected, dim);
    x["center"] = point_json(c.center, dim);
    x["label"] = c.label;
    x["sign"] = c.sign;
    x["residual"] = c.residual;
    x["component_norm"] = c.component_norm;
    comps.push_back(x);
  }
  j["components"] = comps;
  return j;
}

inline nlohmann::json to_json(const SampledDecomposition& s, int dim) {
  auto j = to_json(s.decomposition, dim);
  j["exterior_energy"] = s.exterior_energy;
  j["h_norm_sq"] = s.h_norm_sq;
  return j;
}

inline nlohmann::json to_json(const TrichotomyVerdict& v) {
  nlohmann::json j;
  j["verdict"] = to_string(v.verdict);
  if (v.blowup) {
    j["blowup"] = {{"time", v.blowup->time}, {"value", v.blowup->value}};
  } else {
    j["blowup"] = nullptr;
  }
  j["growth_slope"] = v.growth_slope;
  j["final_residual"] = v.final_residual;
  j["final_ut"] = v.final_ut;
  j["J"] = v.J;
  return j;
}

inline nlohmann::json to_json(const NormReport& n) {
  return {{"l2_u", n.l2_u}, {"h1_u", n.h1_u}, {"l2_ut", n.l2_ut}, {"linf_u", n.linf_u}, {"H_norm", n.h_norm}};
}

inline nlohmann::json to_json(const ConcentrationSet& s, int dim) {
  nlohmann::json j;
  j["t"] = s.t;
  j["separation_radius"] = s.separation_radius;
  auto pts = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i)
    pts.push_back({{"center", point_json(s.centers[i], dim)}, {"index", s.indices[i]}, {"amplitude", s.amplitudes[i]}});
  j["centers"] = pts;
  return j;
}

}  // namespace dkg
