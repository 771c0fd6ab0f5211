#pragma once

#include <cmath>
#include <random>

#include "dkg/dkg.hpp"

namespace testing_support {

/// Random real field whose modes satisfy |m| <= max_mode on every axis.
inline dkg::RealField random_band_limited(const dkg::SpectralGrid& g, std::mt19937_64& rng, int max_mode,
                                          double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  dkg::RealField white(g.size());
  for (auto& v : white) v = normal(rng);
  auto spec = dkg::forward_transform(g, white);
  g.for_each_mode([&](std::size_t s, const dkg::ModeInfo& m) {
    bool keep = !m.nyquist;
    for (int a = 0; a < g.dim(); ++a) keep = keep && std::abs(m.m[a]) <= max_mode;
    if (!keep) spec[s] = 0.0;
  });
  auto out = dkg::inverse_transform(g, spec);
  const double peak = dkg::sup_norm(out);
  for (auto& v : out) v *= scale / peak;
  return out;
}

inline dkg::RealField random_field(const dkg::SpectralGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  dkg::RealField f(g.size());
  for (auto& v : f) v = u(rng);
  return f;
}

inline double max_abs_diff(const dkg::RealField& a, const dkg::RealField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// sqrt(2) sech(x - c) sampled on a 1D grid (minimum-image distance).
inline dkg::RealField sech_soliton(const dkg::SpectralGrid& g, double center = 0.0, double sign = 1.0) {
  dkg::RealField f(g.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = g.wrap(g.coordinate(static_cast<int>(i)) - center);
    f[i] = sign * std::sqrt(2.0) / std::cosh(x);
  }
  return f;
}

}  // namespace testing_support
