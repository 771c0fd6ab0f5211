#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>

#include "dkg/aligned.hpp"
#include "dkg/grid.hpp"

namespace dkg {

namespace detail {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// Plans live for the whole process. FFTW planning is not thread-safe, so
// creation is serialized; executing a plan on new arrays is.
inline PlanPair plans_for(int dim, int n) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({dim, n});
  if (it != cache.end()) return it->second;

  const SpectralGrid g(dim, n, 1.0);
  RealField real(g.size());
  Spectrum spec(g.spectral_size());
  int dims[3] = {n, n, n};
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  PlanPair pp;
  pp.r2c = fftw_plan_dft_r2c(dim, dims, real.data(), c, FFTW_ESTIMATE);
  pp.c2r = fftw_plan_dft_c2r(dim, dims, c, real.data(), FFTW_ESTIMATE);
  cache.emplace(std::make_pair(dim, n), pp);
  return pp;
}

}  // namespace detail

/// Forward transform into `out`, normalized so mode 0 holds the mean.
inline void forward_transform(const SpectralGrid& g, std::span<const double> field, Spectrum& out) {
  if (field.size() != g.size())
    throw UsageError("field has " + std::to_string(field.size()) + " samples, grid expects " +
                     std::to_string(g.size()));
  out.resize(g.spectral_size());
  const auto pp = detail::plans_for(g.dim(), g.n());
  // r2c leaves its input untouched.
  fftw_execute_dft_r2c(pp.r2c, const_cast<double*>(field.data()), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& c : out) c *= scale;
}

inline Spectrum forward_transform(const SpectralGrid& g, std::span<const double> field) {
  Spectrum out;
  forward_transform(g, field, out);
  return out;
}

/// Inverse transform that may overwrite `spec` (no copy).
inline void inverse_transform_destructive(const SpectralGrid& g, Spectrum& spec, RealField& out) {
  if (spec.size() != g.spectral_size()) throw UsageError("spectrum size does not match grid");
  out.resize(g.size());
  const auto pp = detail::plans_for(g.dim(), g.n());
  fftw_execute_dft_c2r(pp.c2r, reinterpret_cast<fftw_complex*>(spec.data()), out.data());
}

inline RealField inverse_transform(const SpectralGrid& g, const Spectrum& spec) {
  Spectrum scratch = spec;
  RealField out;
  inverse_transform_destructive(g, scratch, out);
  return out;
}

/// Coefficient of the full-index mode `m` (each m_a in [-n/2, n/2)).
inline std::complex<double> spectrum_at(const SpectralGrid& g, const Spectrum& spec, std::array<int, 3> m) {
  const int n = g.n();
  const int last = g.dim() - 1;
  bool conj = false;
  if (m[last] < 0 && m[last] != -n / 2) {
    conj = true;
    for (int a = 0; a < g.dim(); ++a) m[a] = -m[a];
  }
  std::size_t s = 0;
  for (int a = 0; a < last; ++a) s = s * n + static_cast<std::size_t>((m[a] % n + n) % n);
  const int j = m[last] == -n / 2 ? n / 2 : m[last];
  s = s * (n / 2 + 1) + static_cast<std::size_t>(j);
  return conj ? std::conj(spec[s]) : spec[s];
}

}  // namespace dkg
