#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "dkg/errors.hpp"

namespace dkg {

/// A point in up to three dimensions; components past the grid dimension are zero.
using Point = std::array<double, 3>;

/// Per-mode data for one stored entry of a half-complex spectrum.
struct ModeInfo {
  std::array<int, 3> m{};     // signed mode index per axis
  std::array<double, 3> k{};  // wavenumber per axis
  double k2 = 0.0;            // |k|^2
  double weight = 1.0;        // 1 or 2: stored modes standing in for a conjugate pair
  bool nyquist = false;       // some axis sits at m = -n/2
  bool retained = true;       // survives the dealias mask
};

/// Uniform periodic grid on [-L, L)^d with n points per axis.
class SpectralGrid {
 public:
  SpectralGrid(int dim, int n, double half_length, double dealias_fraction = 2.0 / 3.0)
      : dim_(dim), n_(n), half_length_(half_length), dealias_fraction_(dealias_fraction) {
    if (dim < 1 || dim > 3) throw UsageError("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
    if (n < 16 || (n & (n - 1)) != 0)
      throw UsageError("points per axis must be a power of two >= 16, got " + std::to_string(n));
    if (!(half_length > 0.0) || !std::isfinite(half_length)) throw UsageError("box half-length must be positive");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
      throw UsageError("dealias fraction must lie in (0, 1]");
  }

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double half_length() const noexcept { return half_length_; }
  double box_length() const noexcept { return 2.0 * half_length_; }
  double dealias_fraction() const noexcept { return dealias_fraction_; }
  double spacing() const noexcept { return 2.0 * half_length_ / n_; }
  double cell_volume() const noexcept { return std::pow(spacing(), dim_); }

  std::size_t size() const noexcept {
    std::size_t s = 1;
    for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(n_);
    return s;
  }
  /// Stored complex modes: n^(d-1) * (n/2 + 1).
  std::size_t spectral_size() const noexcept { return size() / n_ * (n_ / 2 + 1); }

  /// Signed mode for a full-axis storage index: i < n/2 -> i, else i - n.
  int mode_of(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }
  double wavenumber(int m) const noexcept { return std::numbers::pi * m / half_length_; }
  double nyquist() const noexcept { return std::numbers::pi * n_ / (2.0 * half_length_); }

  double coordinate(int i) const noexcept { return -half_length_ + i * spacing(); }

  std::array<int, 3> index(std::size_t flat) const noexcept {
    std::array<int, 3> idx{};
    for (int a = dim_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % n_);
      flat /= n_;
    }
    return idx;
  }
  std::size_t flat(const std::array<int, 3>& idx) const noexcept {
    std::size_t f = 0;
    for (int a = 0; a < dim_; ++a) f = f * n_ + static_cast<std::size_t>(idx[a]);
    return f;
  }
  Point point(std::size_t flat_index) const noexcept {
    const auto idx = index(flat_index);
    Point x{};
    for (int a = 0; a < dim_; ++a) x[a] = coordinate(idx[a]);
    return x;
  }

  /// Wrap a displacement into [-L, L).
  double wrap(double delta) const noexcept {
    const double box = box_length();
    double w = delta - box * std::floor((delta + half_length_) / box);
    if (w >= half_length_) w -= box;
    return w;
  }

  /// Euclidean distance under the periodic (minimum-image) convention.
  double periodic_distance(const Point& a, const Point& b) const noexcept {
    double s = 0.0;
    for (int ax = 0; ax < dim_; ++ax) {
      const double d = wrap(a[ax] - b[ax]);
      s += d * d;
    }
    return std::sqrt(s);
  }

  /// Visit every stored mode of the half-complex layout in storage order.
  template <class F>
  void for_each_mode(F&& f) const {
    const int half = n_ / 2 + 1;
    const double cut = dealias_fraction_ * n_ / 2.0;
    const std::size_t outer = size() / n_;
    std::size_t s = 0;
    for (std::size_t o = 0; o < outer; ++o) {
      ModeInfo info;
      std::size_t rest = o;
      bool outer_nyq = false;
      bool outer_keep = true;
      double outer_k2 = 0.0;
      for (int a = dim_ - 2; a >= 0; --a) {
        const int i = static_cast<int>(rest % n_);
        rest /= n_;
        const int m = mode_of(i);
        info.m[a] = m;
        info.k[a] = wavenumber(m);
        outer_k2 += info.k[a] * info.k[a];
        if (m == -n_ / 2) outer_nyq = true;
        if (std::abs(m) >= cut) outer_keep = false;
      }
      const int last = dim_ - 1;
      for (int j = 0; j < half; ++j, ++s) {
        info.m[last] = j;
        info.k[last] = wavenumber(j);
        info.k2 = outer_k2 + info.k[last] * info.k[last];
        info.weight = (j == 0 || j == n_ / 2) ? 1.0 : 2.0;
        info.nyquist = outer_nyq || j == n_ / 2;
        info.retained = outer_keep && j < cut && !info.nyquist;
        f(s, info);
      }
    }
  }

  /// Per-mode table materialized once for hot loops.
  std::vector<ModeInfo> modes() const {
    std::vector<ModeInfo> out(spectral_size());
    for_each_mode([&](std::size_t s, const ModeInfo& m) { out[s] = m; });
    return out;
  }

  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_length_ == b.half_length_ &&
           a.dealias_fraction_ == b.dealias_fraction_;
  }

 private:
  int dim_;
  int n_;
  double half_length_;
  double dealias_fraction_;
};

}  // namespace dkg
