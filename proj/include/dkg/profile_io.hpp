#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "dkg/binary_io.hpp"
#include "dkg/equilibria.hpp"

namespace dkg {

// DKGQ layout, little-endian:
//   "DKGQ" u32 version, u32 d, f64 p, u32 nodes, i32 sign, u64 count, f64 r[count], f64 q[count]
// Values are stored unsigned; `sign` multiplies them.

inline constexpr std::uint32_t kProfileVersion = 1;

/// Closed-form profiles are tabulated on [0, r_max] at spacing `step`.
inline void write_profile(std::ostream& os, const EquilibriumProfile& q, double r_max = 40.0, double step = 1e-3) {
  using namespace binary;
  if (q.kind == EquilibriumProfile::Kind::Grid) throw UsageError("grid-sampled profiles have no radial form to save");
  std::vector<double> r = q.radius, v = q.values;
  if (q.kind == EquilibriumProfile::Kind::ClosedForm) {
    const auto count = static_cast<std::size_t>(std::ceil(r_max / step)) + 1;
    r.resize(count);
    v.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      r[i] = static_cast<double>(i) * step;
      v[i] = EquilibriumProfile::closed_form_value(q.p, r[i]);
    }
  }
  put_magic(os, "DKGQ");
  put_u32(os, kProfileVersion);
  put_u32(os, static_cast<std::uint32_t>(q.dim));
  put_f64(os, q.p);
  put_u32(os, static_cast<std::uint32_t>(q.nodes));
  put_i32(os, q.sign);
  put_u64(os, r.size());
  for (double x : r) put_f64(os, x);
  for (double x : v) put_f64(os, x);
  if (!os) throw IoError("profile write failed");
}

inline void write_profile(const std::filesystem::path& path, const EquilibriumProfile& q) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_profile(os, q);
}

inline EquilibriumProfile read_profile(std::istream& is) {
  using namespace binary;
  expect_magic(is, "DKGQ");
  const auto version = get_u32(is, "version");
  if (version != kProfileVersion) throw IoError("unsupported profile version " + std::to_string(version));
  EquilibriumProfile q;
  q.kind = EquilibriumProfile::Kind::Radial;
  q.dim = static_cast<int>(get_u32(is, "dimension"));
  q.p = get_f64(is, "exponent");
  q.nodes = static_cast<int>(get_u32(is, "node count"));
  q.sign = get_i32(is, "sign");
  const auto count = get_u64(is, "sample count");
  if (q.dim < 1 || q.dim > 3) throw IoError("profile dimension out of range");
  if (q.sign != 1 && q.sign != -1) throw IoError("profile sign must be +1 or -1");
  if (count < 4 || count > (std::uint64_t{1} << 28)) throw IoError("implausible profile sample count");
  q.radius.resize(count);
  q.values.resize(count);
  for (auto& x : q.radius) x = get_f64(is, "radius samples");
  for (auto& x : q.values) x = get_f64(is, "profile samples");
  if (q.radius.front() != 0.0) throw IoError("profile radius grid must start at 0");
  for (std::size_t i = 1; i < count; ++i)
    if (!(q.radius[i] > q.radius[i - 1])) throw IoError("profile radius grid must be increasing");
  return q;
}

inline EquilibriumProfile read_profile(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open profile " + path.string());
  return read_profile(is);
}

}  // namespace dkg
