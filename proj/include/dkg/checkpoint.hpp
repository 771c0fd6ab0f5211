#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "dkg/binary_io.hpp"
#include "dkg/field.hpp"

namespace dkg {

// DKGC layout, little-endian:
//   "DKGC" u32 version, u32 d, u32 n, f64 L, p, alpha, t, dt, f64 u[n^d], f64 ut[n^d]

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  FieldState state;
  double dt = 0.0;
};

inline void write_checkpoint(std::ostream& os, const FieldState& s, double dt) {
  using namespace binary;
  put_magic(os, "DKGC");
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(s.grid.dim()));
  put_u32(os, static_cast<std::uint32_t>(s.grid.n()));
  put_f64(os, s.grid.half_length());
  put_f64(os, s.p);
  put_f64(os, s.alpha);
  put_f64(os, s.t);
  put_f64(os, dt);
  for (double v : s.u) put_f64(os, v);
  for (double v : s.ut) put_f64(os, v);
  if (!os) throw IoError("checkpoint write failed");
}

inline void write_checkpoint(const std::filesystem::path& path, const FieldState& s, double dt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(os, s, dt);
}

inline Checkpoint read_checkpoint(std::istream& is) {
  using namespace binary;
  expect_magic(is, "DKGC");
  const auto version = get_u32(is, "version");
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const int d = static_cast<int>(get_u32(is, "dimension"));
  const int n = static_cast<int>(get_u32(is, "grid size"));
  const double L = get_f64(is, "half-length");
  const double p = get_f64(is, "exponent");
  const double alpha = get_f64(is, "damping");
  const double t = get_f64(is, "time");
  const double dt = get_f64(is, "time step");
  SpectralGrid g = [&] {
    try {
      return SpectralGrid(d, n, L);
    } catch (const UsageError& e) {
      throw IoError(std::string("checkpoint header: ") + e.what());
    }
  }();
  RealField u(g.size()), ut(g.size());
  for (auto& v : u) v = get_f64(is, "u samples");
  for (auto& v : ut) v = get_f64(is, "u_t samples");
  return Checkpoint{FieldState(g, std::move(u), std::move(ut), p, alpha, t), dt};
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(is);
}

}  // namespace dkg
