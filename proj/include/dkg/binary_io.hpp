#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "dkg/errors.hpp"

namespace dkg::binary {

// Explicit little-endian encoding, independent of host byte order.

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 8);
}

inline void put_i32(std::ostream& os, std::int32_t v) { put_u32(os, static_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline void put_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline std::uint64_t get_bytes(std::istream& is, int count, const char* what) {
  unsigned char b[8] = {};
  if (!is.read(reinterpret_cast<char*>(b), count)) throw IoError(std::string("truncated file while reading ") + what);
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
  return static_cast<std::uint32_t>(get_bytes(is, 4, what));
}
inline std::uint64_t get_u64(std::istream& is, const char* what) { return get_bytes(is, 8, what); }
inline std::int32_t get_i32(std::istream& is, const char* what) {
  return static_cast<std::int32_t>(get_u32(is, what));
}
inline double get_f64(std::istream& is, const char* what) { return std::bit_cast<double>(get_u64(is, what)); }

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
  char b[4];
  if (!is.read(b, 4) || std::memcmp(b, magic, 4) != 0)
    throw IoError(std::string("bad magic, expected \"") + magic + "\"");
}

}  // namespace dkg::binary
