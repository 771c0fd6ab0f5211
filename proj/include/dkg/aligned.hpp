#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

namespace dkg {

// 64-byte aligned storage so every buffer has the same FFTW alignment class.
template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{Align}));
  }
  void deallocate(T* p, std::size_t) noexcept {
    ::operator delete(p, std::align_val_t{Align});
  }

  friend bool operator==(const AlignedAllocator&, const AlignedAllocator&) { return true; }
  friend bool operator!=(const AlignedAllocator&, const AlignedAllocator&) { return false; }
};

/// Real samples on the grid, row-major with the last axis fastest.
using RealField = std::vector<double, AlignedAllocator<double>>;

/// Half-complex spectrum (last axis stores modes 0..n/2 only).
using Spectrum = std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

}  // namespace dkg
