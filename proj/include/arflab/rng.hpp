#pragma once

// Counter-based random numbers.
//
// Every draw is a pure function of (master seed, stream, counter), so
// replicates can be generated in any order, in parallel, and still come
// out bit-identical.  Streams are derived from a purpose tag plus a
// replicate id; within a stream the counter enumerates cells or blocks.
// The generator is a 10-round Philox-style 2x64 bijection.

#include <cstdint>
#include <utility>

#include "arflab/normal.hpp"

namespace arflab {

namespace detail {

inline std::pair<std::uint64_t, std::uint64_t> mulhilo64(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  return {static_cast<std::uint64_t>(p >> 64), static_cast<std::uint64_t>(p)};
}

}  // namespace detail

/// 10-round keyed 128-bit permutation; returns both output words.
inline std::pair<std::uint64_t, std::uint64_t> philox2x64(std::uint64_t key,
                                                          std::uint64_t c0,
                                                          std::uint64_t c1) {
  constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;
  constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;
  std::uint64_t k = key;
  for (int round = 0; round < 10; ++round) {
    auto [hi, lo] = detail::mulhilo64(kMul, c0);
    c0 = hi ^ k ^ c1;
    c1 = lo;
    k += kWeyl;
  }
  return {c0, c1};
}

/// Purpose tags keeping unrelated draw streams disjoint by construction.
enum class RngPurpose : std::uint64_t {
  FieldCells = 1,
  Smoothing = 2,
  WienerCells = 3,
  CdfEnsembleCells = 4,
  CdfEnsembleSmoothing = 5,
  Generic = 6,
};

/// Stream id for (purpose, replicate).  One Philox application keyed by
/// the purpose keeps distinct replicates statistically independent.
inline std::uint64_t derive_stream(RngPurpose purpose, std::uint64_t replicate,
                                   std::uint64_t sub = 0) {
  return philox2x64(static_cast<std::uint64_t>(purpose), replicate, sub).first;
}

enum class Innovation { Gaussian, CenteredExponential, Rademacher };

/// Stateless view of one stream; draws are indexed by an explicit counter.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(master_seed), stream_(stream) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return philox2x64(key_, counter, stream_).first;
  }

  /// Uniform on (0,1), never returning an endpoint.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  /// N(0,1) by inverse-CDF sampling (one counter per draw).
  double gaussian(std::uint64_t counter) const {
    return normal_quantile(uniform(counter));
  }

  /// Standardized draw from the requested innovation law (mean 0, var 1).
  double innovation(Innovation law, std::uint64_t counter) const {
    switch (law) {
      case Innovation::Gaussian:
        return gaussian(counter);
      case Innovation::CenteredExponential:
        return -std::log1p(-uniform(counter)) - 1.0;
      case Innovation::Rademacher:
        return (bits(counter) >> 63) ? 1.0 : -1.0;
    }
    return 0.0;
  }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
};

}  // namespace arflab
