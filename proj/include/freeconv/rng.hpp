#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace freeconv {

// Philox-4x64-10 counter-based generator (constants from the Random123
// reference implementation). Output is a pure function of (key, counter),
// which is what makes replicate streams independent of scheduling: the
// key is (seed, stream) and the counter encodes the draw's position.
namespace philox {

inline constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline std::array<std::uint64_t, 4> block(std::uint64_t key0, std::uint64_t key1,
                                          std::uint64_t c0, std::uint64_t c1,
                                          std::uint64_t c2, std::uint64_t c3) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMult0, c0, hi0, lo0);
    mulhilo(kMult1, c2, hi1, lo1);
    std::uint64_t n0 = hi1 ^ c1 ^ key0;
    std::uint64_t n1 = lo1;
    std::uint64_t n2 = hi0 ^ c3 ^ key1;
    std::uint64_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    key0 += kWeyl0;
    key1 += kWeyl1;
  }
  return {c0, c1, c2, c3};
}

}  // namespace philox

/// Uniform double in (0,1), exclusive at both ends.
inline double uniform01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

/// One independent Gaussian stream, addressed by (seed, stream) and a
/// 64-bit draw index plus a small domain tag to separate sub-streams
/// (field sites, matrix entries, diagonals, ...) within a replicate.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  /// Two independent N(0,1) draws for counter `index` (Box-Muller).
  std::array<double, 2> normal_pair(std::uint64_t index,
                                    std::uint64_t tag = 0) const {
    auto b = philox::block(seed_, stream_, index, tag, 0, 0);
    double u0 = uniform01(b[0]);
    double u1 = uniform01(b[1]);
    double radius = std::sqrt(-2.0 * std::log(u0));
    double angle = 2.0 * M_PI * u1;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double normal(std::uint64_t index, std::uint64_t tag = 0) const {
    return normal_pair(index, tag)[0];
  }

  /// Uniform (0,1) draw for counter `index`.
  double uniform(std::uint64_t index, std::uint64_t tag = 0) const {
    auto b = philox::block(seed_, stream_, index, tag, 0, 0);
    return uniform01(b[0]);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace freeconv
