#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "freeconv/spectral_density.hpp"

namespace freeconv {

/// A finite N x N window of the stationary Gaussian field, with its
/// embedding period and stream identity for provenance.
struct FieldSample {
  int n = 0;
  int period = 0;  // circulant embedding period M
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> values;  // row-major N x N

  double operator()(int i, int j) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                  static_cast<std::size_t>(j)];
  }

  /// Binary dump: 8-byte little-endian header (N as u64), then row-major
  /// little-endian f64 values.
  void write_binary(const std::filesystem::path& path) const;
  static FieldSample read_binary(const std::filesystem::path& path);
};

struct SamplerOptions {
  /// Total trig-polynomial degree used when a tabulated separable density
  /// has to be compiled before sampling.
  int approx_degree = 256;
  Taper taper = Taper::kJackson;
};

/// Smallest 5-smooth integer >= n + 2*degree (so the band-limited covariance
/// has no wraparound in the N x N window and the FFT stays fast). Always
/// within the [n + 2*degree, 2*(n + 2*degree)] window.
int choose_embedding_period(int n, int degree);

/// Exact sampling of the mean-zero stationary field with spectral density f
/// by two-dimensional circulant embedding: the circulant spectrum values are
/// 4 pi^2 f at the FFT frequencies, which are nonnegative for any valid f.
/// Deterministic in (seed, stream): identical across runs and thread counts.
/// Clamps spectrum roundoff in (-1e-12, 0); anything lower throws
/// EmbeddingError.
FieldSample sample_field(const SpectralDensity2D& f, int n, std::uint64_t seed,
                         std::uint64_t stream = 0,
                         const SamplerOptions& opts = {});

}  // namespace freeconv
