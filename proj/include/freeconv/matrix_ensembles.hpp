#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "freeconv/field.hpp"
#include "freeconv/measure.hpp"

namespace freeconv {

/// Real symmetric matrix stored as the packed upper triangle (row-major,
/// diagonal included).
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(int n);

  int size() const { return n_; }

  double operator()(int i, int j) const {
    return upper_[pack(std::min(i, j), std::max(i, j))];
  }
  void set(int i, int j, double v) {
    upper_[pack(std::min(i, j), std::max(i, j))] = v;
  }

  double frobenius2() const;
  double trace() const;
  std::span<const double> packed() const { return upper_; }

 private:
  std::size_t pack(int i, int j) const {
    // row i, column j >= i
    const auto ii = static_cast<std::size_t>(i);
    const auto nn = static_cast<std::size_t>(n_);
    return ii * nn - ii * (ii + 1) / 2 + static_cast<std::size_t>(j);
  }
  int n_;
  std::vector<double> upper_;
};

/// (i,j) entry (G_{i,j} + G_{j,i}) / sqrt(N) from an N x N field window.
SymmetricMatrix build_gbar(const FieldSample& sample);

/// Gaussian Wigner matrix: upper-triangular entries (diagonal included)
/// i.i.d. N(0, 1/N), reflected.
SymmetricMatrix build_wigner(int n, std::uint64_t seed, std::uint64_t stream = 0);

/// W(i,j) = (H_{i,j} + H_{j,i}) / sqrt(N) with H i.i.d. N(0, 4 pi^2 alpha):
/// off-diagonal variance 8 pi^2 alpha / N, diagonal 16 pi^2 alpha / N.
SymmetricMatrix build_wn(double alpha, int n, std::uint64_t seed,
                         std::uint64_t stream = 0);

struct EmpiricalSpectrum {
  std::vector<double> lambda;  // sorted ascending
  std::string ensemble;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int n = 0;

  Measure to_measure() const { return Measure::empirical(lambda); }
};

/// All eigenvalues of a symmetric matrix (N <= 4096), sorted ascending.
EmpiricalSpectrum eigenvalues(const SymmetricMatrix& m,
                              std::string ensemble = {}, std::uint64_t seed = 0,
                              std::uint64_t stream = 0);

/// m_k = (1/N) sum lambda^k for k = 1..kmax (kmax <= 8).
std::vector<double> esd_moments(const EmpiricalSpectrum& s, int kmax);

/// CSV export: one eigenvalue per row with ensemble/seed/stream/N columns.
void write_spectra_csv(const std::filesystem::path& path,
                       std::span<const EmpiricalSpectrum> spectra);

struct Histogram {
  std::vector<double> left, right, mass;
};

/// Equal-width histogram normalized to unit mass. bins is used as given
/// unless freedman_diaconis is set, in which case the bin count follows the
/// Freedman-Diaconis rule.
Histogram make_histogram(std::span<const double> values, int bins = 100,
                         bool freedman_diaconis = false);

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);

}  // namespace freeconv
