#include "freeconv/matrix_ensembles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "freeconv/kernels.hpp"
#include "freeconv/rng.hpp"

namespace freeconv {

namespace {

constexpr std::uint64_t kTagWigner = 1;
constexpr std::uint64_t kTagPerturbation = 2;

}  // namespace

SymmetricMatrix::SymmetricMatrix(int n) : n_(n) {
  if (n < 1) throw ValidationError("SymmetricMatrix: n must be positive");
  upper_.assign(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2,
                0.0);
}

double SymmetricMatrix::frobenius2() const {
  double diag = 0.0, off = 0.0;
  for (int i = 0; i < n_; ++i) {
    diag += (*this)(i, i) * (*this)(i, i);
    for (int j = i + 1; j < n_; ++j) off += (*this)(i, j) * (*this)(i, j);
  }
  return diag + 2.0 * off;
}

double SymmetricMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

SymmetricMatrix build_gbar(const FieldSample& sample) {
  const int n = sample.n;
  SymmetricMatrix m(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      m.set(i, j, (sample(i, j) + sample(j, i)) * inv_sqrt_n);
  return m;
}

SymmetricMatrix build_wigner(int n, std::uint64_t seed, std::uint64_t stream) {
  SymmetricMatrix m(n);
  GaussianStream rng(seed, stream);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const auto idx = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                       static_cast<std::uint64_t>(j);
      m.set(i, j, sigma * rng.normal(idx, kTagWigner));
    }
  return m;
}

SymmetricMatrix build_wn(double alpha, int n, std::uint64_t seed,
                         std::uint64_t stream) {
  if (!(alpha > 0.0)) throw ValidationError("build_wn: alpha must be positive");
  SymmetricMatrix m(n);
  GaussianStream rng(seed, stream);
  const double sigma_h = 2.0 * std::numbers::pi * std::sqrt(alpha);  // sd of H
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  auto h = [&](int i, int j) {
    const auto idx = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                     static_cast<std::uint64_t>(j);
    return sigma_h * rng.normal(idx, kTagPerturbation);
  };
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set(i, j, (h(i, j) + h(j, i)) * inv_sqrt_n);
  return m;
}

EmpiricalSpectrum eigenvalues(const SymmetricMatrix& m, std::string ensemble,
                              std::uint64_t seed, std::uint64_t stream) {
  const int n = m.size();
  if (n > 4096) throw LimitError("eigenvalues: N must be <= 4096");

  Eigen::MatrixXd full(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      full(i, j) = m(i, j);
      full(j, i) = m(i, j);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(full,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigenvalues: eigensolver failed on finite symmetric input");

  EmpiricalSpectrum s;
  s.lambda.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(s.lambda.begin(), s.lambda.end());
  s.ensemble = std::move(ensemble);
  s.seed = seed;
  s.stream = stream;
  s.n = n;
  return s;
}

std::vector<double> esd_moments(const EmpiricalSpectrum& s, int kmax) {
  if (kmax < 1 || kmax > 8) throw LimitError("esd_moments: kmax must be in [1, 8]");
  std::vector<double> m = kernels::power_sums(s.lambda, kmax);
  for (double& v : m) v /= static_cast<double>(s.lambda.size());
  return m;
}

void write_spectra_csv(const std::filesystem::path& path,
                       std::span<const EmpiricalSpectrum> spectra) {
  std::ofstream out(path);
  out << "eigenvalue,ensemble,seed,stream,N\n";
  out.precision(17);
  for (const auto& s : spectra)
    for (double lam : s.lambda)
      out << lam << ',' << s.ensemble << ',' << s.seed << ',' << s.stream << ','
          << s.n << '\n';
}

Histogram make_histogram(std::span<const double> values, int bins,
                         bool freedman_diaconis) {
  if (values.empty()) throw ValidationError("make_histogram: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  const double range = std::max(hi - lo, 1e-300);

  if (freedman_diaconis) {
    const auto n = sorted.size();
    const double q1 = sorted[n / 4];
    const double q3 = sorted[(3 * n) / 4];
    const double width = 2.0 * (q3 - q1) / std::cbrt(static_cast<double>(n));
    if (width > 0.0)
      bins = std::clamp(static_cast<int>(std::ceil(range / width)), 1, 2000);
  }

  Histogram h;
  h.left.resize(static_cast<std::size_t>(bins));
  h.right.resize(static_cast<std::size_t>(bins));
  h.mass.assign(static_cast<std::size_t>(bins), 0.0);
  for (int b = 0; b < bins; ++b) {
    h.left[static_cast<std::size_t>(b)] = lo + range * b / bins;
    h.right[static_cast<std::size_t>(b)] = lo + range * (b + 1) / bins;
  }
  const double w = 1.0 / static_cast<double>(sorted.size());
  for (double v : sorted) {
    auto b = static_cast<int>((v - lo) / range * bins);
    b = std::clamp(b, 0, bins - 1);
    h.mass[static_cast<std::size_t>(b)] += w;
  }
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  std::ofstream out(path);
  out << "bin_left,bin_right,mass\n";
  out.precision(17);
  for (std::size_t i = 0; i < h.mass.size(); ++i)
    out << h.left[i] << ',' << h.right[i] << ',' << h.mass[i] << '\n';
}

}  // namespace freeconv
