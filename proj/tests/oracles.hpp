#pragma once

// Independent test oracles: brute-force partition enumeration, set-partition
// crossing checks, quadrature, and the non-crossing moment sums, all written
// without touching the library's implementation paths they validate.

#include <algorithm>
#include <complex>
#include <functional>
#include <vector>

#include "freeconv/rational.hpp"

namespace oracles {

using Blocks = std::vector<std::vector<int>>;

/// Direct quadruple test: some a<b<c<d with a,c in one block, b,d in another.
inline bool crossing(const Blocks& blocks) {
  const int m = static_cast<int>(blocks.size());
  std::vector<int> owner;
  int n = 0;
  for (const auto& b : blocks)
    for (int e : b) n = std::max(n, e);
  owner.assign(static_cast<std::size_t>(n) + 1, -1);
  for (int bi = 0; bi < m; ++bi)
    for (int e : blocks[static_cast<std::size_t>(bi)])
      owner[static_cast<std::size_t>(e)] = bi;
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      for (int c = b + 1; c <= n; ++c)
        for (int d = c + 1; d <= n; ++d)
          if (owner[a] == owner[c] && owner[b] == owner[d] && owner[a] != owner[b])
            return true;
  return false;
}

/// All set partitions of {1..n} via restricted growth strings.
inline std::vector<Blocks> all_set_partitions(int n) {
  std::vector<Blocks> out;
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      Blocks blocks(static_cast<std::size_t>(used));
      for (int e = 0; e < n; ++e)
        blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(e)])]
            .push_back(e + 1);
      out.push_back(std::move(blocks));
      return;
    }
    for (int b = 0; b <= used; ++b) {
      rgs[static_cast<std::size_t>(i)] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  rec(0, 0);
  return out;
}

inline std::vector<Blocks> noncrossing_by_filter(int n) {
  std::vector<Blocks> out;
  for (auto& p : all_set_partitions(n))
    if (!crossing(p)) out.push_back(std::move(p));
  return out;
}

inline Blocks canonical(Blocks b) {
  for (auto& blk : b) std::sort(blk.begin(), blk.end());
  std::sort(b.begin(), b.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return b;
}

/// Union of p (on odd circle positions 2i-1) and q (on even positions 2i)
/// is non-crossing on the interleaved 2n circle.
inline bool compatible_on_circle(const Blocks& p, const Blocks& q) {
  Blocks merged;
  for (const auto& b : p) {
    std::vector<int> mapped;
    for (int e : b) mapped.push_back(2 * e - 1);
    merged.push_back(std::move(mapped));
  }
  for (const auto& b : q) {
    std::vector<int> mapped;
    for (int e : b) mapped.push_back(2 * e);
    merged.push_back(std::move(mapped));
  }
  return !crossing(merged);
}

inline bool refines(const Blocks& fine, const Blocks& coarse) {
  for (const auto& fb : fine) {
    bool contained = false;
    for (const auto& cb : coarse)
      if (std::includes(cb.begin(), cb.end(), fb.begin(), fb.end()))
        contained = true;
    if (!contained) return false;
  }
  return true;
}

/// Kreweras complement by brute force: the coarsest non-crossing partition of
/// the primed points compatible with p on the circle; verifies maximality.
inline Blocks kreweras_bruteforce(const Blocks& p, int n) {
  std::vector<Blocks> compatible;
  for (const auto& q : noncrossing_by_filter(n))
    if (compatible_on_circle(p, q)) compatible.push_back(canonical(q));
  const Blocks* best = nullptr;
  for (const auto& q : compatible)
    if (!best || q.size() < best->size()) best = &q;
  for (const auto& q : compatible)
    if (!refines(q, *best)) throw std::logic_error("kreweras oracle: no maximum");
  return *best;
}

// -- non-crossing moment sums in exact arithmetic (brute-force partitions) --

inline freeconv::Rat block_product(const Blocks& p,
                                   const std::vector<freeconv::Rat>& kappa) {
  freeconv::Rat prod = 1;
  for (const auto& b : p) prod *= kappa[b.size() - 1];
  return prod;
}

inline std::vector<freeconv::Rat> moments_from_cumulants_bruteforce(
    const std::vector<freeconv::Rat>& kappa) {
  std::vector<freeconv::Rat> m(kappa.size());
  for (std::size_t n = 1; n <= kappa.size(); ++n) {
    freeconv::Rat s = 0;
    for (const auto& p : noncrossing_by_filter(static_cast<int>(n)))
      s += block_product(p, kappa);
    m[n - 1] = s;
  }
  return m;
}

inline std::vector<freeconv::Rat> cumulants_from_moments_bruteforce(
    const std::vector<freeconv::Rat>& m) {
  std::vector<freeconv::Rat> kappa(m.size());
  for (std::size_t n = 1; n <= m.size(); ++n) {
    freeconv::Rat rest = 0;
    for (const auto& p : noncrossing_by_filter(static_cast<int>(n))) {
      if (p.size() == 1) continue;
      rest += block_product(p, kappa);
    }
    kappa[n - 1] = m[n - 1] - rest;
  }
  return kappa;
}

inline std::vector<freeconv::Rat> mult_conv_bruteforce(
    const std::vector<freeconv::Rat>& ma, const std::vector<freeconv::Rat>& mb,
    int k) {
  const auto kappa = cumulants_from_moments_bruteforce(ma);
  std::vector<freeconv::Rat> out(static_cast<std::size_t>(k));
  for (int n = 1; n <= k; ++n) {
    freeconv::Rat s = 0;
    for (const auto& p : noncrossing_by_filter(n)) {
      freeconv::Rat term = block_product(p, kappa);
      for (const auto& w : kreweras_bruteforce(p, n)) term *= mb[w.size() - 1];
      s += term;
    }
    out[static_cast<std::size_t>(n) - 1] = s;
  }
  return out;
}

// -- quadrature --

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline std::complex<double> simpson_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  std::complex<double> s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * (h / 3.0);
}

}  // namespace oracles
