#include "freeconv/nc.hpp"

#include <algorithm>
#include <mutex>

#include "freeconv/errors.hpp"

namespace freeconv {

namespace {

void sort_blocks(std::vector<std::vector<int>>& blocks) {
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

// Two sorted blocks cross iff their merged sequence alternates at least
// four times (pattern XYXY).
bool blocks_cross(const std::vector<int>& x, const std::vector<int>& y) {
  std::size_t i = 0, j = 0;
  int runs = 0;
  int prev = -1;  // 0 = from x, 1 = from y
  while (i < x.size() || j < y.size()) {
    int src = (j >= y.size() || (i < x.size() && x[i] < y[j])) ? 0 : 1;
    if (src == 0)
      ++i;
    else
      ++j;
    if (src != prev) {
      ++runs;
      prev = src;
    }
  }
  return runs >= 4;
}

}  // namespace

bool is_noncrossing(const std::vector<std::vector<int>>& blocks) {
  for (std::size_t a = 0; a < blocks.size(); ++a)
    for (std::size_t b = a + 1; b < blocks.size(); ++b)
      if (blocks_cross(blocks[a], blocks[b])) return false;
  return true;
}

NCPartition NCPartition::make(int n, std::vector<std::vector<int>> blocks) {
  if (n < 1) throw ValidationError("NCPartition: n must be positive");
  sort_blocks(blocks);
  std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
  std::size_t count = 0;
  for (const auto& b : blocks) {
    if (b.empty()) throw ValidationError("NCPartition: empty block");
    for (int e : b) {
      if (e < 1 || e > n || seen[static_cast<std::size_t>(e)])
        throw ValidationError("NCPartition: blocks must partition {1..n}");
      seen[static_cast<std::size_t>(e)] = true;
      ++count;
    }
  }
  if (count != static_cast<std::size_t>(n))
    throw ValidationError("NCPartition: blocks must cover {1..n}");
  if (!is_noncrossing(blocks)) throw ValidationError("NCPartition: crossing blocks");
  NCPartition p;
  p.n = n;
  p.blocks = std::move(blocks);
  return p;
}

namespace {

// Recursive block insertion. Open blocks form a stack: element i may join
// any open block, which closes every block opened after it, or start a new
// open block. Each non-crossing partition is produced exactly once.
void enumerate_rec(int i, int n, std::vector<std::vector<int>>& blocks,
                   std::vector<std::size_t>& stack,
                   std::vector<NCPartition>& out) {
  if (i > n) {
    NCPartition p;
    p.n = n;
    p.blocks = blocks;
    sort_blocks(p.blocks);
    out.push_back(std::move(p));
    return;
  }
  for (std::size_t k = 0; k < stack.size(); ++k) {
    std::vector<std::size_t> popped(stack.begin() + static_cast<long>(k) + 1,
                                    stack.end());
    stack.resize(k + 1);
    blocks[stack[k]].push_back(i);
    enumerate_rec(i + 1, n, blocks, stack, out);
    blocks[stack[k]].pop_back();
    stack.insert(stack.end(), popped.begin(), popped.end());
  }
  blocks.push_back({i});
  stack.push_back(blocks.size() - 1);
  enumerate_rec(i + 1, n, blocks, stack, out);
  stack.pop_back();
  blocks.pop_back();
}

}  // namespace

std::vector<NCPartition> enumerate_nc(int n) {
  if (n < 1 || n > 12)
    throw LimitError("enumerate_nc: n must be in [1, 12]");
  std::vector<NCPartition> out;
  out.reserve(static_cast<std::size_t>(catalan(n)));
  std::vector<std::vector<int>> blocks;
  std::vector<std::size_t> stack;
  enumerate_rec(1, n, blocks, stack, out);
  return out;
}

const std::vector<NCPartition>& nc_cache(int n) {
  if (n < 1 || n > 12) throw LimitError("nc_cache: n must be in [1, 12]");
  static std::mutex mu;
  static std::vector<NCPartition> cache[13];
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (slot.empty()) slot = enumerate_nc(n);
  return slot;
}

NCPartition kreweras(const NCPartition& p) {
  const int n = p.n;
  // sigma: each block traversed as a cycle in increasing order.
  std::vector<int> sigma_inv(static_cast<std::size_t>(n) + 1);
  for (const auto& b : p.blocks) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      int from = b[j];
      int to = b[(j + 1) % b.size()];
      sigma_inv[static_cast<std::size_t>(to)] = from;
    }
  }
  // Cycles of sigma^{-1} . gamma, gamma the cycle (1 2 ... n), give Kr(p).
  std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
  std::vector<std::vector<int>> blocks;
  for (int start = 1; start <= n; ++start) {
    if (used[static_cast<std::size_t>(start)]) continue;
    std::vector<int> cycle;
    int cur = start;
    while (!used[static_cast<std::size_t>(cur)]) {
      used[static_cast<std::size_t>(cur)] = true;
      cycle.push_back(cur);
      int gamma = cur % n + 1;
      cur = sigma_inv[static_cast<std::size_t>(gamma)];
    }
    blocks.push_back(std::move(cycle));
  }
  return NCPartition::make(n, std::move(blocks));
}

std::int64_t catalan(int n) {
  static const std::int64_t table[] = {1,    1,     2,     5,     14,
                                       42,   132,   429,   1430,  4862,
                                       16796, 58786, 208012};
  if (n < 0 || n > 12) throw LimitError("catalan: n must be in [0, 12]");
  return table[n];
}

MomentSequence MomentSequence::from_doubles(std::span<const double> m) {
  MomentSequence s;
  s.exact = false;
  s.values.reserve(m.size());
  for (double v : m) s.values.push_back(rat_from_double(v));
  return s;
}

MomentSequence MomentSequence::from_rationals(std::vector<Rat> m) {
  MomentSequence s;
  s.exact = true;
  s.values = std::move(m);
  return s;
}

std::vector<double> MomentSequence::as_doubles() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const Rat& v : values) out.push_back(to_double(v));
  return out;
}

std::vector<std::string> MomentSequence::as_strings() const {
  std::vector<std::string> out;
  out.reserve(values.size());
  for (const Rat& v : values) out.push_back(rat_to_string(v));
  return out;
}

namespace {

Rat block_product(const NCPartition& p, const std::vector<Rat>& kappa) {
  Rat prod = 1;
  for (const auto& b : p.blocks) prod *= kappa[b.size() - 1];
  return prod;
}

}  // namespace

std::vector<Rat> cumulants_from_moments(const MomentSequence& m) {
  const std::size_t k = m.size();
  if (k > 12) throw LimitError("cumulants_from_moments: k must be <= 12");
  std::vector<Rat> kappa(k);
  for (std::size_t n = 1; n <= k; ++n) {
    // kappa_n = m_n minus the contribution of every pi != {1..n}.
    Rat rest = 0;
    for (const NCPartition& p : nc_cache(static_cast<int>(n))) {
      if (p.blocks.size() == 1) continue;
      rest += block_product(p, kappa);
    }
    kappa[n - 1] = m.values[n - 1] - rest;
  }
  return kappa;
}

MomentSequence moments_from_cumulants(std::span<const Rat> kappa, bool exact) {
  const std::size_t k = kappa.size();
  if (k > 12) throw LimitError("moments_from_cumulants: k must be <= 12");
  std::vector<Rat> kv(kappa.begin(), kappa.end());
  std::vector<Rat> m(k);
  for (std::size_t n = 1; n <= k; ++n) {
    Rat sum = 0;
    for (const NCPartition& p : nc_cache(static_cast<int>(n)))
      sum += block_product(p, kv);
    m[n - 1] = sum;
  }
  MomentSequence out;
  out.values = std::move(m);
  out.exact = exact;
  return out;
}

MomentSequence add_conv_moments(const MomentSequence& a,
                                const MomentSequence& b, int k) {
  if (k < 1) throw ValidationError("add_conv_moments: k must be >= 1");
  if (a.size() < static_cast<std::size_t>(k) ||
      b.size() < static_cast<std::size_t>(k))
    throw ValidationError("add_conv_moments: need k moments of both inputs");
  MomentSequence ta, tb;
  ta.values.assign(a.values.begin(), a.values.begin() + k);
  ta.exact = a.exact;
  tb.values.assign(b.values.begin(), b.values.begin() + k);
  tb.exact = b.exact;
  std::vector<Rat> ka = cumulants_from_moments(ta);
  std::vector<Rat> kb = cumulants_from_moments(tb);
  for (int i = 0; i < k; ++i) ka[static_cast<std::size_t>(i)] += kb[static_cast<std::size_t>(i)];
  return moments_from_cumulants(ka, a.exact && b.exact);
}

MomentSequence mult_conv_moments(const MomentSequence& a,
                                 const MomentSequence& b, int k) {
  if (k < 1) throw ValidationError("mult_conv_moments: k must be >= 1");
  if (k > 10) throw LimitError("mult_conv_moments: k must be <= 10");
  if (a.size() < static_cast<std::size_t>(k) ||
      b.size() < static_cast<std::size_t>(k))
    throw ValidationError("mult_conv_moments: need k moments of both inputs");
  MomentSequence ta;
  ta.values.assign(a.values.begin(), a.values.begin() + k);
  ta.exact = a.exact;
  std::vector<Rat> ka = cumulants_from_moments(ta);

  std::vector<Rat> m(static_cast<std::size_t>(k));
  for (int n = 1; n <= k; ++n) {
    Rat sum = 0;
    for (const NCPartition& p : nc_cache(n)) {
      Rat term = block_product(p, ka);
      if (term == 0) continue;
      NCPartition kr = kreweras(p);
      for (const auto& w : kr.blocks) term *= b.values[w.size() - 1];
      sum += term;
    }
    m[static_cast<std::size_t>(n) - 1] = sum;
  }
  MomentSequence out;
  out.values = std::move(m);
  out.exact = a.exact && b.exact;
  return out;
}

MomentSequence semicircle_moments(const Rat& t, int k) {
  std::vector<Rat> m(static_cast<std::size_t>(k), Rat(0));
  for (int j = 1; 2 * j <= k; ++j) {
    Rat tj = 1;
    for (int i = 0; i < j; ++i) tj *= t;
    m[static_cast<std::size_t>(2 * j) - 1] = Rat(catalan(j)) * tj;
  }
  return MomentSequence::from_rationals(std::move(m));
}

MomentSequence point_mass_moments(const Rat& c, int k) {
  std::vector<Rat> m(static_cast<std::size_t>(k));
  Rat p = 1;
  for (int n = 1; n <= k; ++n) {
    p *= c;
    m[static_cast<std::size_t>(n) - 1] = p;
  }
  return MomentSequence::from_rationals(std::move(m));
}

MomentSequence uniform_interval_moments(const Rat& lo, const Rat& hi, int k) {
  if (!(lo < hi)) throw ValidationError("uniform_interval_moments: lo < hi required");
  std::vector<Rat> m(static_cast<std::size_t>(k));
  Rat plo = lo, phi = hi;
  for (int n = 1; n <= k; ++n) {
    plo *= lo;
    phi *= hi;
    m[static_cast<std::size_t>(n) - 1] = (phi - plo) / (Rat(n + 1) * (hi - lo));
  }
  return MomentSequence::from_rationals(std::move(m));
}

MomentSequence atomic_moments(std::span<const std::pair<Rat, Rat>> atoms, int k) {
  std::vector<Rat> m(static_cast<std::size_t>(k), Rat(0));
  for (const auto& [loc, w] : atoms) {
    Rat p = 1;
    for (int n = 1; n <= k; ++n) {
      p *= loc;
      m[static_cast<std::size_t>(n) - 1] += w * p;
    }
  }
  return MomentSequence::from_rationals(std::move(m));
}

}  // namespace freeconv
