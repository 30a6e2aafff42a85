#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "freeconv/errors.hpp"
#include "freeconv/rational.hpp"

namespace freeconv {

/// A non-crossing set partition of {1..n}. Blocks are sorted internally and
/// ordered by their minima; construction validates the non-crossing predicate.
struct NCPartition {
  int n = 0;
  std::vector<std::vector<int>> blocks;

  static NCPartition make(int n, std::vector<std::vector<int>> blocks);

  bool operator==(const NCPartition&) const = default;
};

/// Crossing test for an arbitrary block list: some a<b<c<d with a,c in one
/// block and b,d in another.
bool is_noncrossing(const std::vector<std::vector<int>>& blocks);

/// All non-crossing partitions of {1..n}, 1 <= n <= 12; count = Catalan(n).
/// Generated by recursive block insertion with non-crossing pruning.
std::vector<NCPartition> enumerate_nc(int n);

/// Shared, lazily-built enumeration cache (thread-safe).
const std::vector<NCPartition>& nc_cache(int n);

/// Kreweras complement on the interleaved circle 1,1',...,n,n'.
/// Satisfies |p| + |kreweras(p)| = n + 1 and kreweras^2 = rotation by one.
NCPartition kreweras(const NCPartition& p);

std::int64_t catalan(int n);

/// Moment sequence m_1..m_k. Values are exact rationals; `exact` records
/// whether the inputs were exact (doubles are converted losslessly, but the
/// flag is cleared so downstream consumers know the provenance).
struct MomentSequence {
  std::vector<Rat> values;
  bool exact = true;

  static MomentSequence from_doubles(std::span<const double> m);
  static MomentSequence from_rationals(std::vector<Rat> m);

  std::size_t size() const { return values.size(); }
  const Rat& operator[](std::size_t k1) const { return values.at(k1 - 1); }  // 1-based
  std::vector<double> as_doubles() const;
  std::vector<std::string> as_strings() const;
};

/// Free cumulants kappa_1..kappa_k solving m_n = sum over NC(n) of the block
/// products. Exact rational arithmetic; k = m.size() <= 12.
std::vector<Rat> cumulants_from_moments(const MomentSequence& m);

/// Inverse of cumulants_from_moments via the non-crossing sum.
MomentSequence moments_from_cumulants(std::span<const Rat> kappa,
                                      bool exact = true);

/// Free additive convolution at the moment level: cumulants add.
MomentSequence add_conv_moments(const MomentSequence& a,
                                const MomentSequence& b, int k);

/// Free multiplicative convolution at the moment level:
///   m_n(A x B) = sum over pi in NC(n) of
///                prod_{V in pi} kappa_{|V|}(A) * prod_{W in Kr(pi)} m_{|W|}(B).
/// k <= 10; symmetric in A and B.
MomentSequence mult_conv_moments(const MomentSequence& a,
                                 const MomentSequence& b, int k);

// Closed-form exact moment sequences for the standard inputs.
MomentSequence semicircle_moments(const Rat& t, int k);
MomentSequence point_mass_moments(const Rat& c, int k);
MomentSequence uniform_interval_moments(const Rat& lo, const Rat& hi, int k);
MomentSequence atomic_moments(std::span<const std::pair<Rat, Rat>> atoms, int k);

}  // namespace freeconv
