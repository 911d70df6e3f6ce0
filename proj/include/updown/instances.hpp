#pragma once

#include "updown/chain.hpp"

namespace updown {

inline constexpr int kDefaultPermCap = 6;
inline constexpr int kDefaultGraphCap = 6;

/// Permutation chain: up inflates a uniform point (increasing with probability p),
/// down removes a uniform point. States are one-line encodings in lexicographic order.
ChainSpec perm_chain(const Rational& p, int cap = kDefaultPermCap);

/// Graph chain: up duplicates a uniform vertex (original and copy joined with probability
/// 1 - p), down deletes a uniform vertex. States are "n:bitstring" in bitstring order.
/// When UPDOWN_CACHE_DIR is set, enumerated levels are memoized there as text files.
ChainSpec graph_chain(const Rational& p, int cap = kDefaultGraphCap);

/// perm_chain or graph_chain by name ("perm" / "graph").
ChainSpec make_chain(const std::string& instance, const Rational& p, int cap);

}  // namespace updown
