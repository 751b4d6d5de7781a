#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace sysid {

using Rng = std::mt19937_64;

/// Engine seeded from a tuple of integers, e.g. {seed, replication, stream}.
/// Distinct tuples give independent substreams, so results do not depend on
/// the order in which parallel workers consume them.
inline Rng make_rng(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * key.size());
  for (std::uint64_t k : key) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n, double variance) {
  Eigen::VectorXd v(n);
  if (variance == 0.0) {
    v.setZero();
    return v;
  }
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace sysid
