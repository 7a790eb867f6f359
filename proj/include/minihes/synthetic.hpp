#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "minihes/data.hpp"
#include "minihes/rng.hpp"

namespace minihes {

struct SyntheticSpec {
  int num_users = 50;
  int num_items = 40;
  int rank = 3;
  double density = 0.3;
  double noise_sigma = 0.01;
  double factor_lo = 0.0;
  double factor_hi = 1.0;
  // optional post-processing toward integer rating scales
  bool round_to_integer = false;
  double clamp_lo = 0.0;
  double clamp_hi = 0.0;  // clamp disabled unless hi > lo
  std::uint64_t seed = 0;
};

// Low-rank ground truth plus Gaussian noise; the noise level is the natural
// recovery floor for tests.
inline HdiDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.num_users < 1 || spec.num_items < 1 || spec.rank < 1)
    throw std::invalid_argument("synthetic: bad dimensions");
  if (!(spec.density > 0.0) || spec.density > 1.0)
    throw std::invalid_argument("synthetic: density must be in (0,1]");
  auto rng = make_rng(spec.seed, "synthetic-dataset");
  std::uniform_real_distribution<double> uni(spec.factor_lo, spec.factor_hi);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);

  std::vector<double> p(std::size_t(spec.num_users) * spec.rank);
  std::vector<double> q(std::size_t(spec.num_items) * spec.rank);
  for (double& v : p) v = uni(rng);
  for (double& v : q) v = uni(rng);

  const std::uint64_t cells =
      std::uint64_t(spec.num_users) * std::uint64_t(spec.num_items);
  std::uint64_t target = static_cast<std::uint64_t>(
      std::llround(spec.density * static_cast<double>(cells)));
  if (target == 0) target = 1;

  std::vector<RatingTriple> triples;
  triples.reserve(target);
  std::unordered_set<std::uint64_t> used;
  used.reserve(target * 2);
  std::uniform_int_distribution<int> pick_u(0, spec.num_users - 1);
  std::uniform_int_distribution<int> pick_i(0, spec.num_items - 1);
  while (triples.size() < target) {
    int u = pick_u(rng);
    int i = pick_i(rng);
    std::uint64_t key = (std::uint64_t(u) << 32) | std::uint32_t(i);
    if (!used.insert(key).second) continue;
    double r = 0.0;
    for (int d = 0; d < spec.rank; ++d)
      r += p[std::size_t(u) * spec.rank + d] * q[std::size_t(i) * spec.rank + d];
    if (spec.noise_sigma > 0) r += noise(rng);
    if (spec.round_to_integer) r = std::round(r);
    if (spec.clamp_hi > spec.clamp_lo)
      r = std::min(spec.clamp_hi, std::max(spec.clamp_lo, r));
    triples.push_back({u, i, r});
  }
  return dataset_from_triples(spec.num_users, spec.num_items,
                              std::move(triples));
}

// A stand-in with MovieLens-100K's shape: 943 users, 1682 items, 100000
// integer ratings on a 1..5 scale generated from a rank-10 model.
inline HdiDataset make_ml100k_like(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_users = 943;
  spec.num_items = 1682;
  spec.rank = 10;
  spec.density = 100000.0 / (943.0 * 1682.0);
  spec.noise_sigma = 0.4;
  spec.factor_lo = 0.25;
  spec.factor_hi = 0.75;
  spec.round_to_integer = true;
  spec.clamp_lo = 1.0;
  spec.clamp_hi = 5.0;
  spec.seed = seed;
  return make_synthetic(spec);
}

}  // namespace minihes
