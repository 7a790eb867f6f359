#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "minihes/data.hpp"
#include "minihes/parallel.hpp"
#include "minihes/rng.hpp"

namespace minihes {

// The unified decision vector: all user factor vectors stacked ahead of all
// item factor vectors, one length-f block per entity.
struct FactorState {
  int f = 0;
  int num_users = 0;
  int num_items = 0;
  std::vector<double> values;

  int entity_count() const { return num_users + num_items; }
  std::size_t dim() const { return values.size(); }

  std::span<double> block(int entity) {
    return {values.data() + static_cast<std::size_t>(entity) * f,
            static_cast<std::size_t>(f)};
  }
  std::span<const double> block(int entity) const {
    return {values.data() + static_cast<std::size_t>(entity) * f,
            static_cast<std::size_t>(f)};
  }
  std::span<const double> user(int u) const { return block(u); }
  std::span<const double> item(int i) const { return block(num_users + i); }
};

// Same layout as FactorState.values, viewed as per-entity blocks.
using BlockVector = std::vector<double>;

inline std::span<double> block_of(BlockVector& v, int entity, int f) {
  return {v.data() + static_cast<std::size_t>(entity) * f,
          static_cast<std::size_t>(f)};
}
inline std::span<const double> block_of(const BlockVector& v, int entity,
                                        int f) {
  return {v.data() + static_cast<std::size_t>(entity) * f,
          static_cast<std::size_t>(f)};
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
  return s;
}

inline FactorState init_factors(int num_users, int num_items, int f,
                                std::uint64_t seed) {
  if (num_users < 1 || num_items < 1)
    throw std::invalid_argument("need at least one user and one item");
  if (f < 1) throw std::invalid_argument("latent dimension must be >= 1");
  FactorState s;
  s.f = f;
  s.num_users = num_users;
  s.num_items = num_items;
  s.values.resize(static_cast<std::size_t>(num_users + num_items) * f);
  auto rng = make_rng(seed, "factor-init");
  std::uniform_real_distribution<double> uni(0.0, 0.04);
  for (double& v : s.values) v = uni(rng);
  return s;
}

inline double predict(const FactorState& s, int u, int i) {
  if (u < 0 || u >= s.num_users || i < 0 || i >= s.num_items)
    throw std::out_of_range("predict: entity index out of range");
  return dot(s.user(u), s.item(i));
}

// Squared-error loss with occurrence-weighted Tikhonov regularization:
// the lambda term is accumulated once per observed (u,i) pair.
inline double loss(const FactorState& s, const HdiDataset& data,
                   double lambda) {
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  double acc = 0.0;
  for (const auto& e : data.entries) {
    auto xu = s.user(e.user_id);
    auto xi = s.item(e.item_id);
    double res = e.rating - dot(xu, xi);
    double reg = 0.0;
    for (int d = 0; d < s.f; ++d) reg += xu[d] * xu[d] + xi[d] * xi[d];
    acc += 0.5 * (res * res + lambda * reg);
  }
  return acc;
}

// Gradient of one entity's block. Accumulation follows the sorted adjacency
// list, so the result is independent of how blocks are scheduled.
inline void gradient_block(const FactorState& s, const HdiDataset& data,
                           double lambda, int entity, std::span<double> out) {
  for (double& v : out) v = 0.0;
  auto xe = s.block(entity);
  const auto& adj = entity < s.num_users
                        ? data.by_user[entity]
                        : data.by_item[entity - s.num_users];
  for (const auto& [other, rating] : adj) {
    int counterpart = entity < s.num_users ? s.num_users + other : other;
    auto xo = s.block(counterpart);
    double res = rating - dot(xe, xo);
    for (int d = 0; d < s.f; ++d) out[d] -= res * xo[d];
  }
  const double reg = lambda * static_cast<double>(adj.size());
  for (int d = 0; d < s.f; ++d) out[d] += reg * xe[d];
}

inline BlockVector gradient(const FactorState& s, const HdiDataset& data,
                            double lambda, ThreadPool* pool = nullptr,
                            const WorkPartition* partition = nullptr) {
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  BlockVector g(s.dim(), 0.0);
  if (pool != nullptr && partition != nullptr) {
    run_blocks(*pool, *partition, [&](int e) {
      gradient_block(s, data, lambda, e, block_of(g, e, s.f));
    });
  } else {
    for (int e = 0; e < s.entity_count(); ++e)
      gradient_block(s, data, lambda, e, block_of(g, e, s.f));
  }
  return g;
}

struct EvalResult {
  double rmse = 0.0;
  double mae = 0.0;
};

inline EvalResult evaluate(const FactorState& s, const HdiDataset& data,
                           ThreadPool* pool = nullptr) {
  const std::size_t n = data.entries.size();
  if (n == 0) throw std::invalid_argument("evaluate: empty dataset");
  auto accumulate = [&](std::size_t lo, std::size_t hi, double* out) {
    double sq = 0.0, ab = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const auto& e = data.entries[k];
      double err = e.rating - dot(s.user(e.user_id), s.item(e.item_id));
      sq += err * err;
      ab += std::abs(err);
    }
    out[0] = sq;
    out[1] = ab;
  };
  double sq, ab;
  if (pool != nullptr && pool->worker_count() > 1) {
    auto sums = chunked_map(*pool, n, 4096, 2, accumulate);
    sq = sums[0];
    ab = sums[1];
  } else {
    // same fixed-chunk order as the parallel path
    double partial[2];
    sq = ab = 0.0;
    for (std::size_t lo = 0; lo < n; lo += 4096) {
      accumulate(lo, std::min(n, lo + 4096), partial);
      sq += partial[0];
      ab += partial[1];
    }
  }
  return {std::sqrt(sq / n), ab / n};
}

// --- factor snapshot serialization (fixed little-endian layout) ---

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}

}  // namespace detail

inline void save_factors(const std::string& path, const FactorState& s,
                         std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write("MHF1", 4);
  detail::put_u64(out, static_cast<std::uint64_t>(s.num_users));
  detail::put_u64(out, static_cast<std::uint64_t>(s.num_items));
  detail::put_u64(out, static_cast<std::uint64_t>(s.f));
  detail::put_u64(out, seed);
  for (double v : s.values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    detail::put_u64(out, bits);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct FactorSnapshot {
  FactorState state;
  std::uint64_t seed = 0;
};

inline FactorSnapshot load_factors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MHF1", 4) != 0)
    throw std::runtime_error(path + ": not a factor snapshot");
  FactorSnapshot snap;
  snap.state.num_users = static_cast<int>(detail::get_u64(in));
  snap.state.num_items = static_cast<int>(detail::get_u64(in));
  snap.state.f = static_cast<int>(detail::get_u64(in));
  snap.seed = detail::get_u64(in);
  std::size_t n = static_cast<std::size_t>(snap.state.entity_count()) *
                  snap.state.f;
  snap.state.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t bits = detail::get_u64(in);
    std::memcpy(&snap.state.values[k], &bits, 8);
  }
  if (!in) throw std::runtime_error(path + ": truncated snapshot");
  return snap;
}

}  // namespace minihes
