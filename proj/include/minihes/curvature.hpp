#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "minihes/data.hpp"
#include "minihes/model.hpp"
#include "minihes/parallel.hpp"

namespace minihes {

// Everything needed to apply one entity's damped Gauss-Newton block
// operator (J_e^T J_e + (gamma + lambda*|R_Ke|) I) without forming it.
struct BlockOperatorContext {
  const FactorState& state;
  const HdiDataset& data;
  double lambda = 0.0;
  double gamma = 0.0;
};

inline const std::vector<std::pair<int, double>>& entity_adjacency(
    const HdiDataset& data, int num_users, int entity) {
  return entity < num_users ? data.by_user[entity]
                            : data.by_item[entity - num_users];
}

// J_e * v for one block: one scalar per observation of the entity,
// ordered by the sorted adjacency list.
inline std::vector<double> jvp_block(const BlockOperatorContext& ctx,
                                     int entity,
                                     std::span<const double> v_block) {
  const FactorState& s = ctx.state;
  const auto& adj = entity_adjacency(ctx.data, s.num_users, entity);
  std::vector<double> out;
  out.reserve(adj.size());
  for (const auto& [other, rating] : adj) {
    int counterpart = entity < s.num_users ? s.num_users + other : other;
    out.push_back(dot(v_block, s.block(counterpart)));
  }
  return out;
}

// (J_e^T J_e + (gamma + lambda*|R_Ke|) I) * v, single pass over the sorted
// adjacency so the accumulation order never depends on scheduling.
inline void gnvp_block(const BlockOperatorContext& ctx, int entity,
                       std::span<const double> v_block,
                       std::span<double> out) {
  const FactorState& s = ctx.state;
  const int f = s.f;
  for (double& o : out) o = 0.0;
  const auto& adj = entity_adjacency(ctx.data, s.num_users, entity);
  for (const auto& [other, rating] : adj) {
    int counterpart = entity < s.num_users ? s.num_users + other : other;
    auto xo = s.block(counterpart);
    double jv = dot(v_block, xo);
    for (int d = 0; d < f; ++d) out[d] += jv * xo[d];
  }
  const double shift = ctx.gamma + ctx.lambda * static_cast<double>(adj.size());
  for (int d = 0; d < f; ++d) out[d] += shift * v_block[d];
}

inline std::vector<double> gnvp_block(const BlockOperatorContext& ctx,
                                      int entity,
                                      std::span<const double> v_block) {
  std::vector<double> out(v_block.size());
  gnvp_block(ctx, entity, v_block, out);
  return out;
}

// Block-diagonal operator over the whole decision vector: each output block
// depends only on its own input block.
inline BlockVector full_gnvp(const BlockOperatorContext& ctx,
                             const BlockVector& v, ThreadPool* pool = nullptr,
                             const WorkPartition* partition = nullptr) {
  const FactorState& s = ctx.state;
  if (v.size() != s.dim())
    throw std::invalid_argument("full_gnvp: vector length mismatch");
  BlockVector out(v.size(), 0.0);
  auto apply = [&](int e) {
    gnvp_block(ctx, e, block_of(v, e, s.f), block_of(out, e, s.f));
  };
  if (pool != nullptr && partition != nullptr) {
    run_blocks(*pool, *partition, apply);
  } else {
    for (int e = 0; e < s.entity_count(); ++e) apply(e);
  }
  return out;
}

}  // namespace minihes
