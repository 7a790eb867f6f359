#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "minihes/curvature.hpp"
#include "minihes/model.hpp"
#include "minihes/parallel.hpp"

namespace minihes {

struct CgSettings {
  // relative residual tolerance: stop once ||r|| <= tau * ||rhs||
  double tau = 0.1;
  // the block system is f x f, so f steps suffice in exact arithmetic
  int max_iters = 0;  // 0 -> use f

  int effective_max_iters(int f) const {
    return max_iters > 0 ? max_iters : f;
  }
};

struct BlockSolve {
  std::vector<double> dx;
  int iters = 0;
  double final_residual = 0.0;
};

class CgError : public std::runtime_error {
 public:
  CgError(int entity, const std::string& what)
      : std::runtime_error("cg: entity " + std::to_string(entity) + ": " +
                           what),
        entity_(entity) {}
  int entity() const { return entity_; }

 private:
  int entity_;
};

// Matrix-free CG on one entity's damped Gauss-Newton block, cold start at 0.
inline BlockSolve solve_block(const BlockOperatorContext& ctx, int entity,
                              std::span<const double> rhs,
                              const CgSettings& settings) {
  if (settings.tau < 0) throw std::invalid_argument("tau must be >= 0");
  const int f = static_cast<int>(rhs.size());
  BlockSolve result;
  result.dx.assign(f, 0.0);

  std::vector<double> r(rhs.begin(), rhs.end());
  double rr = dot(r, r);
  const double rhs_norm = std::sqrt(rr);
  if (rhs_norm == 0.0) return result;
  const double stop = settings.tau * rhs_norm;

  std::vector<double> p = r;
  std::vector<double> ap(f);
  const int max_iters = settings.effective_max_iters(f);
  for (int k = 0; k < max_iters; ++k) {
    gnvp_block(ctx, entity, p, ap);
    double pap = dot(p, ap);
    if (!std::isfinite(pap))
      throw CgError(entity, "non-finite curvature product");
    if (pap <= 0.0)
      throw CgError(entity, "operator not positive definite (p'Ap = " +
                                std::to_string(pap) + ")");
    double alpha = rr / pap;
    for (int d = 0; d < f; ++d) {
      result.dx[d] += alpha * p[d];
      r[d] -= alpha * ap[d];
    }
    double rr_next = dot(r, r);
    if (!std::isfinite(rr_next)) throw CgError(entity, "non-finite residual");
    ++result.iters;
    if (std::sqrt(rr_next) <= stop || rr_next == 0.0) {
      rr = rr_next;
      break;
    }
    double beta = rr_next / rr;
    for (int d = 0; d < f; ++d) p[d] = r[d] + beta * p[d];
    rr = rr_next;
  }
  result.final_residual = std::sqrt(rr);
  return result;
}

// Per-block solves with rhs = -gradient; blocks are independent, so output
// slices are disjoint and the result is invariant to the worker count.
inline BlockVector solve_all(const BlockOperatorContext& ctx,
                             const BlockVector& grad,
                             const CgSettings& settings,
                             ThreadPool* pool = nullptr,
                             const WorkPartition* partition = nullptr) {
  const FactorState& s = ctx.state;
  if (grad.size() != s.dim())
    throw std::invalid_argument("solve_all: gradient length mismatch");
  BlockVector delta(grad.size(), 0.0);
  auto solve_one = [&](int e) {
    auto g = block_of(grad, e, s.f);
    std::vector<double> rhs(g.size());
    for (std::size_t d = 0; d < rhs.size(); ++d) rhs[d] = -g[d];
    BlockSolve sol = solve_block(ctx, e, rhs, settings);
    auto out = block_of(delta, e, s.f);
    for (std::size_t d = 0; d < rhs.size(); ++d) out[d] = sol.dx[d];
  };
  if (pool != nullptr && partition != nullptr) {
    run_blocks(*pool, *partition, solve_one);
  } else {
    for (int e = 0; e < s.entity_count(); ++e) solve_one(e);
  }
  return delta;
}

}  // namespace minihes
