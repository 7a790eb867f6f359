#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "minihes/cg.hpp"
#include "minihes/curvature.hpp"
#include "minihes/data.hpp"
#include "minihes/model.hpp"
#include "minihes/oracle.hpp"
#include "minihes/synthetic.hpp"

namespace minihes::verify {

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_error < tolerance; }
};

struct SuiteOptions {
  int instances = 20;
  int max_entities = 12;  // per side
  int max_f = 4;
  std::uint64_t seed = 0;
  // test hook: perturbs the curvature operator so the failure path can be
  // exercised end to end
  bool corrupt_operator = false;
};

struct RandomInstance {
  HdiDataset data;
  FactorState state;
};

// Small dense-ish instance with factors of order one, so relative errors
// against finite differences are meaningful.
inline RandomInstance make_random_instance(std::mt19937_64& rng,
                                           int max_entities, int max_f) {
  std::uniform_int_distribution<int> users(2, max_entities);
  std::uniform_int_distribution<int> items(2, max_entities);
  std::uniform_int_distribution<int> fs(1, max_f);
  RandomInstance inst;
  int nu = users(rng), ni = items(rng), f = fs(rng);

  std::uniform_real_distribution<double> rating(1.0, 5.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<RatingTriple> triples;
  for (int u = 0; u < nu; ++u)
    for (int i = 0; i < ni; ++i)
      if (coin(rng) < 0.5) triples.push_back({u, i, rating(rng)});
  if (triples.empty()) triples.push_back({0, 0, rating(rng)});
  inst.data = dataset_from_triples(nu, ni, std::move(triples));

  inst.state.f = f;
  inst.state.num_users = nu;
  inst.state.num_items = ni;
  inst.state.values.resize(std::size_t(nu + ni) * f);
  std::uniform_real_distribution<double> factor(0.2, 1.2);
  for (double& v : inst.state.values) v = factor(rng);
  return inst;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Randomized oracle suite: analytic gradient vs finite differences, exact
// Hessian vs finite differences, block GNVP vs the dense Gauss-Newton
// matrix, and CG vs a dense direct solve.
inline std::vector<CheckResult> run_suite(const SuiteOptions& opt) {
  auto rng = make_rng(opt.seed, "verify-suite");
  CheckResult grad{"gradient vs finite differences", 0.0, 1e-6};
  CheckResult hess{"dense Hessian vs finite differences", 0.0, 1e-5};
  CheckResult jac{"jvp vs dense Jacobian", 0.0, 1e-12};
  CheckResult gnvp{"gnvp vs dense Gauss-Newton", 0.0, 1e-10};
  CheckResult gradcons{"J^T residual vs gradient", 0.0, 1e-10};
  CheckResult cg{"CG vs dense direct solve", 0.0, 1e-8};

  const double lambdas[] = {0.0, 0.02, 0.1};
  const double gammas[] = {0.0, 0.1, 1.0};
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (int k = 0; k < opt.instances; ++k) {
    RandomInstance inst = make_random_instance(rng, opt.max_entities, opt.max_f);
    const FactorState& s = inst.state;
    const HdiDataset& data = inst.data;
    const int f = s.f;
    double lambda = lambdas[k % 3];
    double gamma = gammas[(k / 3) % 3];

    // gradient
    BlockVector g = gradient(s, data, lambda);
    BlockVector g_fd = fd_gradient(s, data, lambda, 1e-6);
    for (std::size_t d = 0; d < g.size(); ++d)
      grad.max_error = std::max(grad.max_error, rel_err(g[d], g_fd[d]));

    // exact Hessian
    DenseMatrix h = dense_hessian(s, data, lambda);
    DenseMatrix h_fd = fd_hessian(s, data, lambda, 1e-5);
    for (std::size_t d = 0; d < h.values.size(); ++d)
      hess.max_error =
          std::max(hess.max_error, std::abs(h.values[d] - h_fd.values[d]));

    // J^T (M - r) against the lambda = 0 gradient
    DenseMatrix jmat = dense_jacobian(s, data);
    std::vector<double> residual(data.entries.size());
    for (std::size_t row = 0; row < data.entries.size(); ++row) {
      const auto& e = data.entries[row];
      residual[row] = dot(s.user(e.user_id), s.item(e.item_id)) - e.rating;
    }
    BlockVector g0 = gradient(s, data, 0.0);
    for (int c = 0; c < jmat.cols; ++c) {
      double acc = 0.0;
      for (int r = 0; r < jmat.rows; ++r) acc += jmat.at(r, c) * residual[r];
      gradcons.max_error = std::max(gradcons.max_error, std::abs(acc - g0[c]));
    }

    // per-block jvp / gnvp against the dense matrices
    DenseMatrix gn = dense_gauss_newton(s, data);
    BlockOperatorContext ctx{s, data, lambda, gamma};
    for (int e = 0; e < s.entity_count(); ++e) {
      std::vector<double> v(f);
      for (double& x : v) x = unit(rng);

      auto jv = jvp_block(ctx, e, v);
      const auto& adj = entity_adjacency(data, s.num_users, e);
      // rows of the dense Jacobian restricted to this entity's columns
      std::size_t pos = 0;
      for (const auto& [other, rating] : adj) {
        // locate the dense row for this observation
        int uu = e < s.num_users ? e : other;
        int ii = e < s.num_users ? other : e - s.num_users;
        double dense = 0.0;
        for (std::size_t row = 0; row < data.entries.size(); ++row) {
          if (data.entries[row].user_id == uu &&
              data.entries[row].item_id == ii) {
            for (int d = 0; d < f; ++d)
              dense += jmat.at(static_cast<int>(row), e * f + d) * v[d];
            break;
          }
        }
        jac.max_error = std::max(jac.max_error, std::abs(jv[pos] - dense));
        ++pos;
      }

      auto w = gnvp_block(ctx, e, v);
      if (opt.corrupt_operator && !w.empty()) w[0] += 1.0;
      double shift = gamma + lambda * static_cast<double>(adj.size());
      for (int a = 0; a < f; ++a) {
        double dense = shift * v[a];
        for (int b = 0; b < f; ++b)
          dense += gn.at(e * f + a, e * f + b) * v[b];
        gnvp.max_error = std::max(gnvp.max_error, std::abs(w[a] - dense));
      }

      // CG exactness on this block (needs an SPD system)
      if (shift > 0.0 || !adj.empty()) {
        std::vector<double> rhs(f);
        for (double& x : rhs) x = unit(rng);
        CgSettings exact{0.0, f};
        BlockOperatorContext spd_ctx{s, data, lambda, std::max(gamma, 0.1)};
        BlockSolve sol = solve_block(spd_ctx, e, rhs, exact);
        if (opt.corrupt_operator && !sol.dx.empty()) sol.dx[0] += 1.0;
        DenseMatrix block(f, f);
        double spd_shift =
            std::max(gamma, 0.1) + lambda * static_cast<double>(adj.size());
        for (int a = 0; a < f; ++a) {
          for (int b = 0; b < f; ++b)
            block.at(a, b) = gn.at(e * f + a, e * f + b);
          block.at(a, a) += spd_shift;
        }
        auto direct = cholesky_solve(block, rhs);
        for (int a = 0; a < f; ++a)
          cg.max_error =
              std::max(cg.max_error, std::abs(sol.dx[a] - direct[a]));
      }
    }
  }
  return {grad, hess, jac, gnvp, gradcons, cg};
}

}  // namespace minihes::verify
