// Acceptance suite: one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "minihes/minihes.hpp"

using namespace minihes;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %-28s %s\n", pass ? "PASS" : "FAIL", id, name,
              detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------- 1 + 2

void criterion_gradient_and_hessian() {
  auto rng = make_rng(1001, "acceptance-grad");
  const double lambdas[] = {0.0, 0.02, 0.1};
  double grad_err = 0.0, hess_err = 0.0;
  auto t0 = Clock::now();
  for (int k = 0; k < 21; ++k) {
    auto inst = verify::make_random_instance(rng, 12, 4);
    double lambda = lambdas[k % 3];

    auto g = gradient(inst.state, inst.data, lambda);
    auto g_fd = verify::fd_gradient(inst.state, inst.data, lambda, 1e-6);
    for (std::size_t d = 0; d < g.size(); ++d)
      grad_err = std::max(grad_err, std::abs(g[d] - g_fd[d]) /
                                        std::max(1.0, std::abs(g_fd[d])));

    auto h = verify::dense_hessian(inst.state, inst.data, lambda);
    auto h_fd = verify::fd_hessian(inst.state, inst.data, lambda, 1e-5);
    for (std::size_t d = 0; d < h.values.size(); ++d)
      hess_err = std::max(hess_err, std::abs(h.values[d] - h_fd.values[d]));
  }
  double elapsed = seconds_since(t0);
  report(1, "gradient vs finite diff", grad_err < 1e-6 && elapsed < 5.0,
         fmt("max rel err %.3e (< 1e-6), %.2fs (< 5s)", grad_err, elapsed));
  report(2, "exact Hessian vs finite diff", hess_err < 1e-5,
         fmt("max entry err %.3e (< 1e-5)", hess_err));
}

// ---------------------------------------------------------------- 3

void criterion_gnvp() {
  auto rng = make_rng(1003, "acceptance-gnvp");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double block_err = 0.0, probe_err = 0.0;
  for (int k = 0; k < 6; ++k) {
    auto inst = verify::make_random_instance(rng, 8, 3);
    const auto& s = inst.state;
    auto gn = verify::dense_gauss_newton(s, inst.data);
    for (double gamma : {0.0, 0.1, 1.0}) {
      double lambda = 0.02;
      BlockOperatorContext ctx{s, inst.data, lambda, gamma};
      for (int e = 0; e < s.entity_count(); ++e) {
        std::vector<double> v(s.f);
        for (double& x : v) x = unit(rng);
        auto w = gnvp_block(ctx, e, v);
        const auto& adj = entity_adjacency(inst.data, s.num_users, e);
        double shift = gamma + lambda * static_cast<double>(adj.size());
        for (int a = 0; a < s.f; ++a) {
          double dense = shift * v[a];
          for (int b = 0; b < s.f; ++b)
            dense += gn.at(e * s.f + a, e * s.f + b) * v[b];
          block_err = std::max(block_err, std::abs(w[a] - dense));
        }
      }
    }
    // basis probing with gamma = lambda = 0 reconstructs the dense
    // block-diagonal GN matrix
    BlockOperatorContext plain{s, inst.data, 0.0, 0.0};
    const int n = static_cast<int>(s.dim());
    for (int col = 0; col < n; ++col) {
      BlockVector basis(n, 0.0);
      basis[col] = 1.0;
      auto out = full_gnvp(plain, basis);
      int block = col / s.f;
      for (int row = 0; row < n; ++row) {
        double want = row / s.f == block ? gn.at(row, col) : 0.0;
        probe_err = std::max(probe_err, std::abs(out[row] - want));
      }
    }
  }
  report(3, "GNVP vs dense GN", block_err < 1e-10 && probe_err < 1e-10,
         fmt("block err %.3e, basis-probe err %.3e (< 1e-10)", block_err,
             probe_err));
}

// ---------------------------------------------------------------- 4

void criterion_operator_properties() {
  auto rng = make_rng(1004, "acceptance-props");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto inst = verify::make_random_instance(rng, 10, 3);
  const auto& s = inst.state;
  const double gamma = 0.5;
  BlockOperatorContext ctx{s, inst.data, 0.03, gamma};
  const std::size_t n = s.dim();

  double sym_err = 0.0, lin_err = 0.0;
  bool pd_ok = true, local_ok = true;
  for (int probe = 0; probe < 100; ++probe) {
    BlockVector v(n), w(n);
    for (double& x : v) x = unit(rng);
    for (double& x : w) x = unit(rng);
    auto av = full_gnvp(ctx, v);
    auto aw = full_gnvp(ctx, w);
    sym_err = std::max(sym_err, std::abs(dot(w, av) - dot(v, aw)));
    pd_ok = pd_ok && dot(v, av) >= gamma * dot(v, v) - 1e-10;

    BlockVector combo(n);
    for (std::size_t k = 0; k < n; ++k) combo[k] = 1.5 * v[k] - 0.25 * w[k];
    auto a_combo = full_gnvp(ctx, combo);
    for (std::size_t k = 0; k < n; ++k)
      lin_err = std::max(lin_err,
                         std::abs(a_combo[k] - (1.5 * av[k] - 0.25 * aw[k])));

    // block locality
    int e = probe % s.entity_count();
    BlockVector bumped = v;
    bumped[e * s.f] += 1.0;
    auto out = full_gnvp(ctx, bumped);
    for (std::size_t k = 0; k < n; ++k)
      if (static_cast<int>(k) / s.f != e && out[k] != av[k]) local_ok = false;
  }
  report(4, "operator properties",
         sym_err < 1e-10 && lin_err < 1e-10 && pd_ok && local_ok,
         fmt("sym %.3e lin %.3e pd=%s locality=%s", sym_err, lin_err,
             pd_ok ? "yes" : "no", local_ok ? "yes" : "no"));
}

// ---------------------------------------------------------------- 5

void criterion_cg_exactness() {
  auto rng = make_rng(1005, "acceptance-cg");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> fac(0.2, 1.2);
  double err = 0.0;
  for (int f : {2, 3, 5, 20}) {
    auto shape = verify::make_random_instance(rng, 6, 2);
    FactorState s;
    s.f = f;
    s.num_users = shape.data.num_users;
    s.num_items = shape.data.num_items;
    s.values.resize(std::size_t(s.entity_count()) * f);
    for (double& v : s.values) v = fac(rng);

    BlockOperatorContext ctx{s, shape.data, 0.01, 0.5};
    auto gn = verify::dense_gauss_newton(s, shape.data, 1 << 20);
    for (int e = 0; e < s.entity_count(); ++e) {
      std::vector<double> rhs(f);
      for (double& x : rhs) x = unit(rng);
      auto sol = solve_block(ctx, e, rhs, CgSettings{0.0, f});
      const auto& adj = entity_adjacency(shape.data, s.num_users, e);
      verify::DenseMatrix block(f, f);
      double shift = 0.5 + 0.01 * static_cast<double>(adj.size());
      for (int a = 0; a < f; ++a) {
        for (int b = 0; b < f; ++b)
          block.at(a, b) = gn.at(e * f + a, e * f + b);
        block.at(a, a) += shift;
      }
      auto direct = verify::cholesky_solve(block, rhs);
      for (int a = 0; a < f; ++a)
        err = std::max(err, std::abs(sol.dx[a] - direct[a]));
    }
  }
  report(5, "CG vs dense direct solve", err < 1e-8,
         fmt("max err %.3e (< 1e-8), f in {2,3,5,20}", err));
}

// ---------------------------------------------------------------- 6

void criterion_synthetic_recovery() {
  SyntheticSpec spec;
  spec.num_users = 50;
  spec.num_items = 40;
  spec.rank = 3;
  spec.density = 0.3;
  spec.noise_sigma = 0.01;
  spec.seed = 1006;
  auto data = make_synthetic(spec);
  auto parts = split_dataset(data, {0.6, 0.2, 0.2}, 1006);

  OptimizerConfig cfg;
  cfg.optimizer = Optimizer::kMiniHes;
  cfg.f = 3;
  cfg.lambda = 0.01;
  cfg.gamma = 1.0;
  cfg.tau = 0.1;
  cfg.max_epochs = 100;
  cfg.seed = 1006;
  auto t0 = Clock::now();
  auto result = train(parts.train, parts.validation, &parts.test, cfg);
  double elapsed = seconds_since(t0);
  bool pass = result.report.test_rmse <= 3 * spec.noise_sigma &&
              result.report.epochs_run <= 100 && elapsed < 30.0;
  report(6, "synthetic rank-3 recovery", pass,
         fmt("test RMSE %.4f (<= %.2f), %d epochs, %.1fs (< 30s)",
             result.report.test_rmse, 3 * spec.noise_sigma,
             result.report.epochs_run, elapsed));
}

// ---------------------------------------------------------------- 7

struct TunedRun {
  double best_val = std::numeric_limits<double>::infinity();
  double test_rmse = 0.0;
  double test_mae = 0.0;
  double lambda = 0.0;
};

TunedRun tune_lambda(const SplitResult& sets, OptimizerConfig base) {
  TunedRun best;
  for (int step = 0; step <= 10; ++step) {
    OptimizerConfig cfg = base;
    cfg.lambda = 0.01 * step;
    auto result = train(sets.train, sets.validation, &sets.test, cfg);
    if (result.report.best_validation < best.best_val) {
      best.best_val = result.report.best_validation;
      best.test_rmse = result.report.test_rmse;
      best.test_mae = result.report.test_mae;
      best.lambda = cfg.lambda;
    }
  }
  return best;
}

void criterion_desk_benchmark() {
  // Uses a real MovieLens-100K u.data file when MINIHES_ML100K points at
  // one; otherwise a deterministic stand-in with the same shape and scale.
  HdiDataset data;
  const char* env = std::getenv("MINIHES_ML100K");
  std::string source;
  if (env != nullptr && *env != '\0') {
    std::ifstream in(env);
    data = parse_ratings(in);
    source = "ml-100k";
  } else {
    data = make_ml100k_like(1007);
    source = "ml-100k-shaped synthetic";
  }
  auto sets = split_dataset(data, {0.6, 0.2, 0.2}, 1007);

  OptimizerConfig mh;
  mh.optimizer = Optimizer::kMiniHes;
  mh.f = 20;
  mh.gamma = 1.0;
  mh.tau = 0.1;
  mh.seed = 1007;

  OptimizerConfig adam;
  adam.optimizer = Optimizer::kAdam;
  adam.f = 20;
  adam.learning_rate = 0.01;
  adam.seed = 1007;

  auto t0 = Clock::now();
  TunedRun mh_run = tune_lambda(sets, mh);
  TunedRun adam_run = tune_lambda(sets, adam);
  double elapsed = seconds_since(t0);

  bool pass = mh_run.test_rmse <= adam_run.test_rmse + 0.01 &&
              mh_run.test_mae <= adam_run.test_mae;
  report(7, "desk-scale benchmark", pass,
         fmt("[%s] mini-hes RMSE %.4f MAE %.4f (lambda %.2f) vs adam RMSE "
             "%.4f MAE %.4f (lambda %.2f), %.0fs",
             source.c_str(), mh_run.test_rmse, mh_run.test_mae, mh_run.lambda,
             adam_run.test_rmse, adam_run.test_mae, adam_run.lambda, elapsed));
}

// ---------------------------------------------------------------- 8

void criterion_thread_invariance() {
  SyntheticSpec spec;
  spec.num_users = 2000;
  spec.num_items = 1500;
  spec.rank = 3;
  spec.density = 1.0e6 / (2000.0 * 1500.0);
  spec.noise_sigma = 0.1;
  spec.seed = 1008;
  auto data = make_synthetic(spec);

  OptimizerConfig cfg;
  cfg.f = 8;
  cfg.max_epochs = 2;
  cfg.seed = 1008;

  bool identical = true;
  FactorState reference = bench_workload(data, cfg, 1);
  for (int threads : {2, 4, 8}) {
    FactorState other = bench_workload(data, cfg, threads);
    identical = identical && other.values == reference.values;
  }

  const unsigned cores = std::thread::hardware_concurrency();
  if (cores >= 8) {
    auto bench = bench_threads(data, cfg, {2, 4, 8}, 3, "synthetic-1M");
    bool nonincreasing =
        bench.rows[0].median_seconds >= bench.rows[1].median_seconds &&
        bench.rows[1].median_seconds >= bench.rows[2].median_seconds;
    bool speedup_ok = bench.rows[2].speedup >= 1.5;
    report(8, "thread invariance + scaling",
           identical && nonincreasing && speedup_ok,
           fmt("bitwise identical over {1,2,4,8}: %s; medians %.2f/%.2f/%.2fs; "
               "speedup(8 vs 2) %.2f (>= 1.5)",
               identical ? "yes" : "no", bench.rows[0].median_seconds,
               bench.rows[1].median_seconds, bench.rows[2].median_seconds,
               bench.rows[2].speedup));
  } else {
    report(8, "thread invariance + scaling", identical,
           fmt("bitwise identical over {1,2,4,8}: %s; scaling gate skipped "
               "(%u cores < 8, gate requires >= 8 physical cores)",
               identical ? "yes" : "no", cores));
  }
}

// ---------------------------------------------------------------- 9

void criterion_early_stopping() {
  SyntheticSpec spec;
  spec.seed = 1009;
  auto data = make_synthetic(spec);
  auto parts = split_dataset(data, {0.6, 0.2, 0.2}, 1009);

  // frozen model: validation never improves after epoch 1
  OptimizerConfig frozen;
  frozen.optimizer = Optimizer::kSgd;
  frozen.learning_rate = 0.0;
  frozen.f = 3;
  frozen.patience = 10;
  frozen.seed = 1009;
  auto stalled = train(parts.train, parts.validation, &parts.test, frozen);
  bool stop_ok = stalled.report.epochs_run == frozen.patience + 1;

  // best-snapshot rule on a normal run
  OptimizerConfig cfg;
  cfg.optimizer = Optimizer::kMiniHes;
  cfg.f = 3;
  cfg.lambda = 0.01;
  cfg.max_epochs = 40;
  cfg.early_stop = false;
  cfg.seed = 1009;
  auto run = train(parts.train, parts.validation, &parts.test, cfg);
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (const auto& e : run.report.epochs)
    if (e.val_metric < best) {
      best = e.val_metric;
      best_epoch = e.epoch;
    }
  auto best_eval = evaluate(run.best_state, parts.test);
  bool snapshot_ok = run.report.best_epoch == best_epoch &&
                     run.report.test_rmse == best_eval.rmse &&
                     run.report.test_mae == best_eval.mae;

  report(9, "early stopping + best snapshot", stop_ok && snapshot_ok,
         fmt("stalled run stopped at %d epochs (patience+1 = %d); best "
             "snapshot rule: %s",
             stalled.report.epochs_run, frozen.patience + 1,
             snapshot_ok ? "ok" : "violated"));
}

}  // namespace

int main() {
  criterion_gradient_and_hessian();
  criterion_gnvp();
  criterion_operator_properties();
  criterion_cg_exactness();
  criterion_synthetic_recovery();
  criterion_desk_benchmark();
  criterion_thread_invariance();
  criterion_early_stopping();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
