#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "minihes/cg.hpp"
#include "minihes/data.hpp"
#include "minihes/model.hpp"
#include "minihes/parallel.hpp"
#include "minihes/trainer.hpp"

namespace minihes {

struct SpeedupRow {
  int threads = 0;
  double median_seconds = 0.0;
  double stddev_seconds = 0.0;
  double speedup = 1.0;  // vs the first listed thread count
};

struct SpeedupReport {
  std::string dataset;
  std::vector<SpeedupRow> rows;
};

namespace detail {

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / (xs.size() - 1));
}

}  // namespace detail

// One fixed-epoch Mini-Hes workload, early stop disabled. Returns the final
// state so callers can compare across thread counts.
inline FactorState bench_workload(const HdiDataset& data,
                                  const OptimizerConfig& base, int threads) {
  OptimizerConfig cfg = base;
  cfg.threads = threads;
  cfg.early_stop = false;
  FactorState state =
      init_factors(data.num_users, data.num_items, cfg.f, cfg.seed);
  ThreadPool pool(threads);
  WorkPartition partition =
      make_partition(data.num_users, data.num_items, threads);
  CgSettings cg{cfg.tau, cfg.cg_max_iters};
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    BlockVector grad = gradient(state, data, cfg.lambda, &pool, &partition);
    BlockOperatorContext ctx{state, data, cfg.lambda, cfg.gamma};
    BlockVector delta = solve_all(ctx, grad, cg, &pool, &partition);
    for (std::size_t k = 0; k < state.values.size(); ++k)
      state.values[k] += delta[k];
    evaluate(state, data, &pool);  // timed workload includes the eval pass
  }
  return state;
}

// Times the workload per thread count and reports median +- sd plus speedup
// vs the first listed count. Any output mismatch across thread counts is a
// hard failure: correctness precedes speed.
inline SpeedupReport bench_threads(const HdiDataset& data,
                                   const OptimizerConfig& config,
                                   const std::vector<int>& thread_counts,
                                   int repeats,
                                   const std::string& dataset_name = "data") {
  if (thread_counts.empty())
    throw std::invalid_argument("bench: no thread counts given");
  if (repeats < 3) throw std::invalid_argument("bench: repeats must be >= 3");

  // correctness gate first
  FactorState reference = bench_workload(data, config, thread_counts.front());
  for (std::size_t k = 1; k < thread_counts.size(); ++k) {
    FactorState other = bench_workload(data, config, thread_counts[k]);
    if (other.values != reference.values)
      throw std::runtime_error(
          "bench: output mismatch between thread counts " +
          std::to_string(thread_counts.front()) + " and " +
          std::to_string(thread_counts[k]));
  }

  SpeedupReport report;
  report.dataset = dataset_name;
  double baseline_median = 0.0;
  for (std::size_t k = 0; k < thread_counts.size(); ++k) {
    std::vector<double> times;
    times.reserve(repeats);
    for (int rep = 0; rep < repeats; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      bench_workload(data, config, thread_counts[k]);
      auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    SpeedupRow row;
    row.threads = thread_counts[k];
    row.median_seconds = detail::median(times);
    row.stddev_seconds = detail::stddev(times);
    if (k == 0) baseline_median = row.median_seconds;
    row.speedup = row.median_seconds > 0.0
                      ? baseline_median / row.median_seconds
                      : 1.0;
    report.rows.push_back(row);
  }
  report.rows.front().speedup = 1.0;
  return report;
}

}  // namespace minihes
