#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "minihes/cg.hpp"
#include "minihes/curvature.hpp"
#include "minihes/data.hpp"
#include "minihes/model.hpp"
#include "minihes/parallel.hpp"

namespace minihes {

enum class Optimizer { kMiniHes, kSgd, kAdam, kYogi };
enum class Metric { kRmse, kMae };

inline std::string to_string(Optimizer o) {
  switch (o) {
    case Optimizer::kMiniHes: return "mini-hes";
    case Optimizer::kSgd: return "sgd";
    case Optimizer::kAdam: return "adam";
    case Optimizer::kYogi: return "yogi";
  }
  return "?";
}

inline std::string to_string(Metric m) {
  return m == Metric::kRmse ? "rmse" : "mae";
}

inline Optimizer optimizer_from_string(const std::string& s) {
  if (s == "mini-hes" || s == "mini_hes") return Optimizer::kMiniHes;
  if (s == "sgd") return Optimizer::kSgd;
  if (s == "adam") return Optimizer::kAdam;
  if (s == "yogi") return Optimizer::kYogi;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

inline Metric metric_from_string(const std::string& s) {
  if (s == "rmse") return Metric::kRmse;
  if (s == "mae") return Metric::kMae;
  throw std::invalid_argument("unknown metric '" + s + "'");
}

struct OptimizerConfig {
  Optimizer optimizer = Optimizer::kMiniHes;
  int f = 20;
  double lambda = 0.0;
  // mini-hes
  double gamma = 1.0;
  double tau = 0.1;
  int cg_max_iters = 0;  // 0 -> f
  bool adaptive_gamma = false;  // LM-style halve/double, off by default
  bool warm_start_cg = false;   // reserved; cold start is the default rule
  // first-order
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // loop control
  int max_epochs = 500;
  int patience = 10;
  bool early_stop = true;
  std::uint64_t seed = 0;
  int threads = 1;
  Metric eval_metric = Metric::kRmse;

  void validate() const {
    if (f < 1) throw std::invalid_argument("f must be >= 1");
    if (lambda < 0 || gamma < 0 || tau < 0 || learning_rate < 0)
      throw std::invalid_argument("rates and constants must be >= 0");
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (patience < 1) throw std::invalid_argument("patience must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_validation = 0.0;
  double test_rmse = std::numeric_limits<double>::quiet_NaN();
  double test_mae = std::numeric_limits<double>::quiet_NaN();
  double total_seconds = 0.0;
  int epochs_run = 0;
};

struct TrainResult {
  FactorState best_state;
  TrainReport report;
};

class TrainError : public std::runtime_error {
 public:
  TrainError(int epoch, const std::string& what)
      : std::runtime_error("epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// --- first-order update rules, exposed for direct testing ---

inline void sgd_step(std::vector<double>& x, const std::vector<double>& g,
                     double lr) {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] -= lr * g[k];
}

inline void adam_step(std::vector<double>& x, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v, int t,
                      double lr, double beta1, double beta2, double eps) {
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (std::size_t k = 0; k < x.size(); ++k) {
    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
    v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
    x[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
  }
}

inline void yogi_step(std::vector<double>& x, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v, int t,
                      double lr, double beta1, double beta2, double eps) {
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double g2 = g[k] * g[k];
    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
    double sign = v[k] > g2 ? 1.0 : (v[k] < g2 ? -1.0 : 0.0);
    v[k] = v[k] - (1.0 - beta2) * sign * g2;
    x[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
  }
}

namespace detail {

inline double pick_metric(const EvalResult& e, Metric m) {
  return m == Metric::kRmse ? e.rmse : e.mae;
}

}  // namespace detail

// Shared epoch loop: `update` mutates the state in place given the current
// gradient; early stopping tracks the best validation snapshot.
template <typename UpdateFn>
TrainResult train_loop(const HdiDataset& train, const HdiDataset& val,
                       const HdiDataset* test, const OptimizerConfig& cfg,
                       UpdateFn&& update) {
  cfg.validate();
  if (train.entries.empty())
    throw std::invalid_argument("training set is empty");
  if (val.entries.empty())
    throw std::invalid_argument("validation set is empty");

  FactorState state =
      init_factors(train.num_users, train.num_items, cfg.f, cfg.seed);
  ThreadPool pool(cfg.threads);
  WorkPartition partition =
      make_partition(train.num_users, train.num_items, cfg.threads);

  TrainResult result;
  TrainReport& report = result.report;
  double best = std::numeric_limits<double>::infinity();
  auto run_start = std::chrono::steady_clock::now();

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    BlockVector grad = gradient(state, train, cfg.lambda, &pool, &partition);
    update(state, grad, epoch, pool, partition);
    double train_loss = loss(state, train, cfg.lambda);
    if (!std::isfinite(train_loss))
      throw TrainError(epoch, "training loss diverged (non-finite)");
    EvalResult val_eval = evaluate(state, val, &pool);
    double metric = detail::pick_metric(val_eval, cfg.eval_metric);
    auto t1 = std::chrono::steady_clock::now();

    report.epochs.push_back(
        {epoch, train_loss, metric,
         std::chrono::duration<double>(t1 - t0).count()});
    report.epochs_run = epoch;
    if (metric < best) {
      best = metric;
      report.best_epoch = epoch;
      result.best_state = state;
    }
    if (cfg.early_stop && epoch - report.best_epoch >= cfg.patience) break;
  }
  report.best_validation = best;
  report.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    run_start)
          .count();
  if (test != nullptr && !test->entries.empty()) {
    EvalResult test_eval = evaluate(result.best_state, *test, &pool);
    report.test_rmse = test_eval.rmse;
    report.test_mae = test_eval.mae;
  }
  return result;
}

inline TrainResult train_mini_hes(const HdiDataset& train,
                                  const HdiDataset& val,
                                  const HdiDataset* test,
                                  const OptimizerConfig& cfg) {
  double gamma = cfg.gamma;
  double prev_loss = std::numeric_limits<double>::infinity();
  CgSettings cg{cfg.tau, cfg.cg_max_iters};
  return train_loop(
      train, val, test, cfg,
      [&](FactorState& state, const BlockVector& grad, int epoch,
          ThreadPool& pool, const WorkPartition& partition) {
        BlockOperatorContext ctx{state, train, cfg.lambda, gamma};
        try {
          BlockVector delta = solve_all(ctx, grad, cg, &pool, &partition);
          for (std::size_t k = 0; k < state.values.size(); ++k)
            state.values[k] += delta[k];
        } catch (const std::exception& ex) {
          throw TrainError(epoch, ex.what());
        }
        if (cfg.adaptive_gamma) {
          double cur = loss(state, train, cfg.lambda);
          gamma = cur < prev_loss ? std::max(gamma * 0.5, 1e-8) : gamma * 2.0;
          prev_loss = cur;
        }
      });
}

inline TrainResult train_first_order(const HdiDataset& train,
                                     const HdiDataset& val,
                                     const HdiDataset* test,
                                     const OptimizerConfig& cfg) {
  std::vector<double> m, v;
  return train_loop(
      train, val, test, cfg,
      [&](FactorState& state, const BlockVector& grad, int epoch, ThreadPool&,
          const WorkPartition&) {
        if (m.empty() && cfg.optimizer != Optimizer::kSgd) {
          m.assign(state.dim(), 0.0);
          v.assign(state.dim(), 0.0);
        }
        switch (cfg.optimizer) {
          case Optimizer::kSgd:
            sgd_step(state.values, grad, cfg.learning_rate);
            break;
          case Optimizer::kAdam:
            adam_step(state.values, grad, m, v, epoch, cfg.learning_rate,
                      cfg.beta1, cfg.beta2, cfg.epsilon);
            break;
          case Optimizer::kYogi:
            yogi_step(state.values, grad, m, v, epoch, cfg.learning_rate,
                      cfg.beta1, cfg.beta2, cfg.epsilon);
            break;
          case Optimizer::kMiniHes:
            throw TrainError(epoch, "mini-hes is not a first-order optimizer");
        }
      });
}

inline TrainResult train(const HdiDataset& train, const HdiDataset& val,
                         const HdiDataset* test, const OptimizerConfig& cfg) {
  return cfg.optimizer == Optimizer::kMiniHes
             ? train_mini_hes(train, val, test, cfg)
             : train_first_order(train, val, test, cfg);
}

}  // namespace minihes
