#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "minihes/bench.hpp"
#include "minihes/trainer.hpp"

namespace minihes {

inline nlohmann::json config_to_json(const OptimizerConfig& cfg) {
  return {
      {"optimizer", to_string(cfg.optimizer)},
      {"f", cfg.f},
      {"lambda", cfg.lambda},
      {"gamma", cfg.gamma},
      {"tau", cfg.tau},
      {"cg_max_iters", cfg.cg_max_iters},
      {"adaptive_gamma", cfg.adaptive_gamma},
      {"warm_start_cg", cfg.warm_start_cg},
      {"lr", cfg.learning_rate},
      {"beta1", cfg.beta1},
      {"beta2", cfg.beta2},
      {"epsilon", cfg.epsilon},
      {"max_epochs", cfg.max_epochs},
      {"patience", cfg.patience},
      {"early_stop", cfg.early_stop},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"metric", to_string(cfg.eval_metric)},
  };
}

inline OptimizerConfig config_from_json(const nlohmann::json& j) {
  OptimizerConfig cfg;
  if (j.contains("optimizer"))
    cfg.optimizer = optimizer_from_string(j["optimizer"].get<std::string>());
  if (j.contains("f")) cfg.f = j["f"].get<int>();
  if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
  if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
  if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
  if (j.contains("cg_max_iters")) cfg.cg_max_iters = j["cg_max_iters"].get<int>();
  if (j.contains("adaptive_gamma"))
    cfg.adaptive_gamma = j["adaptive_gamma"].get<bool>();
  if (j.contains("warm_start_cg"))
    cfg.warm_start_cg = j["warm_start_cg"].get<bool>();
  if (j.contains("lr")) cfg.learning_rate = j["lr"].get<double>();
  if (j.contains("beta1")) cfg.beta1 = j["beta1"].get<double>();
  if (j.contains("beta2")) cfg.beta2 = j["beta2"].get<double>();
  if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
  if (j.contains("max_epochs")) cfg.max_epochs = j["max_epochs"].get<int>();
  if (j.contains("patience")) cfg.patience = j["patience"].get<int>();
  if (j.contains("early_stop")) cfg.early_stop = j["early_stop"].get<bool>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  if (j.contains("metric"))
    cfg.eval_metric = metric_from_string(j["metric"].get<std::string>());
  return cfg;
}

inline nlohmann::json report_to_json(const TrainReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_metric", e.val_metric},
                      {"seconds", e.seconds}});
  return {
      {"epochs", epochs},
      {"best_epoch", r.best_epoch},
      {"best_validation", r.best_validation},
      {"test_rmse", r.test_rmse},
      {"test_mae", r.test_mae},
      {"total_seconds", r.total_seconds},
      {"epochs_run", r.epochs_run},
  };
}

inline void write_trace_csv(const TrainReport& r, std::ostream& out) {
  out << "epoch,train_loss,val_metric,seconds\n";
  for (const auto& e : r.epochs)
    out << e.epoch << ',' << e.train_loss << ',' << e.val_metric << ','
        << e.seconds << '\n';
}

inline nlohmann::json speedup_to_json(const SpeedupReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"threads", row.threads},
                    {"median_seconds", row.median_seconds},
                    {"stddev_seconds", row.stddev_seconds},
                    {"speedup", row.speedup}});
  return {{"dataset", r.dataset}, {"rows", rows}};
}

// Same columns as the speedup table in the docs: Dataset, Thread, Time, Speedup.
inline void write_speedup_csv(const SpeedupReport& r, std::ostream& out) {
  out << "Dataset,Thread,Time,Speedup\n";
  for (const auto& row : r.rows)
    out << r.dataset << ',' << row.threads << ',' << row.median_seconds << ','
        << row.speedup << '\n';
}

}  // namespace minihes
