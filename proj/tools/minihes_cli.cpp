// Command-line front end: split / train / verify / bench.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "minihes/minihes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "minihes 0.1.0";

std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

minihes::HdiDataset load_dataset(const std::string& path,
                                 const std::string& delimiter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return minihes::parse_ratings(in, delimiter);
  } catch (const minihes::ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_manifest(const fs::path& path, json manifest) {
  manifest["tool_version"] = kToolVersion;
  write_text(path, manifest.dump(2) + "\n");
}

struct SplitArgs {
  std::string input;
  std::vector<double> ratios{0.6, 0.2, 0.2};
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string delimiter;
};

int run_split(const SplitArgs& a) {
  if (a.ratios.size() != 3)
    throw std::runtime_error("--ratios needs exactly three values");
  minihes::HdiDataset data = load_dataset(a.input, a.delimiter);
  auto parts = minihes::split_dataset(
      data, {a.ratios[0], a.ratios[1], a.ratios[2]}, a.seed);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  const char* names[3] = {"train.tsv", "val.tsv", "test.tsv"};
  const minihes::HdiDataset* sets[3] = {&parts.train, &parts.validation,
                                        &parts.test};
  json outputs = json::object();
  for (int p = 0; p < 3; ++p) {
    std::ostringstream os;
    minihes::serialize_ratings(*sets[p], os);
    write_text(dir / names[p], os.str());
    outputs[names[p]] = {{"entries", sets[p]->entries.size()},
                         {"checksum", file_checksum((dir / names[p]).string())}};
  }
  write_manifest(dir / "split_manifest.json",
                 {{"command", "split"},
                  {"input", a.input},
                  {"input_checksum", file_checksum(a.input)},
                  {"ratios", a.ratios},
                  {"seed", a.seed},
                  {"delimiter", a.delimiter},
                  {"num_users", data.num_users},
                  {"num_items", data.num_items},
                  {"outputs", outputs}});
  std::cout << "split " << data.entries.size() << " entries -> "
            << parts.train.entries.size() << "/"
            << parts.validation.entries.size() << "/"
            << parts.test.entries.size() << "\n";
  return 0;
}

struct TrainArgs {
  std::string train_path, val_path, test_path;
  std::string config_path;
  std::string out_dir = ".";
  std::string delimiter;
  minihes::OptimizerConfig cfg;
};

int run_train(CLI::App* cmd, TrainArgs& a, const std::string& optimizer_name,
              const std::string& metric_name) {
  // precedence: flags > config file > defaults
  minihes::OptimizerConfig cfg;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw std::runtime_error("cannot open " + a.config_path);
    cfg = minihes::config_from_json(json::parse(in));
  }
  auto flag_set = [&](const std::string& name) {
    return cmd->count(name) > 0;
  };
  if (flag_set("--optimizer"))
    cfg.optimizer = minihes::optimizer_from_string(optimizer_name);
  if (flag_set("--f")) cfg.f = a.cfg.f;
  if (flag_set("--lambda")) cfg.lambda = a.cfg.lambda;
  if (flag_set("--gamma")) cfg.gamma = a.cfg.gamma;
  if (flag_set("--tau")) cfg.tau = a.cfg.tau;
  if (flag_set("--cg-max-iters")) cfg.cg_max_iters = a.cfg.cg_max_iters;
  if (flag_set("--adaptive-gamma")) cfg.adaptive_gamma = true;
  if (flag_set("--lr")) cfg.learning_rate = a.cfg.learning_rate;
  if (flag_set("--beta1")) cfg.beta1 = a.cfg.beta1;
  if (flag_set("--beta2")) cfg.beta2 = a.cfg.beta2;
  if (flag_set("--epsilon")) cfg.epsilon = a.cfg.epsilon;
  if (flag_set("--max-epochs")) cfg.max_epochs = a.cfg.max_epochs;
  if (flag_set("--patience")) cfg.patience = a.cfg.patience;
  if (flag_set("--seed")) cfg.seed = a.cfg.seed;
  if (flag_set("--threads")) cfg.threads = a.cfg.threads;
  if (flag_set("--metric"))
    cfg.eval_metric = minihes::metric_from_string(metric_name);
  cfg.validate();

  minihes::HdiDataset train = load_dataset(a.train_path, a.delimiter);
  minihes::HdiDataset val = load_dataset(a.val_path, a.delimiter);
  minihes::HdiDataset test = load_dataset(a.test_path, a.delimiter);

  minihes::TrainResult result = minihes::train(train, val, &test, cfg);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_text(dir / "report.json",
             minihes::report_to_json(result.report).dump(2) + "\n");
  {
    std::ofstream trace(dir / "trace.csv");
    minihes::write_trace_csv(result.report, trace);
  }
  minihes::save_factors((dir / "factors.bin").string(), result.best_state,
                        cfg.seed);
  write_manifest(dir / "train_manifest.json",
                 {{"command", "train"},
                  {"config", minihes::config_to_json(cfg)},
                  {"inputs",
                   {{"train", {{"path", a.train_path},
                               {"checksum", file_checksum(a.train_path)}}},
                    {"val", {{"path", a.val_path},
                             {"checksum", file_checksum(a.val_path)}}},
                    {"test", {{"path", a.test_path},
                              {"checksum", file_checksum(a.test_path)}}}}},
                  {"outputs", {"report.json", "trace.csv", "factors.bin"}}});

  std::printf("epochs=%d best_epoch=%d best_val=%.6f\n",
              result.report.epochs_run, result.report.best_epoch,
              result.report.best_validation);
  std::printf("test RMSE=%.6f MAE=%.6f\n", result.report.test_rmse,
              result.report.test_mae);
  return 0;
}

struct VerifyArgs {
  int instances = 20;
  int max_entities = 12;
  int f = 4;
  std::uint64_t seed = 0;
  bool corrupt = false;
};

int run_verify(const VerifyArgs& a) {
  minihes::verify::SuiteOptions opt;
  opt.instances = a.instances;
  opt.max_entities = a.max_entities;
  opt.max_f = a.f;
  opt.seed = a.seed;
  opt.corrupt_operator = a.corrupt;
  auto results = minihes::verify::run_suite(opt);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-40s max error %.3e (tolerance %.0e) %s\n", r.name.c_str(),
                r.max_error, r.tolerance, r.passed() ? "ok" : "FAIL");
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

struct BenchArgs {
  std::string input;
  std::string delimiter;
  long long synthetic_entries = 0;
  std::vector<int> threads{1, 2, 4};
  int repeats = 3;
  int epochs = 3;
  int f = 8;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string name = "data";
};

int run_bench(const BenchArgs& a) {
  minihes::HdiDataset data;
  if (!a.input.empty()) {
    data = load_dataset(a.input, a.delimiter);
  } else if (a.synthetic_entries > 0) {
    minihes::SyntheticSpec spec;
    spec.num_users = 2000;
    spec.num_items = 1500;
    spec.rank = 3;
    spec.density = static_cast<double>(a.synthetic_entries) /
                   (double(spec.num_users) * spec.num_items);
    spec.seed = a.seed;
    data = minihes::make_synthetic(spec);
  } else {
    throw std::runtime_error("bench needs --input or --synthetic");
  }

  minihes::OptimizerConfig cfg;
  cfg.f = a.f;
  cfg.max_epochs = a.epochs;
  cfg.seed = a.seed;
  auto report = minihes::bench_threads(data, cfg, a.threads, a.repeats, a.name);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  {
    std::ofstream csv(dir / "speedup.csv");
    minihes::write_speedup_csv(report, csv);
  }
  write_text(dir / "speedup.json",
             minihes::speedup_to_json(report).dump(2) + "\n");
  for (const auto& row : report.rows)
    std::printf("%-8s threads=%-3d median=%.3fs sd=%.3fs speedup=%.2f\n",
                report.dataset.c_str(), row.threads, row.median_seconds,
                row.stddev_seconds, row.speedup);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mini-Hes latent factor analysis toolkit"};
  app.require_subcommand(1);

  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "split a rating file 3 ways");
  split->add_option("--input", split_args.input, "rating file")->required();
  split->add_option("--ratios", split_args.ratios,
                    "train/val/test fractions (default 0.6 0.2 0.2)")
      ->expected(3);
  split->add_option("--seed", split_args.seed, "split seed");
  split->add_option("--out", split_args.out_dir, "output directory");
  split->add_option("--delimiter", split_args.delimiter,
                    "field delimiter (default: auto)");

  TrainArgs train_args;
  std::string optimizer_name = "mini-hes";
  std::string metric_name = "rmse";
  auto* train = app.add_subcommand("train", "train an LFA model");
  train->add_option("--train", train_args.train_path, "training set")
      ->required();
  train->add_option("--val", train_args.val_path, "validation set")->required();
  train->add_option("--test", train_args.test_path, "test set")->required();
  train->add_option("--config", train_args.config_path, "JSON config file");
  train->add_option("--out", train_args.out_dir, "output directory");
  train->add_option("--delimiter", train_args.delimiter, "field delimiter");
  train->add_option("--optimizer", optimizer_name,
                    "mini-hes | sgd | adam | yogi");
  train->add_option("--f", train_args.cfg.f, "latent dimension");
  train->add_option("--lambda", train_args.cfg.lambda, "Tikhonov constant");
  train->add_option("--gamma", train_args.cfg.gamma, "damping (mini-hes)");
  train->add_option("--tau", train_args.cfg.tau, "CG residual tolerance");
  train->add_option("--cg-max-iters", train_args.cfg.cg_max_iters,
                    "CG iteration cap (0 = f)");
  train->add_flag("--adaptive-gamma", "Levenberg-Marquardt style damping");
  train->add_option("--lr", train_args.cfg.learning_rate, "learning rate");
  train->add_option("--beta1", train_args.cfg.beta1, "first moment decay");
  train->add_option("--beta2", train_args.cfg.beta2, "second moment decay");
  train->add_option("--epsilon", train_args.cfg.epsilon, "adaptive epsilon");
  train->add_option("--max-epochs", train_args.cfg.max_epochs, "epoch cap");
  train->add_option("--patience", train_args.cfg.patience,
                    "early-stop patience");
  train->add_option("--seed", train_args.cfg.seed, "top-level seed");
  train->add_option("--threads", train_args.cfg.threads, "worker threads");
  train->add_option("--metric", metric_name, "rmse | mae");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "run the dense oracle suite");
  verify->add_option("--instances", verify_args.instances,
                     "random instances to check");
  verify->add_option("--max-entities", verify_args.max_entities,
                     "entity cap per side");
  verify->add_option("--f", verify_args.f, "max latent dimension");
  verify->add_option("--seed", verify_args.seed, "suite seed");
  verify
      ->add_flag("--corrupt-operator", verify_args.corrupt,
                 "perturb the operator (failure-path test hook)")
      ->group("");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "thread-scaling benchmark");
  bench->add_option("--input", bench_args.input, "rating file");
  bench->add_option("--delimiter", bench_args.delimiter, "field delimiter");
  bench->add_option("--synthetic", bench_args.synthetic_entries,
                    "use a synthetic dataset with this many entries");
  bench->add_option("--threads", bench_args.threads, "thread counts to test");
  bench->add_option("--repeats", bench_args.repeats, "repeats per count");
  bench->add_option("--epochs", bench_args.epochs, "fixed epochs per run");
  bench->add_option("--f", bench_args.f, "latent dimension");
  bench->add_option("--seed", bench_args.seed, "seed");
  bench->add_option("--out", bench_args.out_dir, "output directory");
  bench->add_option("--name", bench_args.name, "dataset label for the table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (split->parsed()) return run_split(split_args);
    if (train->parsed())
      return run_train(train, train_args, optimizer_name, metric_name);
    if (verify->parsed()) return run_verify(verify_args);
    if (bench->parsed()) return run_bench(bench_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
