#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsnloc/config.hpp"
#include "wsnloc/dataset.hpp"
#include "wsnloc/evaluation.hpp"
#include "wsnloc/gradcheck.hpp"
#include "wsnloc/sweep.hpp"
#include "wsnloc/training.hpp"

using namespace wsnloc;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty entry in list '" + text + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used);
  if (used != s.size()) throw ConfigError("not a seed: '" + s + "'");
  return v;
}

int cmd_gen(const std::string& config, int topologies, int draws, std::uint64_t seed,
            const std::string& out) {
  const ExperimentConfig cfg = load_experiment_config(config);
  const auto data = build_dataset(cfg.sim, topologies, draws, seed);
  write_dataset(out, data);
  std::clog << "wrote " << data.size() << " samples to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& dataset, const std::string& model, const std::string& config,
              std::uint64_t seed, const std::string& out) {
  ExperimentConfig cfg = load_experiment_config(config);
  cfg.train.model = parse_model_kind(model);
  cfg.train.seed = seed;
  const auto data = read_dataset(dataset);
  if (data.empty()) throw ConfigError("dataset " + dataset + " is empty");
  const auto samples = prepare_samples(data);
  const TrainResult r = train(samples, cfg.train, data.front().config.field_side);
  save_checkpoint(r.checkpoint, out);
  write_history_csv(out + ".history.csv", r.history);
  if (!r.history.empty()) {
    std::clog << "final mean training loss " << format_double(r.history.back().mean_train_loss)
              << " m^2\n";
  }
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& dataset, const std::string& out,
             const std::string& cdf) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const auto samples = prepare_samples(read_dataset(dataset));
  const MetricsTable t = evaluate(ckpt, samples);
  write_metrics_csv(out, t);
  if (!cdf.empty()) write_cdf_csv(cdf, emit_cdf(t.node_errors));
  std::printf("masked_mse_m2 %.6g +- %.6g\nmean_error_m %.6g +- %.6g\n", t.masked_mse.mean,
              t.masked_mse.std, t.mean_error.mean, t.mean_error.std);
  return 0;
}

int cmd_sweep(const std::string& param, const std::string& values, const std::string& models,
              const std::string& seeds, const std::string& config, const std::string& out) {
  SweepSpec spec;
  spec.param = parse_sweep_param(param);
  for (const auto& v : split_list(values)) spec.values.push_back(parse_number(v));
  for (const auto& m : split_list(models)) spec.models.push_back(parse_model_kind(m));
  for (const auto& s : split_list(seeds)) spec.seeds.push_back(parse_seed(s));
  spec.base = load_experiment_config(config);
  const auto rows = run_sweep(spec);
  write_sweep_csv(out, spec.param, rows);
  for (const auto& r : rows) {
    if (r.status != "ok") return 1;
  }
  return 0;
}

int cmd_gradcheck(const std::string& config) {
  const ExperimentConfig cfg =
      config.empty() ? gradcheck_defaults() : load_experiment_config(config, gradcheck_defaults());
  double worst = 0.0;
  for (const ModelGradCheck& g : run_gradcheck(cfg)) {
    const GradCheckResult& r = g.result;
    std::printf("%-10s coords=%zu max_rel_err=%.3e at %s[%ld] analytic=%.9g numeric=%.9g\n",
                to_string(g.model).c_str(), g.coordinates, r.max_relative_error,
                r.worst_parameter.c_str(), static_cast<long>(r.worst_offset), r.analytic, r.numeric);
    worst = std::max(worst, r.max_relative_error);
  }
  const bool ok = worst < 1e-4;
  std::printf("%s max relative error %.3e (threshold 1e-4)\n", ok ? "PASS" : "FAIL", worst);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate, train and evaluate RSSI-based sensor localization models"};
  app.require_subcommand(1);

  std::string config, out, dataset, model, ckpt, cdf, param, values, models, seeds;
  int topologies = 0, draws = 0;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen", "Simulate a dataset of graph samples (NDJSON)");
  gen->add_option("--config", config, "JSON config file")->required();
  gen->add_option("--topologies", topologies, "Number of distinct topologies")->required();
  gen->add_option("--draws", draws, "Channel draws per topology")->required();
  gen->add_option("--seed", seed, "Random seed")->required();
  gen->add_option("--out", out, "Output dataset path")->required();

  auto* tr = app.add_subcommand("train", "Train a model on a dataset");
  tr->add_option("--dataset", dataset, "Dataset path")->required();
  tr->add_option("--model", model, "ubigtloc|baseline1|baseline2")
      ->required()
      ->check(CLI::IsMember({"ubigtloc", "baseline1", "baseline2"}));
  tr->add_option("--config", config, "JSON config file")->required();
  tr->add_option("--seed", seed, "Random seed")->required();
  tr->add_option("--out", out, "Checkpoint path; history goes to <out>.history.csv")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  ev->add_option("--ckpt", ckpt, "Checkpoint path")->required();
  ev->add_option("--dataset", dataset, "Dataset path")->required();
  ev->add_option("--out", out, "Metrics CSV path")->required();
  ev->add_option("--cdf", cdf, "Per-node error CDF CSV path");

  auto* sw = app.add_subcommand("sweep", "Train and evaluate across a parameter sweep");
  sw->add_option("--param", param, "noise|nodes|kappa|twindow|dth|alpha")
      ->required()
      ->check(CLI::IsMember({"noise", "nodes", "kappa", "twindow", "dth", "alpha"}));
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--models", models, "Comma-separated model names")->required();
  sw->add_option("--seeds", seeds, "Comma-separated seeds")->required();
  sw->add_option("--config", config, "JSON config file")->required();
  sw->add_option("--out", out, "Results CSV path")->required();

  auto* gc = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  gc->add_option("--config", config, "JSON config overriding the tiny defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(config, topologies, draws, seed, out);
    if (tr->parsed()) return cmd_train(dataset, model, config, seed, out);
    if (ev->parsed()) return cmd_eval(ckpt, dataset, out, cdf);
    if (sw->parsed()) return cmd_sweep(param, values, models, seeds, config, out);
    if (gc->parsed()) return cmd_gradcheck(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
