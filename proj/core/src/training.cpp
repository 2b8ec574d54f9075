#include "wsnloc/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>

namespace wsnloc {

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("TrainConfig: " + m); };
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0,1)");
  for (double p : {augmentation_probability, edge_removal_fraction}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("augmentation fractions must be in [0,1]");
  }
  if (!(feature_noise_std >= 0.0)) fail("feature_noise_std must be >= 0");
  if (folds < 2) fail("folds must be >= 2");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) fail("train_fraction must be in (0,1]");
  if (topologies < 1 || draws_per_topology < 1) fail("topologies and draws must be >= 1");
  for (double lr : grid_learning_rates) {
    if (!(lr >= 0.0)) fail("grid learning rates must be >= 0");
  }
  for (double p : grid_dropouts) {
    if (!(p >= 0.0 && p < 1.0)) fail("grid dropouts must be in [0,1)");
  }
}

ModelConfig TrainConfig::model_config(int node_count, int window, double field_side) const {
  ModelConfig m;
  m.kind = model;
  m.node_count = node_count;
  m.window = window;
  m.temporal_hidden = hidden_temporal;
  m.spatial_hidden = hidden_spatial;
  m.heads = heads;
  m.dropout = dropout;
  m.dropout_after_layer2 = dropout_after_layer2;
  m.ewma_decay = ewma_decay;
  m.field_side = field_side;
  m.bn_momentum = bn_momentum;
  m.validate();
  return m;
}

AugmentConfig TrainConfig::augment_config() const {
  return {augmentation_probability, edge_removal_fraction, feature_noise_std};
}

nlohmann::json TrainConfig::to_json() const {
  return {{"model", to_string(model)},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"dropout", dropout},
          {"augmentation_probability", augmentation_probability},
          {"edge_removal_fraction", edge_removal_fraction},
          {"feature_noise_std", feature_noise_std},
          {"folds", folds},
          {"seed", seed},
          {"hidden_temporal", hidden_temporal},
          {"hidden_spatial", hidden_spatial},
          {"heads", heads},
          {"ewma_decay", ewma_decay},
          {"dropout_after_layer2", dropout_after_layer2},
          {"bn_momentum", bn_momentum},
          {"cross_validate", cross_validate},
          {"grid_learning_rates", grid_learning_rates},
          {"grid_dropouts", grid_dropouts},
          {"train_fraction", train_fraction},
          {"topologies", topologies},
          {"draws_per_topology", draws_per_topology}};
}

namespace {

/// Distinct topology ids in first-appearance order, with their member indices.
std::vector<std::pair<int, std::vector<std::size_t>>> group_by_topology(
    std::span<const int> topology_ids) {
  std::vector<std::pair<int, std::vector<std::size_t>>> groups;
  std::map<int, std::size_t> slot;
  for (std::size_t i = 0; i < topology_ids.size(); ++i) {
    auto [it, inserted] = slot.emplace(topology_ids[i], groups.size());
    if (inserted) groups.push_back({topology_ids[i], {}});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

void dump_state(const ParameterSet& params, int epoch, std::size_t batch) {
  std::cerr << "non-finite training loss at epoch " << epoch << ", batch " << batch << "\n";
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& m = params.value(i);
    std::cerr << "  " << params.name(i) << " " << shape_string(m) << " norm=" << m.norm()
              << (m.allFinite() ? "" : " NON-FINITE") << "\n";
  }
}

double eval_loss(const ModelConfig& model, const ParameterSet& params,
                 std::span<const TrainingSample* const> samples) {
  double total = 0.0;
  for (const TrainingSample* s : samples) {
    const ModelInput* one[] = {&s->input};
    total += run_batch(model, params, one, Mode::Eval, 0).loss;
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace

Split split_train_test(std::span<const int> topology_ids, double train_fraction,
                       std::uint64_t seed) {
  auto groups = group_by_topology(topology_ids);
  Rng rng = make_rng(seed, {0x73706c6974ULL});
  std::shuffle(groups.begin(), groups.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(groups.size())));
  Split s;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& side = g < n_train ? s.train : s.held_out;
    side.insert(side.end(), groups[g].second.begin(), groups[g].second.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.held_out.begin(), s.held_out.end());
  return s;
}

std::vector<Split> kfold_split(std::span<const int> topology_ids, int k, std::uint64_t seed) {
  auto groups = group_by_topology(topology_ids);
  if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
  if (static_cast<std::size_t>(k) > groups.size()) {
    throw std::invalid_argument("kfold_split: k=" + std::to_string(k) + " exceeds " +
                                std::to_string(groups.size()) + " topologies");
  }
  Rng rng = make_rng(seed, {0x6b666f6c64ULL});
  std::shuffle(groups.begin(), groups.end(), rng);
  const std::size_t base = groups.size() / static_cast<std::size_t>(k);
  const std::size_t extra = groups.size() % static_cast<std::size_t>(k);
  std::vector<int> fold_of(groups.size());
  std::size_t g = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t count = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t c = 0; c < count; ++c) fold_of[g++] = f;
  }
  std::vector<Split> folds(static_cast<std::size_t>(k));
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (int f = 0; f < k; ++f) {
      auto& side = f == fold_of[gi] ? folds[f].held_out : folds[f].train;
      side.insert(side.end(), groups[gi].second.begin(), groups[gi].second.end());
    }
  }
  for (auto& s : folds) {
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.held_out.begin(), s.held_out.end());
  }
  return folds;
}

FitResult fit(const ModelConfig& model, ParameterSet params,
              std::span<const TrainingSample* const> train_set,
              std::span<const TrainingSample* const> validation, const TrainConfig& tc) {
  if (train_set.empty()) throw std::invalid_argument("fit: empty training set");
  tc.validate();
  AdamState adam;
  adam.learning_rate = tc.learning_rate;
  const AugmentConfig aug = tc.augment_config();

  FitResult result;
  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(tc.seed, {0x65706f6368ULL, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += tc.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + tc.batch_size);
      Rng aug_rng = make_rng(tc.seed, {0x617567ULL, static_cast<std::uint64_t>(epoch), batch_index});
      std::vector<TrainingSample> augmented;
      augmented.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        augmented.push_back(augment(*train_set[order[i]], aug, aug_rng));
      }
      std::vector<const ModelInput*> batch;
      for (const auto& s : augmented) batch.push_back(&s.input);
      // A single-graph batch still pools N >= 2 rows for batch statistics.
      const std::uint64_t dropout_seed =
          make_rng(tc.seed, {0x64726f70ULL, static_cast<std::uint64_t>(epoch), batch_index})();

      Gradients grads = zero_gradients(params);
      BatchStats stats;
      const BatchOutput out = run_batch(model, params, batch, Mode::Train, dropout_seed, &grads, &stats);
      if (!std::isfinite(out.loss)) {
        dump_state(params, epoch, batch_index);
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch));
      }
      adam_step(params, grads, adam);
      update_running_stats(params, model.bn_momentum, stats);
      loss_sum += out.loss * static_cast<double>(end - begin);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_train_loss = loss_sum / static_cast<double>(train_set.size());
    if (!validation.empty()) rec.mean_val_loss = eval_loss(model, params, validation);
    result.history.push_back(rec);
  }
  result.params = std::move(params);
  return result;
}

TrainResult train(std::span<const TrainingSample> train_set, const TrainConfig& tc,
                  double field_side) {
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  tc.validate();
  const int n = static_cast<int>(train_set.front().anchor_flags.size());
  const int window = static_cast<int>(train_set.front().input.slices.size());
  for (const TrainingSample& s : train_set) {
    if (static_cast<int>(s.anchor_flags.size()) != n ||
        static_cast<int>(s.input.slices.size()) != window) {
      throw ShapeError("train: all samples must share node count and window");
    }
  }

  std::vector<const TrainingSample*> all;
  std::vector<int> topology_ids;
  for (const TrainingSample& s : train_set) {
    all.push_back(&s);
    topology_ids.push_back(s.topology_id);
  }

  TrainConfig chosen = tc;
  TrainResult result;
  std::vector<std::optional<double>> cv_curve;
  if (tc.cross_validate) {
    const auto folds = kfold_split(topology_ids, tc.folds, tc.seed);
    const std::vector<double> lrs =
        tc.grid_learning_rates.empty() ? std::vector<double>{tc.learning_rate} : tc.grid_learning_rates;
    const std::vector<double> drops =
        tc.grid_dropouts.empty() ? std::vector<double>{tc.dropout} : tc.grid_dropouts;
    double best = INFINITY;
    for (double lr : lrs) {
      for (double p : drops) {
        TrainConfig cand = tc;
        cand.learning_rate = lr;
        cand.dropout = p;
        const ModelConfig mc = cand.model_config(n, window, field_side);
        std::vector<double> curve(static_cast<std::size_t>(tc.epochs), 0.0);
        double final_val = 0.0;
        for (const Split& f : folds) {
          std::vector<const TrainingSample*> tr, va;
          for (std::size_t i : f.train) tr.push_back(all[i]);
          for (std::size_t i : f.held_out) va.push_back(all[i]);
          const FitResult fr = fit(mc, initialize_parameters(mc, tc.seed), tr, va, cand);
          for (std::size_t e = 0; e < fr.history.size(); ++e) curve[e] += *fr.history[e].mean_val_loss;
          if (!fr.history.empty()) final_val += *fr.history.back().mean_val_loss;
        }
        const double k = static_cast<double>(folds.size());
        final_val /= k;
        std::clog << "cv: lr=" << lr << " dropout=" << p << " mean_val_loss=" << final_val << "\n";
        result.cv.push_back({lr, p, final_val});
        if (final_val < best) {
          best = final_val;
          chosen = cand;
          cv_curve.assign(curve.size(), std::nullopt);
          for (std::size_t e = 0; e < curve.size(); ++e) cv_curve[e] = curve[e] / k;
        }
      }
    }
  }

  const ModelConfig mc = chosen.model_config(n, window, field_side);
  FitResult final_fit = fit(mc, initialize_parameters(mc, tc.seed), all, {}, chosen);
  for (std::size_t e = 0; e < final_fit.history.size() && e < cv_curve.size(); ++e) {
    final_fit.history[e].mean_val_loss = cv_curve[e];
  }
  result.history = std::move(final_fit.history);
  result.checkpoint.model = mc;
  result.checkpoint.params = std::move(final_fit.params);
  result.checkpoint.train_config = chosen.to_json();
  return result;
}

void write_history_csv(const std::string& path, std::span<const EpochRecord> history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write history " + path);
  out << "epoch,mean_train_loss,mean_val_loss\n";
  char buf[64];
  for (const EpochRecord& r : history) {
    std::snprintf(buf, sizeof buf, "%.17g", r.mean_train_loss);
    out << r.epoch << ',' << buf << ',';
    if (r.mean_val_loss) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.mean_val_loss);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace wsnloc
