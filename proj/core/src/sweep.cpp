#include "wsnloc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

namespace wsnloc {

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "noise") return SweepParam::Noise;
  if (name == "nodes") return SweepParam::Nodes;
  if (name == "kappa") return SweepParam::Kappa;
  if (name == "twindow") return SweepParam::Window;
  if (name == "dth") return SweepParam::RadioRange;
  if (name == "alpha") return SweepParam::Anchors;
  throw ConfigError("unknown sweep parameter '" + std::string(name) +
                    "' (expected noise|nodes|kappa|twindow|dth|alpha)");
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Noise: return "noise";
    case SweepParam::Nodes: return "nodes";
    case SweepParam::Kappa: return "kappa";
    case SweepParam::Window: return "twindow";
    case SweepParam::RadioRange: return "dth";
    case SweepParam::Anchors: return "alpha";
  }
  return "unknown";
}

namespace {

int as_count(SweepParam p, double v) {
  if (v != std::floor(v)) {
    throw ConfigError("sweep " + to_string(p) + " value " + format_double(v) + " is not an integer");
  }
  return static_cast<int>(v);
}

}  // namespace

void apply_sweep_value(SimConfig& sim, SweepParam p, double value) {
  switch (p) {
    case SweepParam::Noise: sim.noise_variance = value; break;
    case SweepParam::Nodes: sim.node_count = as_count(p, value); break;
    case SweepParam::Kappa: sim.interference_scale = value; break;
    case SweepParam::Window: sim.window = as_count(p, value); break;
    case SweepParam::RadioRange: sim.radio_range = value; break;
    case SweepParam::Anchors: sim.anchor_fraction = value; break;
  }
}

bool in_studied_range(SweepParam p, double v) {
  switch (p) {
    case SweepParam::Noise: return v >= 0.04 && v <= 0.5;
    case SweepParam::Nodes: return v >= 100 && v <= 500;
    case SweepParam::Kappa: return v >= 0.0 && v <= 1.0;
    case SweepParam::Window: return v >= 3 && v <= 30;
    case SweepParam::RadioRange: return v >= 2 && v <= 100;
    case SweepParam::Anchors: return v >= 0.0 && v <= 0.5;
  }
  return false;
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (models.empty()) throw ConfigError("sweep needs at least one model");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  for (double v : values) {
    SimConfig sim = base.sim;
    apply_sweep_value(sim, param, v);
    sim.validate();
  }
  base.train.validate();
}

PointResult run_point(const ExperimentConfig& cfg, ModelKind model, std::uint64_t seed) {
  const auto data = build_dataset(cfg.sim, cfg.train.topologies, cfg.train.draws_per_topology, seed);
  const auto prepared = prepare_samples(data);
  std::vector<int> ids;
  for (const auto& s : prepared) ids.push_back(s.topology_id);
  const Split split = split_train_test(ids, cfg.train.train_fraction, seed);
  if (split.held_out.empty()) throw ConfigError("train_fraction leaves no held-out topologies");
  std::vector<TrainingSample> train_set, test_set;
  for (std::size_t i : split.train) train_set.push_back(prepared[i]);
  for (std::size_t i : split.held_out) test_set.push_back(prepared[i]);

  TrainConfig tc = cfg.train;
  tc.model = model;
  tc.seed = seed;
  TrainResult trained = train(train_set, tc, cfg.sim.field_side);
  PointResult r;
  r.test = evaluate(trained.checkpoint, test_set);
  r.history = std::move(trained.history);
  return r;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t nm = spec.models.size(), nv = spec.values.size(), ns = spec.seeds.size();
  std::vector<SweepRow> runs(nm * nv * ns);
  auto slot = [&](std::size_t m, std::size_t v, std::size_t s) -> SweepRow& {
    return runs[(m * nv + v) * ns + s];
  };

  for (std::size_t v = 0; v < nv; ++v) {
    ExperimentConfig cfg = spec.base;
    apply_sweep_value(cfg.sim, spec.param, spec.values[v]);
    const bool extrapolated = !in_studied_range(spec.param, spec.values[v]);
    if (extrapolated) {
      std::clog << "warning: " << to_string(spec.param) << "=" << format_double(spec.values[v])
                << " lies outside the studied range\n";
    }
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t m = 0; m < nm; ++m) {
        SweepRow& row = slot(m, v, s);
        row.model = spec.models[m];
        row.value = spec.values[v];
        row.seed = spec.seeds[s];
        row.extrapolated = extrapolated;
        std::clog << "sweep: " << to_string(spec.param) << "=" << format_double(row.value)
                  << " seed=" << spec.seeds[s] << " model=" << to_string(row.model) << "\n";
        try {
          const PointResult p = run_point(cfg, spec.models[m], spec.seeds[s]);
          row.masked_mse = p.test.masked_mse;
          row.mean_error = p.test.mean_error;
        } catch (const std::exception& e) {
          row.status = std::string("failed: ") + e.what();
          std::clog << "  " << row.status << "\n";
        }
      }
    }
  }

  std::vector<SweepRow> out = runs;
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t v = 0; v < nv; ++v) {
      std::vector<double> mses, errs;
      for (std::size_t s = 0; s < ns; ++s) {
        const SweepRow& r = slot(m, v, s);
        if (r.status != "ok") continue;
        mses.push_back(r.masked_mse.mean);
        errs.push_back(r.mean_error.mean);
      }
      SweepRow agg;
      agg.aggregate = true;
      agg.model = spec.models[m];
      agg.value = spec.values[v];
      agg.extrapolated = slot(m, v, 0).extrapolated;
      agg.masked_mse = mean_std(mses);
      agg.mean_error = mean_std(errs);
      if (mses.empty()) {
        agg.status = "failed";
      } else if (mses.size() < ns) {
        agg.status = "partial";
      }
      out.push_back(agg);
    }
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

}  // namespace

void write_sweep_csv(const std::string& path, SweepParam param, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write sweep results " + path);
  out << "row_type,model,param,value,seed,masked_mse_m2,masked_mse_std,mean_error_m,mean_error_std,"
         "extrapolated,status\n";
  for (const SweepRow& r : rows) {
    const bool ok = r.status == "ok" || r.status == "partial";
    out << (r.aggregate ? "aggregate" : "run") << ',' << to_string(r.model) << ','
        << to_string(param) << ',' << format_double(r.value) << ','
        << (r.seed ? std::to_string(*r.seed) : "") << ',';
    if (ok) {
      out << format_double(r.masked_mse.mean) << ',' << format_double(r.masked_mse.std) << ','
          << format_double(r.mean_error.mean) << ',' << format_double(r.mean_error.std);
    } else {
      out << ",,,";
    }
    out << ',' << (r.extrapolated ? 1 : 0) << ',' << csv_field(r.status) << '\n';
  }
}

}  // namespace wsnloc
