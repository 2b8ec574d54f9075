#include "wsnloc/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "wsnloc/global_synthesis.hpp"

namespace wsnloc {

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

MetricsTable evaluate_predictions(std::span<const TrainingSample> samples, const Predictor& predict) {
  MetricsTable t;
  std::vector<double> mses, errs;
  for (const TrainingSample& s : samples) {
    const Matrix pred = predict(s);
    if (pred.rows() != s.input.truth.rows() || pred.cols() != 2) {
      throw ShapeError("prediction " + shape_string(pred) + " does not match truth " +
                       shape_string(s.input.truth));
    }
    SampleMetrics m;
    m.topology_id = s.topology_id;
    m.draw_id = s.draw_id;
    m.masked_mse = masked_mse(pred, s.input.truth, s.input.regular);
    const auto node = regular_node_errors(pred, s.input.truth, s.input.regular);
    double sum = 0.0;
    for (double e : node) sum += e;
    m.mean_error = sum / static_cast<double>(node.size());
    t.node_errors.insert(t.node_errors.end(), node.begin(), node.end());
    t.samples.push_back(m);
    mses.push_back(m.masked_mse);
    errs.push_back(m.mean_error);
  }
  t.masked_mse = mean_std(mses);
  t.mean_error = mean_std(errs);
  return t;
}

MetricsTable evaluate(const Checkpoint& ckpt, std::span<const TrainingSample> samples) {
  return evaluate_predictions(samples, [&ckpt](const TrainingSample& s) {
    return predict(ckpt.model, ckpt.params, s.input);
  });
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_metrics_csv(const std::string& path, const MetricsTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metrics " + path);
  out << "row_type,topology_id,draw_id,masked_mse_m2,mean_error_m\n";
  for (const SampleMetrics& m : table.samples) {
    out << "sample," << m.topology_id << ',' << m.draw_id << ',' << format_double(m.masked_mse) << ','
        << format_double(m.mean_error) << '\n';
  }
  out << "mean,,," << format_double(table.masked_mse.mean) << ','
      << format_double(table.mean_error.mean) << '\n';
  out << "std,,," << format_double(table.masked_mse.std) << ',' << format_double(table.mean_error.std)
      << '\n';
}

CdfSeries emit_cdf(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("emit_cdf: empty error list");
  CdfSeries c;
  c.errors.assign(errors.begin(), errors.end());
  std::sort(c.errors.begin(), c.errors.end());
  const auto m = c.errors.size();
  c.probabilities.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    c.probabilities[k] = static_cast<double>(k + 1) / static_cast<double>(m);
  }
  c.probabilities.back() = 1.0;
  return c;
}

double quantile(const CdfSeries& cdf, double q) {
  if (cdf.errors.empty()) throw std::invalid_argument("quantile: empty series");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in (0, 1]");
  const auto it = std::lower_bound(cdf.probabilities.begin(), cdf.probabilities.end(), q);
  return cdf.errors[static_cast<std::size_t>(it - cdf.probabilities.begin())];
}

void write_cdf_csv(const std::string& path, const CdfSeries& cdf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write cdf " + path);
  out << "error_m,probability\n";
  for (std::size_t k = 0; k < cdf.errors.size(); ++k) {
    out << format_double(cdf.errors[k]) << ',' << format_double(cdf.probabilities[k]) << '\n';
  }
}

}  // namespace wsnloc
