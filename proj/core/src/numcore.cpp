#include "wsnloc/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wsnloc {

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << '[' << m.rows() << " x " << m.cols() << ']';
  return os.str();
}

void expect_shape(const Matrix& m, Index rows, Index cols, std::string_view what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected [" << rows << " x " << cols << "], got " << shape_string(m);
    throw ShapeError(os.str());
  }
}

NeighborLists NeighborLists::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw std::invalid_argument("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") invalid for " + std::to_string(n) + " nodes");
    }
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  NeighborLists out;
  out.offsets.assign(1, 0);
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    out.cols.insert(out.cols.end(), row.begin(), row.end());
    out.offsets.push_back(static_cast<int>(out.cols.size()));
  }
  return out;
}

std::size_t ParameterSet::add(std::string name, Matrix value) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  const std::size_t i = values_.size();
  index_.emplace(name, i);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return i;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + std::string(name));
  return it->second;
}

bool ParameterSet::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

Gradients zero_gradients(const ParameterSet& params) {
  Gradients g;
  g.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    g.push_back(Matrix::Zero(params.value(i).rows(), params.value(i).cols()));
  }
  return g;
}

void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state) {
  if (grads.size() != params.size()) {
    throw ShapeError("adam_step: gradient count does not match parameter count");
  }
  if (state.first_moment.empty()) {
    state.first_moment = zero_gradients(params);
    state.second_moment = zero_gradients(params);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    expect_shape(grads[i], params.value(i).rows(), params.value(i).cols(), params.name(i));
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * grads[i];
    v = state.beta2 * v + (1.0 - state.beta2) * grads[i].cwiseProduct(grads[i]);
    params.value(i).array() -=
        state.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  }
}

Gradients finite_diff_grad(const std::function<double(const ParameterSet&)>& f,
                           const ParameterSet& params, double h, int points) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  if (points != 2 && points != 4) throw std::invalid_argument("finite_diff_grad: points must be 2 or 4");
  ParameterSet probe = params;
  Gradients out = zero_gradients(params);
  for (std::size_t p = 0; p < probe.size(); ++p) {
    Matrix& w = probe.value(p);
    for (Index k = 0; k < w.size(); ++k) {
      const double orig = w.data()[k];
      auto at = [&](double offset) {
        w.data()[k] = orig + offset;
        return f(probe);
      };
      if (points == 2) {
        out[p].data()[k] = (at(h) - at(-h)) / (2.0 * h);
      } else {
        out[p].data()[k] = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
      }
      w.data()[k] = orig;
    }
  }
  return out;
}

GradCheckResult compare_gradients(const ParameterSet& params, const Gradients& analytic,
                                  const Gradients& numeric, double floor) {
  GradCheckResult r;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Index k = 0; k < analytic[p].size(); ++k) {
      const double a = analytic[p].data()[k];
      const double n = numeric[p].data()[k];
      const double denom = std::max({std::abs(a), std::abs(n), floor});
      const double rel = std::abs(a - n) / denom;
      if (rel > r.max_relative_error || !std::isfinite(rel)) {
        r.max_relative_error = std::isfinite(rel) ? rel : INFINITY;
        r.worst_parameter = params.name(p);
        r.worst_offset = k;
        r.analytic = a;
        r.numeric = n;
      }
    }
  }
  return r;
}

nlohmann::json parameters_to_json(const ParameterSet& params) {
  nlohmann::json j;
  j["format_version"] = kCheckpointFormatVersion;
  auto& map = j["params"] = nlohmann::json::object();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& m = params.value(i);
    map[params.name(i)] = {{"shape", {m.rows(), m.cols()}},
                           {"values", std::vector<double>(m.data(), m.data() + m.size())}};
  }
  return j;
}

ParameterSet parameters_from_json(const nlohmann::json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointFormatVersion) {
    throw std::runtime_error("unsupported checkpoint format_version " + std::to_string(version));
  }
  ParameterSet params;
  // nlohmann orders object keys lexicographically; the set order is not part
  // of the format, only names are.
  for (const auto& [name, entry] : j.at("params").items()) {
    const auto shape = entry.at("shape").get<std::vector<Index>>();
    const auto values = entry.at("values").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] * shape[1] != static_cast<Index>(values.size())) {
      throw ShapeError("checkpoint parameter " + name + " has inconsistent shape");
    }
    Matrix m(shape[0], shape[1]);
    std::copy(values.begin(), values.end(), m.data());
    params.add(name, std::move(m));
  }
  return params;
}

}  // namespace wsnloc
