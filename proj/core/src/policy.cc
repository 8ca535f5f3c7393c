// Copyright 2026 The hetsched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hetsched/policy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hetsched/errors.h"

namespace hetsched {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log1p_nonneg(double x) { return std::log1p(std::max(0.0, x)); }

std::size_t idx(int a, int b) { return static_cast<std::size_t>(a) * static_cast<std::size_t>(b); }

}  // namespace

// ---------------------------------------------------------------------------
// Features

std::vector<double> LayerFeatures::concat() const {
  std::vector<double> out;
  out.reserve(index_onehot.size() + kind_onehot.size() + 3);
  out.insert(out.end(), index_onehot.begin(), index_onehot.end());
  out.insert(out.end(), kind_onehot.begin(), kind_onehot.end());
  out.push_back(input_size_norm);
  out.push_back(weight_size_norm);
  out.push_back(comm_time_norm);
  return out;
}

FeatureSpec make_feature_spec(const ModelGraph& graph, const ResourceCatalog& catalog,
                              int max_layers) {
  if (max_layers < 1) throw ConfigError("max_layers must be >= 1");
  if (graph.size() > static_cast<std::size_t>(max_layers)) {
    throw ConfigError("model has " + std::to_string(graph.size()) +
                      " layers but the policy supports at most max_layers = " +
                      std::to_string(max_layers));
  }
  FeatureSpec spec;
  spec.max_layers = max_layers;
  if (!catalog.layer_kinds.empty()) {
    spec.kinds = catalog.layer_kinds;
  } else {
    std::set<std::string> kinds;
    for (const LayerSpec& layer : graph.layers) kinds.insert(layer.kind);
    spec.kinds.assign(kinds.begin(), kinds.end());
  }
  return spec;
}

namespace {

std::array<double, 3> raw_features(const LayerSpec& layer, const ResourceCatalog& catalog) {
  double comm = 0.0;
  const std::size_t types = std::min(catalog.size(), layer.odt.size());
  for (std::size_t t = 0; t < types; ++t) comm += layer.odt[t];
  if (types > 0) comm /= static_cast<double>(types);
  return {log1p_nonneg(layer.input_size), log1p_nonneg(layer.weight_size), log1p_nonneg(comm)};
}

}  // namespace

FeatureNormalizer fit_normalizer(const ModelGraph& graph, const ResourceCatalog& catalog) {
  FeatureNormalizer norm;
  const double n = static_cast<double>(graph.size());
  for (const LayerSpec& layer : graph.layers) {
    const auto raw = raw_features(layer, catalog);
    for (int f = 0; f < 3; ++f) norm.mean[f] += raw[f] / n;
  }
  for (const LayerSpec& layer : graph.layers) {
    const auto raw = raw_features(layer, catalog);
    for (int f = 0; f < 3; ++f) norm.stddev[f] += (raw[f] - norm.mean[f]) * (raw[f] - norm.mean[f]) / n;
  }
  for (int f = 0; f < 3; ++f) {
    norm.stddev[f] = std::sqrt(norm.stddev[f]);
    if (norm.stddev[f] < 1e-12) norm.stddev[f] = 0.0;
  }
  return norm;
}

std::vector<LayerFeatures> encode_features(const ModelGraph& graph, const ResourceCatalog& catalog,
                                           const FeatureSpec& spec,
                                           const FeatureNormalizer& normalizer) {
  if (graph.size() > static_cast<std::size_t>(spec.max_layers)) {
    throw ConfigError("model has " + std::to_string(graph.size()) + " layers; max_layers is " +
                      std::to_string(spec.max_layers));
  }
  auto z = [&](double raw, int f) {
    return normalizer.stddev[f] > 0.0 ? (raw - normalizer.mean[f]) / normalizer.stddev[f] : 0.0;
  };
  std::vector<LayerFeatures> out;
  for (const LayerSpec& layer : graph.layers) {
    LayerFeatures feat;
    feat.index_onehot.assign(static_cast<std::size_t>(spec.max_layers), 0.0);
    feat.index_onehot[static_cast<std::size_t>(layer.index)] = 1.0;
    feat.kind_onehot.assign(spec.kinds.size(), 0.0);
    const auto kind = std::find(spec.kinds.begin(), spec.kinds.end(), layer.kind);
    if (kind == spec.kinds.end()) {
      throw ConfigError("layer " + std::to_string(layer.index) + ": unknown kind '" + layer.kind +
                        "'");
    }
    feat.kind_onehot[static_cast<std::size_t>(kind - spec.kinds.begin())] = 1.0;
    const auto raw = raw_features(layer, catalog);
    feat.input_size_norm = z(raw[0], 0);
    feat.weight_size_norm = z(raw[1], 1);
    feat.comm_time_norm = z(raw[2], 2);
    out.push_back(std::move(feat));
  }
  return out;
}

FeatureMatrix to_matrix(const std::vector<LayerFeatures>& features) {
  FeatureMatrix m;
  m.rows = static_cast<int>(features.size());
  for (const LayerFeatures& f : features) {
    const auto row = f.concat();
    if (m.cols == 0) m.cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != m.cols) throw ConfigError("ragged feature rows");
    m.values.insert(m.values.end(), row.begin(), row.end());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Parameters

std::string_view to_string(PolicyArch arch) {
  return arch == PolicyArch::kLstm ? "lstm" : "elman";
}

PolicyArch parse_policy_arch(std::string_view text) {
  if (text == "lstm") return PolicyArch::kLstm;
  if (text == "elman" || text == "rnn") return PolicyArch::kElman;
  throw ConfigError("unknown policy architecture '" + std::string(text) + "'");
}

PolicyParams::PolicyParams(PolicyArch arch, int input_dim, int hidden_size, int num_types)
    : arch_(arch), input_dim_(input_dim), hidden_size_(hidden_size), num_types_(num_types) {
  if (input_dim < 1 || hidden_size < 1 || num_types < 1) {
    throw ConfigError("policy dimensions must be positive");
  }
  const std::size_t rows = static_cast<std::size_t>(gates()) * hidden_size;
  values_.assign(recurrent_weight_count() + rows + idx(num_types, hidden_size) +
                     static_cast<std::size_t>(num_types),
                 0.0);
}

PolicyParams PolicyParams::uniform(PolicyArch arch, int input_dim, int hidden_size, int num_types,
                                   double scale, Rng& rng) {
  PolicyParams p(arch, input_dim, hidden_size, num_types);
  for (double& v : p.values_) v = rng.uniform(-scale, scale);
  return p;
}

std::size_t PolicyParams::recurrent_weight_count() const {
  return idx(gates(), hidden_size_) * static_cast<std::size_t>(step_input_dim());
}

std::span<const double> PolicyParams::recurrent_weights() const {
  return std::span<const double>(values_).subspan(0, recurrent_weight_count());
}

std::span<const double> PolicyParams::recurrent_bias() const {
  return std::span<const double>(values_).subspan(recurrent_weight_count(),
                                                  idx(gates(), hidden_size_));
}

std::span<const double> PolicyParams::head_weights() const {
  return std::span<const double>(values_).subspan(
      recurrent_weight_count() + idx(gates(), hidden_size_), idx(num_types_, hidden_size_));
}

std::span<const double> PolicyParams::head_bias() const {
  return std::span<const double>(values_).subspan(values_.size() -
                                                  static_cast<std::size_t>(num_types_));
}

bool PolicyParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// Forward

namespace {

enum class Mode { kForced, kSample, kGreedy };

// One pass of the recurrence. In kForced mode the actions come from
// `forced`; otherwise each step's action is drawn (or argmaxed) and fed back.
PolicyForward run_policy(const PolicyParams& params, const FeatureMatrix& features,
                         double temperature, Mode mode, const SchedulingPlan* forced, Rng* rng) {
  if (features.cols != params.input_dim()) {
    throw ConfigError("feature width " + std::to_string(features.cols) +
                      " does not match policy input " + std::to_string(params.input_dim()));
  }
  if (!(temperature > 0.0)) throw NumericError("temperature must be > 0");
  const int D = params.input_dim();
  const int H = params.hidden_size();
  const int T = params.num_types();
  const int N = params.step_input_dim();
  const int rows = params.gates() * H;
  const bool lstm = params.arch() == PolicyArch::kLstm;
  const auto W = params.recurrent_weights();
  const auto bias = params.recurrent_bias();
  const auto V = params.head_weights();
  const auto head_bias = params.head_bias();
  if (mode == Mode::kForced) {
    if (forced->size() != static_cast<std::size_t>(features.rows)) {
      throw PlanError("plan has " + std::to_string(forced->size()) + " layers, features have " +
                      std::to_string(features.rows));
    }
    for (TypeId a : forced->assignment()) {
      if (a < 0 || a >= T) throw PlanError("type id " + std::to_string(a) + " out of range");
    }
  }

  PolicyForward fw;
  fw.steps = features.rows;
  fw.num_types = T;
  fw.temperature = temperature;
  fw.actions.assign(static_cast<std::size_t>(fw.steps), 0);
  fw.probs.assign(idx(fw.steps, T), 0.0);
  fw.inputs.assign(idx(fw.steps, N), 0.0);
  fw.gates.assign(idx(fw.steps, rows), 0.0);
  fw.cells.assign(lstm ? idx(fw.steps, H) : 0, 0.0);
  fw.hidden.assign(idx(fw.steps, H), 0.0);

  std::vector<double> pre(static_cast<std::size_t>(rows));
  std::vector<double> logits(static_cast<std::size_t>(T));
  for (int t = 0; t < fw.steps; ++t) {
    double* z = fw.inputs.data() + idx(t, N);
    const auto x = features.row(t);
    std::copy(x.begin(), x.end(), z);
    if (t > 0) {
      z[D + fw.actions[static_cast<std::size_t>(t - 1)]] = 1.0;
      const double* h_prev = fw.hidden.data() + idx(t - 1, H);
      std::copy(h_prev, h_prev + H, z + D + T);
    }
    for (int r = 0; r < rows; ++r) {
      const double* w = W.data() + idx(r, N);
      double acc = bias[static_cast<std::size_t>(r)];
      for (int n = 0; n < N; ++n) acc += w[n] * z[n];
      pre[static_cast<std::size_t>(r)] = acc;
    }
    double* act = fw.gates.data() + idx(t, rows);
    double* h = fw.hidden.data() + idx(t, H);
    if (lstm) {
      double* c = fw.cells.data() + idx(t, H);
      const double* c_prev = t > 0 ? fw.cells.data() + idx(t - 1, H) : nullptr;
      for (int j = 0; j < H; ++j) {
        const double i_gate = sigmoid(pre[static_cast<std::size_t>(j)]);
        const double f_gate = sigmoid(pre[static_cast<std::size_t>(H + j)]);
        const double o_gate = sigmoid(pre[static_cast<std::size_t>(2 * H + j)]);
        const double g_gate = std::tanh(pre[static_cast<std::size_t>(3 * H + j)]);
        act[j] = i_gate;
        act[H + j] = f_gate;
        act[2 * H + j] = o_gate;
        act[3 * H + j] = g_gate;
        c[j] = f_gate * (c_prev ? c_prev[j] : 0.0) + i_gate * g_gate;
        h[j] = o_gate * std::tanh(c[j]);
      }
    } else {
      for (int j = 0; j < H; ++j) {
        act[j] = std::tanh(pre[static_cast<std::size_t>(j)]);
        h[j] = act[j];
      }
    }

    double max_logit = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < T; ++a) {
      const double* v = V.data() + idx(a, H);
      double acc = head_bias[static_cast<std::size_t>(a)];
      for (int j = 0; j < H; ++j) acc += v[j] * h[j];
      logits[static_cast<std::size_t>(a)] = acc / temperature;
      max_logit = std::max(max_logit, logits[static_cast<std::size_t>(a)]);
    }
    if (!std::isfinite(max_logit)) {
      throw NumericError("non-finite policy activation at layer " + std::to_string(t));
    }
    double total = 0.0;
    double* p = fw.probs.data() + idx(t, T);
    for (int a = 0; a < T; ++a) {
      p[a] = std::exp(logits[static_cast<std::size_t>(a)] - max_logit);
      total += p[a];
    }
    for (int a = 0; a < T; ++a) p[a] /= total;

    TypeId chosen = 0;
    if (mode == Mode::kForced) {
      chosen = (*forced)[static_cast<std::size_t>(t)];
    } else if (mode == Mode::kGreedy) {
      chosen = static_cast<TypeId>(std::max_element(p, p + T) - p);
    } else {
      const double u = rng->uniform();
      double cumulative = 0.0;
      chosen = T - 1;
      for (int a = 0; a < T; ++a) {
        cumulative += p[a];
        if (u < cumulative) {
          chosen = a;
          break;
        }
      }
      // Never land on a zero-probability tail action through rounding.
      while (chosen > 0 && p[chosen] == 0.0) --chosen;
    }
    fw.actions[static_cast<std::size_t>(t)] = chosen;
  }
  return fw;
}

EpisodeTrace trace_of(const PolicyForward& fw) {
  EpisodeTrace trace;
  trace.plan = SchedulingPlan(fw.actions);
  trace.log_probs.resize(fw.actions.size());
  for (int t = 0; t < fw.steps; ++t) {
    const auto p = fw.step_probs(t);
    trace.log_probs[static_cast<std::size_t>(t)] =
        std::log(p[static_cast<std::size_t>(fw.actions[static_cast<std::size_t>(t)])]);
    for (double q : p) {
      if (q > 0.0) trace.entropy -= q * std::log(q);
    }
  }
  return trace;
}

}  // namespace

PolicyForward policy_forward(const PolicyParams& params, const FeatureMatrix& features,
                             const SchedulingPlan& actions, double temperature) {
  return run_policy(params, features, temperature, Mode::kForced, &actions, nullptr);
}

EpisodeTrace sample_plan(const PolicyParams& params, const FeatureMatrix& features, Rng& rng,
                         double temperature, PolicyForward& forward) {
  forward = run_policy(params, features, temperature, Mode::kSample, nullptr, &rng);
  return trace_of(forward);
}

EpisodeTrace sample_plan(const PolicyParams& params, const FeatureMatrix& features, Rng& rng,
                         double temperature) {
  PolicyForward fw;
  return sample_plan(params, features, rng, temperature, fw);
}

SchedulingPlan greedy_plan(const PolicyParams& params, const FeatureMatrix& features) {
  return SchedulingPlan(
      run_policy(params, features, 1.0, Mode::kGreedy, nullptr, nullptr).actions);
}

// ---------------------------------------------------------------------------
// Backward

namespace {

// Accumulates into `grad` so several episodes can share one buffer.
void backpropagate_into(const PolicyParams& params, const PolicyForward& fw,
                        std::span<const double> dlogits, std::vector<double>& grad) {
  const int H = params.hidden_size();
  const int T = params.num_types();
  const int N = params.step_input_dim();
  const int h_offset = N - H;
  const int rows = params.gates() * H;
  const bool lstm = params.arch() == PolicyArch::kLstm;
  const auto W = params.recurrent_weights();
  const auto V = params.head_weights();

  double* dW = grad.data();
  double* dbias = dW + W.size();
  double* dV = dbias + rows;
  double* dhead_bias = dV + V.size();

  std::vector<double> dh(static_cast<std::size_t>(H));
  std::vector<double> dh_next(static_cast<std::size_t>(H), 0.0);
  std::vector<double> dc_next(static_cast<std::size_t>(H), 0.0);
  std::vector<double> dpre(static_cast<std::size_t>(rows));

  for (int t = fw.steps - 1; t >= 0; --t) {
    const double* dl = dlogits.data() + idx(t, T);
    const double* h = fw.hidden.data() + idx(t, H);
    std::copy(dh_next.begin(), dh_next.end(), dh.begin());
    for (int a = 0; a < T; ++a) {
      if (dl[a] == 0.0) continue;
      dhead_bias[a] += dl[a];
      double* dv = dV + idx(a, H);
      const double* v = V.data() + idx(a, H);
      for (int j = 0; j < H; ++j) {
        dv[j] += dl[a] * h[j];
        dh[static_cast<std::size_t>(j)] += v[j] * dl[a];
      }
    }

    const double* act = fw.gates.data() + idx(t, rows);
    if (lstm) {
      const double* c = fw.cells.data() + idx(t, H);
      const double* c_prev = t > 0 ? fw.cells.data() + idx(t - 1, H) : nullptr;
      for (int j = 0; j < H; ++j) {
        const auto u = static_cast<std::size_t>(j);
        const double i_gate = act[j];
        const double f_gate = act[H + j];
        const double o_gate = act[2 * H + j];
        const double g_gate = act[3 * H + j];
        const double tc = std::tanh(c[j]);
        const double d_o = dh[u] * tc;
        const double dc = dh[u] * o_gate * (1.0 - tc * tc) + dc_next[u];
        const double d_i = dc * g_gate;
        const double d_g = dc * i_gate;
        const double d_f = dc * (c_prev ? c_prev[j] : 0.0);
        dc_next[u] = dc * f_gate;
        dpre[u] = d_i * i_gate * (1.0 - i_gate);
        dpre[static_cast<std::size_t>(H + j)] = d_f * f_gate * (1.0 - f_gate);
        dpre[static_cast<std::size_t>(2 * H + j)] = d_o * o_gate * (1.0 - o_gate);
        dpre[static_cast<std::size_t>(3 * H + j)] = d_g * (1.0 - g_gate * g_gate);
      }
    } else {
      for (int j = 0; j < H; ++j) {
        dpre[static_cast<std::size_t>(j)] = dh[static_cast<std::size_t>(j)] * (1.0 - act[j] * act[j]);
      }
    }

    const double* z = fw.inputs.data() + idx(t, N);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (int r = 0; r < rows; ++r) {
      const double d = dpre[static_cast<std::size_t>(r)];
      if (d == 0.0) continue;
      dbias[r] += d;
      double* dw = dW + idx(r, N);
      const double* w = W.data() + idx(r, N);
      for (int n = 0; n < N; ++n) dw[n] += d * z[n];
      for (int j = 0; j < H; ++j) dh_next[static_cast<std::size_t>(j)] += w[h_offset + j] * d;
    }
  }
}

// d/dlogits of weight * sum_t log p_t(a_t), already divided by the temperature.
void add_score_dlogits(const PolicyForward& fw, double weight, std::vector<double>& dlogits) {
  const int T = fw.num_types;
  const double scaled = weight / fw.temperature;
  for (int t = 0; t < fw.steps; ++t) {
    const std::size_t row = idx(t, T);
    for (int a = 0; a < T; ++a) {
      dlogits[row + static_cast<std::size_t>(a)] -= scaled * fw.probs[row + static_cast<std::size_t>(a)];
    }
    dlogits[row + static_cast<std::size_t>(fw.actions[static_cast<std::size_t>(t)])] += scaled;
  }
}

// d/dlogits of weight * sum_t H(p_t): -p_a (log p_a + H_t) / temperature.
void add_entropy_dlogits(const PolicyForward& fw, double weight, std::vector<double>& dlogits) {
  const int T = fw.num_types;
  const double scaled = weight / fw.temperature;
  for (int t = 0; t < fw.steps; ++t) {
    const auto p = fw.step_probs(t);
    double entropy = 0.0;
    for (double q : p) {
      if (q > 0.0) entropy -= q * std::log(q);
    }
    const std::size_t row = idx(t, T);
    for (int a = 0; a < T; ++a) {
      const double q = p[static_cast<std::size_t>(a)];
      if (q > 0.0) dlogits[row + static_cast<std::size_t>(a)] -= scaled * q * (std::log(q) + entropy);
    }
  }
}

}  // namespace

std::vector<double> entropy_gradient(const PolicyParams& params, const PolicyForward& fw) {
  std::vector<double> dlogits(fw.probs.size(), 0.0);
  add_entropy_dlogits(fw, 1.0, dlogits);
  return backpropagate(params, fw, dlogits);
}

std::vector<double> backpropagate(const PolicyParams& params, const PolicyForward& fw,
                                  std::span<const double> dlogits) {
  if (dlogits.size() != fw.probs.size()) throw NumericError("dlogits shape mismatch");
  std::vector<double> grad(params.size(), 0.0);
  backpropagate_into(params, fw, dlogits, grad);
  return grad;
}

std::vector<double> log_prob_gradient(const PolicyParams& params, const FeatureMatrix& features,
                                      const SchedulingPlan& actions, double temperature) {
  const PolicyForward fw = policy_forward(params, features, actions, temperature);
  std::vector<double> dlogits(fw.probs.size(), 0.0);
  add_score_dlogits(fw, 1.0, dlogits);
  return backpropagate(params, fw, dlogits);
}

double sequence_log_prob(const PolicyParams& params, const FeatureMatrix& features,
                         const SchedulingPlan& actions, double temperature) {
  const PolicyForward fw = policy_forward(params, features, actions, temperature);
  double total = 0.0;
  for (int t = 0; t < fw.steps; ++t) {
    total += std::log(fw.step_probs(t)[static_cast<std::size_t>(actions[static_cast<std::size_t>(t)])]);
  }
  return total;
}

std::vector<double> policy_gradient(const PolicyParams& params, const FeatureMatrix& features,
                                    std::span<const EpisodeTrace> traces, double baseline,
                                    double temperature) {
  if (traces.empty()) throw NumericError("policy gradient needs at least one trace");
  std::vector<PolicyForward> forwards;
  forwards.reserve(traces.size());
  for (const EpisodeTrace& trace : traces) {
    forwards.push_back(policy_forward(params, features, trace.plan, temperature));
  }
  return policy_gradient(params, forwards, traces, baseline);
}

std::vector<double> policy_gradient(const PolicyParams& params,
                                    std::span<const PolicyForward> forwards,
                                    std::span<const EpisodeTrace> traces, double baseline,
                                    double entropy_weight) {
  if (traces.empty()) throw NumericError("policy gradient needs at least one trace");
  if (forwards.size() != traces.size()) throw NumericError("one forward pass per trace expected");
  std::vector<double> grad(params.size(), 0.0);
  const double inv_g = 1.0 / static_cast<double>(traces.size());
  std::vector<double> dlogits;
  // Ordered reduction over the trace index keeps the sum seed-stable.
  for (std::size_t g = 0; g < traces.size(); ++g) {
    const double weight = (traces[g].reward - baseline) * inv_g;
    if (weight == 0.0 && entropy_weight == 0.0) continue;
    const PolicyForward& fw = forwards[g];
    if (SchedulingPlan(fw.actions) != traces[g].plan) {
      throw NumericError("forward pass does not match its trace");
    }
    dlogits.assign(fw.probs.size(), 0.0);
    add_score_dlogits(fw, weight, dlogits);
    if (entropy_weight != 0.0) add_entropy_dlogits(fw, entropy_weight * inv_g, dlogits);
    backpropagate_into(params, fw, dlogits, grad);
  }
  return grad;
}

}  // namespace hetsched
