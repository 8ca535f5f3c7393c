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

#ifndef HETSCHED_POLICY_H_
#define HETSCHED_POLICY_H_

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetsched/model.h"
#include "hetsched/rng.h"

// Recurrent scheduling policy. The layer index plays the role of time: one
// recurrent step per layer, a linear head to T logits, softmax per step.
namespace hetsched {

// ---------------------------------------------------------------------------
// Features

// log1p followed by a z-score over the graph's layers, for input size,
// weight size and communication time.
struct FeatureNormalizer {
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};  // zero means "constant feature", mapped to 0
};

struct FeatureSpec {
  int max_layers = 64;
  std::vector<std::string> kinds;

  int dim() const { return max_layers + static_cast<int>(kinds.size()) + 3; }
};

struct LayerFeatures {
  std::vector<double> index_onehot;
  std::vector<double> kind_onehot;
  double input_size_norm = 0.0;
  double weight_size_norm = 0.0;
  double comm_time_norm = 0.0;

  // index | kind | sizes | comm time
  std::vector<double> concat() const;
};

// Kinds come from the catalog when it declares them, otherwise from the graph
// (sorted). Throws ConfigError if the graph is longer than max_layers.
FeatureSpec make_feature_spec(const ModelGraph& graph, const ResourceCatalog& catalog,
                              int max_layers = 64);

// Raw communication time of a layer: mean odt over the catalog's types.
FeatureNormalizer fit_normalizer(const ModelGraph& graph, const ResourceCatalog& catalog);

std::vector<LayerFeatures> encode_features(const ModelGraph& graph, const ResourceCatalog& catalog,
                                           const FeatureSpec& spec,
                                           const FeatureNormalizer& normalizer);

// Row-major L x dim matrix of concatenated features.
struct FeatureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
};

FeatureMatrix to_matrix(const std::vector<LayerFeatures>& features);

// ---------------------------------------------------------------------------
// Parameters

enum class PolicyArch { kLstm, kElman };

std::string_view to_string(PolicyArch arch);
PolicyArch parse_policy_arch(std::string_view text);

// All weights in one flat vector so updates, finite differences and
// serialization treat them uniformly. The step input is
// z_t = [x_t ; onehot(a_{t-1}) ; h_{t-1}] of width D + T + H, the action
// one-hot being zero at the first layer. Layout:
//   recurrent weights  gates*H x (D + T + H), row-major, LSTM gates i, f, o, g
//   recurrent bias     gates*H
//   head weights       T x H
//   head bias          T
class PolicyParams {
 public:
  PolicyParams() = default;
  PolicyParams(PolicyArch arch, int input_dim, int hidden_size, int num_types);

  static PolicyParams uniform(PolicyArch arch, int input_dim, int hidden_size, int num_types,
                              double scale, Rng& rng);

  PolicyArch arch() const { return arch_; }
  int input_dim() const { return input_dim_; }
  int hidden_size() const { return hidden_size_; }
  int num_types() const { return num_types_; }
  int gates() const { return arch_ == PolicyArch::kLstm ? 4 : 1; }
  int step_input_dim() const { return input_dim_ + num_types_ + hidden_size_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> recurrent_weights() const;
  std::span<const double> recurrent_bias() const;
  std::span<const double> head_weights() const;
  std::span<const double> head_bias() const;

  bool all_finite() const;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  std::size_t recurrent_weight_count() const;

  PolicyArch arch_ = PolicyArch::kLstm;
  int input_dim_ = 0;
  int hidden_size_ = 0;
  int num_types_ = 0;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Forward / sampling

// Activations kept for backpropagation plus the per-step probabilities.
struct PolicyForward {
  int steps = 0;
  int num_types = 0;
  double temperature = 1.0;
  std::vector<TypeId> actions;  // the action taken (or forced) at each step
  std::vector<double> probs;    // steps x T, conditioned on earlier actions

  // Per-step caches, each steps x width.
  std::vector<double> inputs;  // z_t
  std::vector<double> gates;   // gate activations, gates*H
  std::vector<double> cells;   // LSTM cell state
  std::vector<double> hidden;  // h_t

  std::span<const double> step_probs(int t) const {
    return {probs.data() + static_cast<std::size_t>(t) * num_types,
            static_cast<std::size_t>(num_types)};
  }
};

// Runs the recurrence over the rows of `features` with the given actions fed
// back (teacher forcing). Rows of `probs` sum to 1. Throws NumericError
// naming the layer on a non-finite activation, PlanError on a length or id
// mismatch.
PolicyForward policy_forward(const PolicyParams& params, const FeatureMatrix& features,
                             const SchedulingPlan& actions, double temperature = 1.0);

struct EpisodeTrace {
  SchedulingPlan plan;
  std::vector<double> log_probs;
  double reward = 0.0;
  double entropy = 0.0;
};

// Draws each action from the temperature-scaled softmax and feeds it back.
EpisodeTrace sample_plan(const PolicyParams& params, const FeatureMatrix& features, Rng& rng,
                         double temperature = 1.0);

// Same, also returning the activations for backpropagation.
EpisodeTrace sample_plan(const PolicyParams& params, const FeatureMatrix& features, Rng& rng,
                         double temperature, PolicyForward& forward);

// Per-layer argmax fed back, lowest id on ties.
SchedulingPlan greedy_plan(const PolicyParams& params, const FeatureMatrix& features);

// ---------------------------------------------------------------------------
// Gradients

// Backpropagates d(objective)/d(logits) (steps x T, already divided by the
// temperature) through the head and the recurrence.
std::vector<double> backpropagate(const PolicyParams& params, const PolicyForward& forward,
                                  std::span<const double> dlogits);

// Gradient of sum_t log P(a_t) for the given actions.
std::vector<double> log_prob_gradient(const PolicyParams& params, const FeatureMatrix& features,
                                      const SchedulingPlan& actions, double temperature = 1.0);

// sum_t log P(a_t); the finite-difference oracle differentiates this.
double sequence_log_prob(const PolicyParams& params, const FeatureMatrix& features,
                         const SchedulingPlan& actions, double temperature = 1.0);

// REINFORCE estimate with a baseline:
//   (1/G) sum_g (sum_t grad log P(a_t | a_{t-1..1})) (R_g - b)
// Throws NumericError for an empty trace set.
std::vector<double> policy_gradient(const PolicyParams& params, const FeatureMatrix& features,
                                    std::span<const EpisodeTrace> traces, double baseline,
                                    double temperature = 1.0);

// Same estimate from forward passes already recorded while sampling;
// forwards[g] belongs to traces[g].
// A positive `entropy_weight` adds that multiple of the gradient of the
// mean per-trace entropy sum_t H(p_t), which slows the collapse of the
// sampling distribution.
std::vector<double> policy_gradient(const PolicyParams& params,
                                    std::span<const PolicyForward> forwards,
                                    std::span<const EpisodeTrace> traces, double baseline,
                                    double entropy_weight = 0.0);

// Gradient of sum_t H(p_t) along the recorded actions.
std::vector<double> entropy_gradient(const PolicyParams& params, const PolicyForward& forward);

}  // namespace hetsched

#endif  // HETSCHED_POLICY_H_
