#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "toolrm/features.hpp"
#include "toolrm/json.hpp"
#include "toolrm/types.hpp"

namespace toolrm {

/// Linear reward head: r(x, y) = weights . features(x, y) + bias.
struct RewardModel {
  FeatureSpec spec = FeatureSpec::builtin();
  std::vector<double> weights = std::vector<double>(kFeatureDimension, 0.0);
  double bias = 0.0;

  double reward(std::span<const double> features) const;
  double score(const ScoringContext& context, const ParsedCandidate& candidate) const;

  friend bool operator==(const RewardModel& a, const RewardModel& b) {
    return a.spec.version == b.spec.version && a.weights == b.weights && a.bias == b.bias;
  }
};

/// Model file: {"spec_version","dimension","weights":[...],"bias"}.
Json model_to_json(const RewardModel& model);
RewardModel model_from_json(const Json& j);
RewardModel load_model(const std::string& path);

enum class CenteringScope { Batch, Epoch };

struct TrainerConfig {
  double learning_rate = 1e-2;
  /// Recorded in reports; the value used for billion-parameter backbones.
  double reference_learning_rate = 1e-6;
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  double warmup_fraction = 0.03;
  /// Coefficient of the centering penalty E[(r+ + r-)^2].
  double centering = 0.01;
  /// Which pairs estimate the centering expectation at each step.
  CenteringScope centering_scope = CenteringScope::Batch;
  std::uint64_t seed = 0;

  /// Throws UsageError on invalid values.
  void validate() const;
};

Json config_to_json(const TrainerConfig& config);

/// Bradley-Terry preference probability exp(a) / (exp(a) + exp(b)),
/// evaluated as a logistic of the difference.
double bt_probability(double r_pos, double r_neg);

/// log(1 + exp(x)) without overflow or cancellation.
double softplus(double x);

/// -log sigmoid(r_pos - r_neg) + centering * (r_pos + r_neg)^2.
double pair_loss(double r_pos, double r_neg, double centering);

/// Featurized preference pair.
struct FeaturePair {
  FeatureVector chosen;
  FeatureVector rejected;
};

std::vector<FeaturePair> featurize_pairs(const std::vector<PreferencePair>& pairs);

/// Mean pair loss of `model` over `batch` and its gradient (weights then bias).
struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> weight_grad;
  double bias_grad = 0.0;
};

LossAndGradient loss_and_gradient(const RewardModel& model, std::span<const FeaturePair> batch,
                                  double centering);

/// Learning rate at `step` (0-based) of `total_steps`: linear warmup over
/// ceil(warmup_fraction * total) steps, then cosine decay towards zero.
double scheduled_learning_rate(const TrainerConfig& config, std::size_t step, std::size_t total_steps);

struct TrainingReport {
  std::vector<double> step_losses;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
  double mean_reward_sum = 0.0;
  double mean_squared_reward_sum = 0.0;
  std::size_t steps = 0;
};

Json report_to_json(const TrainingReport& report);

struct TrainingResult {
  RewardModel model;
  TrainingReport report;
};

/// Mini-batch gradient descent on the mean pair loss from a zero-initialized
/// model. The pair order is reshuffled each epoch from `config.seed`;
/// accumulation order within a batch is fixed, so results are bit-identical
/// across runs. Throws NonFiniteLoss with the step index.
TrainingResult train(std::span<const FeaturePair> data, const TrainerConfig& config,
                     const FeatureSpec& spec = FeatureSpec::builtin());

TrainingResult train(const std::vector<PreferencePair>& pairs, const TrainerConfig& config);

/// Fraction of pairs with r(chosen) > r(rejected); ties count as failures.
double evaluate_pairwise(const RewardModel& model, std::span<const FeaturePair> data);
double evaluate_pairwise(const RewardModel& model, const std::vector<PreferencePair>& pairs);

}  // namespace toolrm
