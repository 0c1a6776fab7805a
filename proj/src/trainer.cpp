#include "toolrm/trainer.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "toolrm/error.hpp"
#include "toolrm/records.hpp"
#include "toolrm/rng.hpp"

namespace toolrm {

double RewardModel::reward(std::span<const double> features) const {
  if (features.size() != weights.size()) {
    throw UsageError("feature dimension " + std::to_string(features.size()) + " does not match model dimension " +
                     std::to_string(weights.size()));
  }
  double r = bias;
  for (std::size_t i = 0; i < weights.size(); ++i) r += weights[i] * features[i];
  return r;
}

double RewardModel::score(const ScoringContext& context, const ParsedCandidate& candidate) const {
  return reward(featurize(context, candidate));
}

Json model_to_json(const RewardModel& model) {
  Json j = Json::object();
  j["spec_version"] = model.spec.version;
  j["dimension"] = model.weights.size();
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  return j;
}

RewardModel model_from_json(const Json& j) {
  RewardModel m;
  try {
    m.spec.version = j.at("spec_version").get<std::string>();
    m.spec.dimension = j.at("dimension").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
  } catch (const Json::exception& e) {
    throw UsageError(std::string("invalid model file: ") + e.what());
  }
  if (m.weights.size() != m.spec.dimension) throw UsageError("model weights length does not match dimension");
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw UsageError("model has non-finite weights");
  }
  if (!std::isfinite(m.bias)) throw UsageError("model has non-finite bias");
  if (m.spec.version != kFeatureSpecVersion) m.spec.names.clear();
  return m;
}

RewardModel load_model(const std::string& path) {
  try {
    return model_from_json(Json::parse(read_file(path)));
  } catch (const Json::parse_error& e) {
    throw UsageError("model file " + path + " is not JSON: " + e.what());
  }
}

void TrainerConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw UsageError("learning_rate must be > 0");
  if (!(warmup_fraction >= 0 && warmup_fraction < 1)) throw UsageError("warmup_fraction must be in [0, 1)");
  if (!(centering >= 0) || !std::isfinite(centering)) throw UsageError("centering coefficient must be >= 0");
  if (batch_size == 0) throw UsageError("batch_size must be positive");
}

Json config_to_json(const TrainerConfig& config) {
  Json j = Json::object();
  j["learning_rate"] = config.learning_rate;
  j["reference_learning_rate"] = config.reference_learning_rate;
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["warmup_fraction"] = config.warmup_fraction;
  j["schedule"] = "cosine";
  j["centering"] = config.centering;
  j["centering_scope"] = config.centering_scope == CenteringScope::Batch ? "batch" : "epoch";
  j["seed"] = config.seed;
  return j;
}

double softplus(double x) {
  // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|})
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double bt_probability(double r_pos, double r_neg) {
  const double d = r_pos - r_neg;
  if (d >= 0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

double pair_loss(double r_pos, double r_neg, double centering) {
  const double s = r_pos + r_neg;
  return softplus(-(r_pos - r_neg)) + centering * s * s;
}

std::vector<FeaturePair> featurize_pairs(const std::vector<PreferencePair>& pairs) {
  std::vector<FeaturePair> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out[i].chosen = featurize(pairs[i].context, ParsedCandidate(pairs[i].chosen));
    out[i].rejected = featurize(pairs[i].context, pairs[i].rejected);
  }
  return out;
}

namespace {

// Adds the preference part of the gradient (and optionally the centering
// part) of the *sum* of losses over `batch` into `acc`.
double accumulate(const RewardModel& model, std::span<const FeaturePair> batch, double centering,
                  bool preference, bool center, LossAndGradient& acc) {
  double loss_sum = 0.0;
  const std::size_t dim = model.weights.size();
  for (const auto& p : batch) {
    const double rp = model.reward(p.chosen);
    const double rn = model.reward(p.rejected);
    const double d = rp - rn;
    const double s = rp + rn;
    double g_pos = 0.0;
    double g_neg = 0.0;
    if (preference) {
      loss_sum += softplus(-d);
      // d/dd softplus(-d) = -sigmoid(-d)
      const double sig = bt_probability(0.0, d);
      g_pos -= sig;
      g_neg += sig;
    }
    if (center) {
      loss_sum += centering * s * s;
      g_pos += 2.0 * centering * s;
      g_neg += 2.0 * centering * s;
    }
    for (std::size_t k = 0; k < dim; ++k) acc.weight_grad[k] += g_pos * p.chosen[k] + g_neg * p.rejected[k];
    acc.bias_grad += g_pos + g_neg;
  }
  return loss_sum;
}

void scale(LossAndGradient& g, double factor) {
  for (double& w : g.weight_grad) w *= factor;
  g.bias_grad *= factor;
}

double mean_loss(const RewardModel& model, std::span<const FeaturePair> data, double centering) {
  double sum = 0.0;
  for (const auto& p : data) sum += pair_loss(model.reward(p.chosen), model.reward(p.rejected), centering);
  return data.empty() ? 0.0 : sum / static_cast<double>(data.size());
}

}  // namespace

LossAndGradient loss_and_gradient(const RewardModel& model, std::span<const FeaturePair> batch,
                                  double centering) {
  LossAndGradient g;
  g.weight_grad.assign(model.weights.size(), 0.0);
  if (batch.empty()) return g;
  g.loss = accumulate(model, batch, centering, true, true, g);
  const double inv = 1.0 / static_cast<double>(batch.size());
  g.loss *= inv;
  scale(g, inv);
  return g;
}

double scheduled_learning_rate(const TrainerConfig& config, std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) return 0.0;
  const auto warmup = static_cast<std::size_t>(std::ceil(config.warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) {
    return config.learning_rate * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  const double decay_steps = static_cast<double>(total_steps - warmup);
  const double progress = static_cast<double>(step - warmup) / decay_steps;
  return config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainingResult train(std::span<const FeaturePair> data, const TrainerConfig& config, const FeatureSpec& spec) {
  config.validate();
  if (data.empty()) throw UsageError("training set is empty");
  const std::size_t dim = data.front().chosen.size();
  for (const auto& p : data) {
    if (p.chosen.size() != dim || p.rejected.size() != dim) throw UsageError("inconsistent feature dimensions");
  }

  TrainingResult result;
  result.model.spec = spec;
  result.model.spec.dimension = dim;
  result.model.weights.assign(dim, 0.0);
  result.model.bias = 0.0;
  RewardModel& model = result.model;
  TrainingReport& report = result.report;

  report.initial_loss = mean_loss(model, data, config.centering);

  const std::size_t n = data.size();
  const std::size_t batches_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = batches_per_epoch * config.epochs;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(combine_seed(config.seed, "train-order"));
  std::vector<FeaturePair> batch;

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    seeded_shuffle(order, rng);
    for (std::size_t b = 0; b < batches_per_epoch; ++b, ++step) {
      batch.clear();
      const std::size_t lo = b * config.batch_size;
      const std::size_t hi = std::min(n, lo + config.batch_size);
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(data[order[i]]);

      LossAndGradient g;
      g.weight_grad.assign(dim, 0.0);
      const double inv_batch = 1.0 / static_cast<double>(batch.size());
      if (config.centering_scope == CenteringScope::Batch) {
        g.loss = accumulate(model, batch, config.centering, true, true, g) * inv_batch;
        scale(g, inv_batch);
      } else {
        g.loss = accumulate(model, batch, config.centering, true, false, g) * inv_batch;
        scale(g, inv_batch);
        LossAndGradient c;
        c.weight_grad.assign(dim, 0.0);
        const double inv_all = 1.0 / static_cast<double>(n);
        g.loss += accumulate(model, data, config.centering, false, true, c) * inv_all;
        for (std::size_t k = 0; k < dim; ++k) g.weight_grad[k] += c.weight_grad[k] * inv_all;
        g.bias_grad += c.bias_grad * inv_all;
      }
      if (!std::isfinite(g.loss)) throw NonFiniteLoss(step);
      report.step_losses.push_back(g.loss);

      const double lr = scheduled_learning_rate(config, step, total_steps);
      for (std::size_t k = 0; k < dim; ++k) model.weights[k] -= lr * g.weight_grad[k];
      model.bias -= lr * g.bias_grad;
    }
  }
  report.steps = step;

  report.final_loss = mean_loss(model, data, config.centering);
  if (!std::isfinite(report.final_loss)) throw NonFiniteLoss(step);
  std::size_t wins = 0;
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& p : data) {
    const double rp = model.reward(p.chosen);
    const double rn = model.reward(p.rejected);
    wins += rp > rn ? 1 : 0;
    sum += rp + rn;
    sq += (rp + rn) * (rp + rn);
  }
  report.train_accuracy = static_cast<double>(wins) / static_cast<double>(n);
  report.mean_reward_sum = sum / static_cast<double>(n);
  report.mean_squared_reward_sum = sq / static_cast<double>(n);
  return result;
}

TrainingResult train(const std::vector<PreferencePair>& pairs, const TrainerConfig& config) {
  auto features = featurize_pairs(pairs);
  return train(features, config, FeatureSpec::builtin());
}

Json report_to_json(const TrainingReport& report) {
  Json j = Json::object();
  j["steps"] = report.steps;
  j["initial_loss"] = report.initial_loss;
  j["final_loss"] = report.final_loss;
  j["train_accuracy"] = report.train_accuracy;
  j["mean_reward_sum"] = report.mean_reward_sum;
  j["mean_squared_reward_sum"] = report.mean_squared_reward_sum;
  j["step_losses"] = report.step_losses;
  return j;
}

double evaluate_pairwise(const RewardModel& model, std::span<const FeaturePair> data) {
  if (data.empty()) throw UsageError("evaluation set is empty");
  std::size_t wins = 0;
  for (const auto& p : data) wins += model.reward(p.chosen) > model.reward(p.rejected) ? 1 : 0;
  return static_cast<double>(wins) / static_cast<double>(data.size());
}

double evaluate_pairwise(const RewardModel& model, const std::vector<PreferencePair>& pairs) {
  auto features = featurize_pairs(pairs);
  return evaluate_pairwise(model, std::span<const FeaturePair>(features));
}

}  // namespace toolrm
