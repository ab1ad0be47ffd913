#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "codesign/dataset.hpp"
#include "codesign/economics.hpp"
#include "codesign/env.hpp"
#include "codesign/milp.hpp"
#include "codesign/rng.hpp"

namespace codesign {

// Load feature normalization, kW. Desk-scale office profiles sit well below
// this, so the feature stays O(1).
constexpr double kLoadFeatureScale = 50.0;

// Feed-forward Gaussian policy: tanh hidden layers, linear scalar output
// scaled into kW, plus a state-independent action log-std.
struct PolicyParams {
  struct Layer {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;  // out
  };
  std::vector<Layer> layers;
  double log_std = 0.0;        // clamped to [-5, 2]
  double action_scale = 1.0;   // kW per unit of network output

  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  size_t n_parameters() const;

  // Random small weights, zero biases; `layer_sizes` runs input..output and
  // must end in 1.
  static PolicyParams init(const std::vector<int>& layer_sizes, double action_scale,
                           double log_std_init, Rng64& rng);
};

// Gradient holder with the same shapes as PolicyParams.
struct PolicyGrad {
  std::vector<PolicyParams::Layer> layers;
  double log_std = 0.0;

  static PolicyGrad zeros_like(const PolicyParams& p);
  void set_zero();
  void axpy(double a, const PolicyGrad& other);
  void scale(double a);
  double squared_norm() const;
};

struct PolicyForward {
  double mean = 0.0;  // kW
  std::vector<std::vector<double>> activations;  // input plus each hidden layer output
};

PolicyForward policy_forward(const PolicyParams& params, const std::vector<double>& features);

// Gaussian log-density of `action` under (mean(features), exp(log_std)) and
// its gradient with respect to every parameter, by reverse accumulation.
std::pair<double, PolicyGrad> logprob_grad(const PolicyParams& params,
                                           const std::vector<double>& features, double action);

// Same computation accumulated in place: grad += weight * d(logprob)/d(params).
double logprob_grad_accumulate(const PolicyParams& params, const std::vector<double>& features,
                               double action, double weight, PolicyGrad& grad);

// Fixed 9-feature encoding: hour and day angles, normalized charge level,
// normalized expected production and load, normalized design.
std::vector<double> encode_state(const MdpState& s, const DesignPoint& design,
                                 const SystemParameters& p);

// Gaussian over pre-squash coordinates; a scaled sigmoid maps samples into
// the admissible design box, so every draw is feasible and the densities
// keep a nonzero gradient at the box edges.
struct DesignDistribution {
  double mu_pv = 0.0, log_std_pv = 0.0;
  double mu_b = 0.0, log_std_b = 0.0;

  DesignPoint mean_design(const SystemParameters& p) const;
};

struct DesignSample {
  DesignPoint design;
  double logprob = 0.0;  // includes the change-of-variables term
  double grad_mu_pv = 0.0, grad_log_std_pv = 0.0;
  double grad_mu_b = 0.0, grad_log_std_b = 0.0;
};

DesignSample sample_design(const DesignDistribution& dist, const SystemParameters& p, Rng64& rng);

// Log-density (and parameter gradient) of an already chosen design point.
DesignSample design_logprob(const DesignDistribution& dist, const SystemParameters& p,
                            const DesignPoint& design);

// One recorded step of an episode: what the policy saw and what it sampled.
struct EpisodeStep {
  std::vector<double> features;
  double action = 0.0;
};

struct EpisodeSample {
  std::vector<EpisodeStep> steps;
  double episode_return = 0.0;
  double episode_income = 0.0;
};

// The environment abstraction the trainer optimizes against. The production
// implementation wraps the dispatch process; tests plug in toy tasks.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual int feature_dim() const = 0;
  virtual EpisodeSample run(const std::function<double(const std::vector<double>&)>& sample_action,
                            const DesignPoint& design, Rng64& rng) const = 0;
};

class DispatchEnv : public RolloutEnv {
 public:
  DispatchEnv(const Dataset& ds, const SystemParameters& p, const EpisodeConfig& config)
      : ds_(&ds), p_(p), config_(config) {}
  int feature_dim() const override { return 9; }
  EpisodeSample run(const std::function<double(const std::vector<double>&)>& sample_action,
                    const DesignPoint& design, Rng64& rng) const override;
  const EpisodeConfig& episode_config() const { return config_; }

 private:
  const Dataset* ds_;
  SystemParameters p_;
  EpisodeConfig config_;
};

struct TrainConfig {
  long iterations = 100000;
  int batch = 64;            // episodes per iteration
  double lr_policy = 3e-4;
  double lr_design = 1e-3;
  uint64_t seed = 0;
  double ema_alpha = 0.01;
  std::vector<int> hidden = {64, 64};
  double log_std_init = 0.0;
  double design_log_std_init = 0.0;
  double grad_clip = 100.0;        // global norm cap, 0 disables
  double action_scale = 0.0;       // 0 -> b_max / dt
  double divergence_factor = 10.0; // abort when mean return sinks below this
                                   // multiple of the zero-action return
  long progress_every = 0;         // stderr cadence, 0 = silent

  void validate() const;
};

struct TrainStats {
  std::vector<double> mean_return;
  std::vector<double> mean_income;
  std::vector<double> design_pv;
  std::vector<double> design_b;
  std::vector<double> smoothed_return;  // EMA, first value equals the raw first value
};

struct TrainResult {
  PolicyParams policy;
  DesignDistribution design;
  TrainStats stats;
  DesignPoint final_design;  // squashed distribution mean at the last iteration
};

// Joint REINFORCE-style search: per iteration a batch of episodes is rolled
// out (each with its own design sample in the sizing scenario), the batch
// mean return serves as baseline, and both the policy and the design
// distribution ascend their score-function gradients.
TrainResult train(const RolloutEnv& env, const SystemParameters& p, Scenario scenario,
                  const std::optional<DesignPoint>& fixed_design, const TrainConfig& config);

struct EvalSummary {
  double mean_reward = 0.0;
  double mean_income = 0.0;
  double mean_final_soc_gap = 0.0;    // initial minus final charge, kWh
  double mean_correction_cost = 0.0;  // grid cost of restoring the initial charge
  int episodes = 0;
};

// Deterministic-policy evaluation: charge starts at half capacity, start
// days follow `base.init_day_mode`, the policy mean is applied unperturbed.
EvalSummary evaluate(const PolicyParams& policy, const DesignPoint& design, const Dataset& ds,
                     const SystemParameters& p, const EpisodeConfig& base, int n_episodes = 1000,
                     uint64_t seed = 0);

// Portable flat text dump with shape headers.
void save_checkpoint(const PolicyParams& policy, const DesignDistribution& design,
                     const std::string& path);
void load_checkpoint(PolicyParams& policy, DesignDistribution& design, const std::string& path);

}  // namespace codesign
