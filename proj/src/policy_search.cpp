#include "codesign/policy_search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace codesign {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;
constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2

double clamp_log_std(double v) { return std::clamp(v, kLogStdMin, kLogStdMax); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

size_t PolicyParams::n_parameters() const {
  size_t n = 1;  // log_std
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

PolicyParams PolicyParams::init(const std::vector<int>& layer_sizes, double action_scale,
                                double log_std_init, Rng64& rng) {
  if (layer_sizes.size() < 2 || layer_sizes.back() != 1)
    throw std::invalid_argument("policy layer sizes must run input..1");
  PolicyParams p;
  p.action_scale = action_scale;
  p.log_std = clamp_log_std(log_std_init);
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    Layer layer;
    layer.in = layer_sizes[l];
    layer.out = layer_sizes[l + 1];
    if (layer.in < 1 || layer.out < 1)
      throw std::invalid_argument("policy layer sizes must be positive");
    const bool last = l + 2 == layer_sizes.size();
    const double scale = (last ? 0.01 : 1.0) / std::sqrt(static_cast<double>(layer.in));
    layer.w.resize(static_cast<size_t>(layer.in) * layer.out);
    for (auto& w : layer.w) w = rng.uniform(-scale, scale);
    layer.b.assign(layer.out, 0.0);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

PolicyGrad PolicyGrad::zeros_like(const PolicyParams& p) {
  PolicyGrad g;
  g.layers.reserve(p.layers.size());
  for (const auto& l : p.layers) {
    PolicyParams::Layer z;
    z.in = l.in;
    z.out = l.out;
    z.w.assign(l.w.size(), 0.0);
    z.b.assign(l.b.size(), 0.0);
    g.layers.push_back(std::move(z));
  }
  g.log_std = 0.0;
  return g;
}

void PolicyGrad::set_zero() {
  for (auto& l : layers) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  log_std = 0.0;
}

void PolicyGrad::axpy(double a, const PolicyGrad& other) {
  for (size_t l = 0; l < layers.size(); ++l) {
    for (size_t i = 0; i < layers[l].w.size(); ++i) layers[l].w[i] += a * other.layers[l].w[i];
    for (size_t i = 0; i < layers[l].b.size(); ++i) layers[l].b[i] += a * other.layers[l].b[i];
  }
  log_std += a * other.log_std;
}

void PolicyGrad::scale(double a) {
  for (auto& l : layers) {
    for (auto& w : l.w) w *= a;
    for (auto& b : l.b) b *= a;
  }
  log_std *= a;
}

double PolicyGrad::squared_norm() const {
  double n = log_std * log_std;
  for (const auto& l : layers) {
    for (double w : l.w) n += w * w;
    for (double b : l.b) n += b * b;
  }
  return n;
}

PolicyForward policy_forward(const PolicyParams& params, const std::vector<double>& features) {
  if (params.layers.empty()) throw std::invalid_argument("policy has no layers");
  if (static_cast<int>(features.size()) != params.input_dim())
    throw std::invalid_argument("feature length does not match the policy input layer");

  PolicyForward out;
  out.activations.reserve(params.layers.size());
  out.activations.push_back(features);
  const std::vector<double>* a = &out.activations.back();
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    std::vector<double> z(layer.out, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      double acc = layer.b[o];
      const double* wrow = &layer.w[static_cast<size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) acc += wrow[i] * (*a)[i];
      z[o] = acc;
    }
    const bool last = l + 1 == params.layers.size();
    if (last) {
      out.mean = params.action_scale * z[0];
    } else {
      for (auto& v : z) v = std::tanh(v);
      out.activations.push_back(std::move(z));
      a = &out.activations.back();
    }
  }
  return out;
}

double logprob_grad_accumulate(const PolicyParams& params, const std::vector<double>& features,
                               double action, double weight, PolicyGrad& grad) {
  const PolicyForward fwd = policy_forward(params, features);
  const double sigma = std::exp(params.log_std);
  const double u = (action - fwd.mean) / sigma;
  const double logprob = -0.5 * u * u - params.log_std - kHalfLog2Pi;

  grad.log_std += weight * (u * u - 1.0);

  // d logprob / d mean = u / sigma, then back through the network.
  double delta_scalar = (u / sigma) * params.action_scale;
  std::vector<double> delta{delta_scalar};
  for (size_t li = params.layers.size(); li-- > 0;) {
    const auto& layer = params.layers[li];
    const std::vector<double>& a_in = fwd.activations[li];
    auto& gl = grad.layers[li];
    for (int o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* gw = &gl.w[static_cast<size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) gw[i] += weight * d * a_in[i];
      gl.b[o] += weight * d;
    }
    if (li == 0) break;
    std::vector<double> prev(layer.in, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* wrow = &layer.w[static_cast<size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) prev[i] += wrow[i] * d;
    }
    // The feeding layer ends in tanh; a_in are its outputs.
    for (int i = 0; i < layer.in; ++i) prev[i] *= 1.0 - a_in[i] * a_in[i];
    delta = std::move(prev);
  }
  return logprob;
}

std::pair<double, PolicyGrad> logprob_grad(const PolicyParams& params,
                                           const std::vector<double>& features, double action) {
  PolicyGrad grad = PolicyGrad::zeros_like(params);
  const double lp = logprob_grad_accumulate(params, features, action, 1.0, grad);
  return {lp, std::move(grad)};
}

std::vector<double> encode_state(const MdpState& s, const DesignPoint& design,
                                 const SystemParameters& p) {
  std::vector<double> f(9);
  f[0] = std::sin(kTwoPi * s.h / 24.0);
  f[1] = std::cos(kTwoPi * s.h / 24.0);
  f[2] = std::sin(kTwoPi * s.d / 365.0);
  f[3] = std::cos(kTwoPi * s.d / 365.0);
  f[4] = design.b > 0.0 ? s.soc / design.b : 0.0;
  f[5] = p.p_nom_max > 0.0 ? s.p_prod_bar / p.p_nom_max : 0.0;
  f[6] = s.p_load_bar / kLoadFeatureScale;
  f[7] = p.p_nom_max > 0.0 ? design.p_nom / p.p_nom_max : 0.0;
  f[8] = p.b_max > 0.0 ? design.b / p.b_max : 0.0;
  return f;
}

DesignPoint DesignDistribution::mean_design(const SystemParameters& p) const {
  return {p.p_nom_min + (p.p_nom_max - p.p_nom_min) * sigmoid(mu_pv),
          p.b_min + (p.b_max - p.b_min) * sigmoid(mu_b)};
}

namespace {

// One squashed-Gaussian coordinate: value = lo + (hi - lo) * sigmoid(g).
struct SquashedCoord {
  double logprob;
  double grad_mu;
  double grad_log_std;
};

SquashedCoord coord_logprob(double value, double lo, double hi, double mu, double log_std) {
  const double width = hi - lo;
  if (width <= 0.0) throw std::invalid_argument("design bounds have zero width");
  double s = (value - lo) / width;
  s = std::clamp(s, 1e-12, 1.0 - 1e-12);
  const double g = std::log(s / (1.0 - s));
  const double sigma = std::exp(clamp_log_std(log_std));
  const double u = (g - mu) / sigma;
  SquashedCoord out;
  // Gaussian density of g plus the sigmoid change-of-variables term.
  out.logprob = -0.5 * u * u - clamp_log_std(log_std) - kHalfLog2Pi -
                std::log(width * s * (1.0 - s));
  out.grad_mu = u / sigma;
  out.grad_log_std = u * u - 1.0;
  return out;
}

}  // namespace

DesignSample design_logprob(const DesignDistribution& dist, const SystemParameters& p,
                            const DesignPoint& design) {
  DesignSample out;
  out.design = design;
  const SquashedCoord pv =
      coord_logprob(design.p_nom, p.p_nom_min, p.p_nom_max, dist.mu_pv, dist.log_std_pv);
  const SquashedCoord b = coord_logprob(design.b, p.b_min, p.b_max, dist.mu_b, dist.log_std_b);
  out.logprob = pv.logprob + b.logprob;
  out.grad_mu_pv = pv.grad_mu;
  out.grad_log_std_pv = pv.grad_log_std;
  out.grad_mu_b = b.grad_mu;
  out.grad_log_std_b = b.grad_log_std;
  return out;
}

DesignSample sample_design(const DesignDistribution& dist, const SystemParameters& p, Rng64& rng) {
  const double g_pv = rng.normal(dist.mu_pv, std::exp(clamp_log_std(dist.log_std_pv)));
  const double g_b = rng.normal(dist.mu_b, std::exp(clamp_log_std(dist.log_std_b)));
  DesignPoint d{p.p_nom_min + (p.p_nom_max - p.p_nom_min) * sigmoid(g_pv),
                p.b_min + (p.b_max - p.b_min) * sigmoid(g_b)};
  return design_logprob(dist, p, d);
}

EpisodeSample DispatchEnv::run(
    const std::function<double(const std::vector<double>&)>& sample_action,
    const DesignPoint& design, Rng64& rng) const {
  EpisodeSample ep;
  ep.steps.reserve(config_.t_horizon);
  const PolicyFn policy = [&](const MdpState& s) {
    EpisodeStep step;
    step.features = encode_state(s, design, p_);
    step.action = sample_action(step.features);
    ep.steps.push_back(std::move(step));
    return ep.steps.back().action;
  };
  const Rollout r = rollout(policy, design, config_, *ds_, p_, rng);
  ep.episode_return = r.episode_return;
  ep.episode_income = r.episode_income;
  return ep;
}

void TrainConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  if (lr_policy < 0.0 || lr_design < 0.0) throw std::invalid_argument("learning rates must be >= 0");
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) throw std::invalid_argument("ema_alpha must be in (0,1]");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be positive");
}

TrainResult train(const RolloutEnv& env, const SystemParameters& p, Scenario scenario,
                  const std::optional<DesignPoint>& fixed_design, const TrainConfig& config) {
  config.validate();
  if (scenario == Scenario::ctr && !fixed_design)
    throw std::invalid_argument("ctr training requires a fixed design");
  if (scenario == Scenario::ctr_des && fixed_design)
    throw std::invalid_argument("ctr_des training samples its design; none may be fixed");
  const bool sizing = scenario == Scenario::ctr_des;

  Rng64 init_rng(Rng64::mix(config.seed, 0x1c0de));
  std::vector<int> sizes;
  sizes.push_back(env.feature_dim());
  for (int h : config.hidden) sizes.push_back(h);
  sizes.push_back(1);
  const double action_scale = config.action_scale > 0.0 ? config.action_scale : p.b_max / p.dt;

  TrainResult result;
  result.policy = PolicyParams::init(sizes, action_scale, config.log_std_init, init_rng);
  result.design = DesignDistribution{0.0, config.design_log_std_init, 0.0,
                                     config.design_log_std_init};

  // Divergence floor from the zero-action policy on a representative design.
  const DesignPoint probe = sizing ? result.design.mean_design(p) : *fixed_design;
  double zero_return = 0.0;
  {
    const auto zero_action = [](const std::vector<double>&) { return 0.0; };
    const int probes = 4;
    for (int k = 0; k < probes; ++k) {
      Rng64 rng(Rng64::mix(config.seed, 0x2e20, k));
      zero_return += env.run(zero_action, probe, rng).episode_return;
    }
    zero_return /= probes;
  }
  const bool guard_active = zero_return < 0.0;
  const double divergence_floor = config.divergence_factor * zero_return;

  PolicyGrad grad = PolicyGrad::zeros_like(result.policy);
  std::vector<EpisodeSample> episodes(config.batch);
  std::vector<DesignSample> design_samples(config.batch);

  result.stats.mean_return.reserve(config.iterations);
  result.stats.mean_income.reserve(config.iterations);
  result.stats.design_pv.reserve(config.iterations);
  result.stats.design_b.reserve(config.iterations);
  result.stats.smoothed_return.reserve(config.iterations);

  for (long iter = 0; iter < config.iterations; ++iter) {
    double sum_return = 0.0;
    double sum_income = 0.0;
    const double sigma = std::exp(result.policy.log_std);
    for (int e = 0; e < config.batch; ++e) {
      Rng64 rng(Rng64::mix(config.seed, static_cast<uint64_t>(iter) + 1,
                           static_cast<uint64_t>(e)));
      DesignPoint design;
      if (sizing) {
        design_samples[e] = sample_design(result.design, p, rng);
        design = design_samples[e].design;
      } else {
        design = *fixed_design;
      }
      const auto sampler = [&](const std::vector<double>& features) {
        return policy_forward(result.policy, features).mean + sigma * rng.normal();
      };
      episodes[e] = env.run(sampler, design, rng);
      sum_return += episodes[e].episode_return;
      sum_income += episodes[e].episode_income;
    }
    const double baseline = sum_return / config.batch;
    const double mean_income = sum_income / config.batch;

    grad.set_zero();
    double g_mu_pv = 0.0, g_ls_pv = 0.0, g_mu_b = 0.0, g_ls_b = 0.0;
    for (int e = 0; e < config.batch; ++e) {
      const double advantage = episodes[e].episode_return - baseline;
      if (advantage == 0.0) continue;
      const double w = advantage / config.batch;
      for (const EpisodeStep& step : episodes[e].steps)
        logprob_grad_accumulate(result.policy, step.features, step.action, w, grad);
      if (sizing) {
        g_mu_pv += w * design_samples[e].grad_mu_pv;
        g_ls_pv += w * design_samples[e].grad_log_std_pv;
        g_mu_b += w * design_samples[e].grad_mu_b;
        g_ls_b += w * design_samples[e].grad_log_std_b;
      }
    }

    if (config.grad_clip > 0.0) {
      const double norm = std::sqrt(grad.squared_norm());
      if (norm > config.grad_clip) grad.scale(config.grad_clip / norm);
      const double dnorm =
          std::sqrt(g_mu_pv * g_mu_pv + g_ls_pv * g_ls_pv + g_mu_b * g_mu_b + g_ls_b * g_ls_b);
      if (dnorm > config.grad_clip) {
        const double f = config.grad_clip / dnorm;
        g_mu_pv *= f; g_ls_pv *= f; g_mu_b *= f; g_ls_b *= f;
      }
    }

    // Ascent on the expected return.
    for (size_t l = 0; l < result.policy.layers.size(); ++l) {
      auto& layer = result.policy.layers[l];
      const auto& gl = grad.layers[l];
      for (size_t i = 0; i < layer.w.size(); ++i) layer.w[i] += config.lr_policy * gl.w[i];
      for (size_t i = 0; i < layer.b.size(); ++i) layer.b[i] += config.lr_policy * gl.b[i];
    }
    result.policy.log_std = clamp_log_std(result.policy.log_std + config.lr_policy * grad.log_std);
    if (sizing) {
      result.design.mu_pv += config.lr_design * g_mu_pv;
      result.design.log_std_pv = clamp_log_std(result.design.log_std_pv + config.lr_design * g_ls_pv);
      result.design.mu_b += config.lr_design * g_mu_b;
      result.design.log_std_b = clamp_log_std(result.design.log_std_b + config.lr_design * g_ls_b);
    }

    const DesignPoint current =
        sizing ? result.design.mean_design(p) : *fixed_design;
    result.stats.mean_return.push_back(baseline);
    result.stats.mean_income.push_back(mean_income);
    result.stats.design_pv.push_back(current.p_nom);
    result.stats.design_b.push_back(current.b);
    const double smoothed =
        result.stats.smoothed_return.empty()
            ? baseline
            : (1.0 - config.ema_alpha) * result.stats.smoothed_return.back() +
                  config.ema_alpha * baseline;
    result.stats.smoothed_return.push_back(smoothed);

    if (guard_active && baseline < divergence_floor)
      throw std::runtime_error("training diverged: mean return " + std::to_string(baseline) +
                               " fell below " + std::to_string(divergence_floor));
    if (config.progress_every > 0 && (iter + 1) % config.progress_every == 0)
      std::fprintf(stderr, "iter %ld mean_return %.3f design (%.2f kWp, %.2f kWh)\n", iter + 1,
                   baseline, current.p_nom, current.b);
  }

  result.final_design =
      sizing ? result.design.mean_design(p) : *fixed_design;
  return result;
}

EvalSummary evaluate(const PolicyParams& policy, const DesignPoint& design, const Dataset& ds,
                     const SystemParameters& p, const EpisodeConfig& base, int n_episodes,
                     uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be >= 1");
  EpisodeConfig config = base;
  config.init_soc_mode = InitSocMode::half_capacity;

  const PolicyFn mean_policy = [&](const MdpState& s) {
    return policy_forward(policy, encode_state(s, design, p)).mean;
  };

  EvalSummary out;
  out.episodes = n_episodes;
  for (int e = 0; e < n_episodes; ++e) {
    Rng64 rng(Rng64::mix(seed, 0xe7a1, static_cast<uint64_t>(e)));
    const Rollout r = rollout(mean_policy, design, config, ds, p, rng);
    out.mean_reward += r.episode_return;
    out.mean_income += r.episode_income;
    out.mean_final_soc_gap += r.initial_soc - r.final_soc;
    out.mean_correction_cost += cyclic_correction_cost(r.final_soc, r.initial_soc, p);
  }
  out.mean_reward /= n_episodes;
  out.mean_income /= n_episodes;
  out.mean_final_soc_gap /= n_episodes;
  out.mean_correction_cost /= n_episodes;
  return out;
}

void save_checkpoint(const PolicyParams& policy, const DesignDistribution& design,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[128];
  out << "codesign-policy 1\n";
  std::snprintf(buf, sizeof(buf), "action_scale %.17g\n", policy.action_scale);
  out << buf;
  std::snprintf(buf, sizeof(buf), "log_std %.17g\n", policy.log_std);
  out << buf;
  out << "layers " << policy.layers.size() << "\n";
  for (const auto& l : policy.layers) {
    out << "layer " << l.in << " " << l.out << "\n";
    for (int o = 0; o < l.out; ++o) {
      for (int i = 0; i < l.in; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g%c", l.w[static_cast<size_t>(o) * l.in + i],
                      i + 1 == l.in ? '\n' : ' ');
        out << buf;
      }
    }
    for (int o = 0; o < l.out; ++o) {
      std::snprintf(buf, sizeof(buf), "%.17g%c", l.b[o], o + 1 == l.out ? '\n' : ' ');
      out << buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "design %.17g %.17g %.17g %.17g\n", design.mu_pv,
                design.log_std_pv, design.mu_b, design.log_std_b);
  out << buf << "end\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void load_checkpoint(PolicyParams& policy, DesignDistribution& design, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "codesign-policy" || version != 1)
    throw std::runtime_error("unrecognized checkpoint header in " + path);
  size_t n_layers = 0;
  policy = PolicyParams{};
  in >> tag >> policy.action_scale;       // action_scale
  in >> tag >> policy.log_std;            // log_std
  in >> tag >> n_layers;                  // layers
  for (size_t l = 0; l < n_layers; ++l) {
    PolicyParams::Layer layer;
    in >> tag >> layer.in >> layer.out;   // layer
    if (tag != "layer" || layer.in < 1 || layer.out < 1)
      throw std::runtime_error("malformed checkpoint layer in " + path);
    layer.w.resize(static_cast<size_t>(layer.in) * layer.out);
    for (auto& w : layer.w) in >> w;
    layer.b.resize(layer.out);
    for (auto& b : layer.b) in >> b;
    policy.layers.push_back(std::move(layer));
  }
  in >> tag;
  if (tag != "design") throw std::runtime_error("malformed checkpoint design in " + path);
  in >> design.mu_pv >> design.log_std_pv >> design.mu_b >> design.log_std_b;
  in >> tag;
  if (!in || tag != "end") throw std::runtime_error("truncated checkpoint: " + path);
}

}  // namespace codesign
