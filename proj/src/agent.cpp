#include "rlvm/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rlvm/error.hpp"
#include "rlvm/util.hpp"

namespace rlvm {

namespace {

constexpr double kProbFloor = 1e-12;  // keeps both log terms finite

double clamp_probability(double p) {
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

double bernoulli_logp(double p, bool selected) {
  return selected ? std::log(p) : std::log1p(-p);
}

double bernoulli_entropy(double p) {
  return -(p * std::log(p) + (1.0 - p) * std::log1p(-p));
}

}  // namespace

PolicyParams make_policy_params(std::uint64_t seed) {
  PolicyParams params;
  Prng rng(seed);
  Prng policy_rng = rng.split();
  Prng value_rng = rng.split();
  params.policy.init(policy_rng);
  params.value.init(value_rng);
  return params;
}

std::vector<FeatureVector> encode_state(const ClusterState& state, const DetectionConfig& det) {
  const int t = state.slot;
  const int m = state.host_count();
  const int n = state.vm_count();

  std::vector<double> load(static_cast<std::size_t>(m));
  std::vector<double> util(static_cast<std::size_t>(m));
  std::vector<double> forecast(static_cast<std::size_t>(m));
  std::vector<double> overload_rate(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    load[static_cast<std::size_t>(j)] = host_load(state, j, t);
    util[static_cast<std::size_t>(j)] =
        load[static_cast<std::size_t>(j)] / state.hosts[static_cast<std::size_t>(j)].capacity_mhz;
    std::vector<double> series = state.history[static_cast<std::size_t>(j)];
    series.push_back(util[static_cast<std::size_t>(j)]);
    forecast[static_cast<std::size_t>(j)] = lr_overload_predict(series, det).predicted_next;
    const auto& past = state.history[static_cast<std::size_t>(j)];
    if (!past.empty()) {
      long over = std::count_if(past.begin(), past.end(), [](double u) { return u >= 1.0; });
      overload_rate[static_cast<std::size_t>(j)] =
          static_cast<double>(over) / static_cast<double>(past.size());
    }
  }

  std::vector<FeatureVector> features(static_cast<std::size_t>(n));
  for (int vm = 0; vm < n; ++vm) {
    const VmProfile& p = state.profile(vm);
    int j = state.placement.host_of(vm);
    double usage = vm_energy(p, t);
    FeatureVector& f = features[static_cast<std::size_t>(vm)];
    f[0] = usage / p.d_vm_mhz;
    f[1] = usage / state.hosts[static_cast<std::size_t>(j)].capacity_mhz;
    f[2] = p.ram_demand_kb > 0.0
               ? p.ram_usage_kb[static_cast<std::size_t>(t)] / p.ram_demand_kb
               : 0.0;
    f[3] = util[static_cast<std::size_t>(j)];
    f[4] = forecast[static_cast<std::size_t>(j)];
    f[5] = overload_rate[static_cast<std::size_t>(j)];
    f[6] = static_cast<double>(state.placement.vms_on(j).size()) / static_cast<double>(n);
  }
  return features;
}

std::array<double, kValueFeatureDim> pool_features(std::span<const FeatureVector> features) {
  std::array<double, kValueFeatureDim> pooled{};
  if (features.empty()) return pooled;
  for (int k = 0; k < kFeatureDim; ++k) pooled[static_cast<std::size_t>(kFeatureDim + k)] = features[0][static_cast<std::size_t>(k)];
  for (const FeatureVector& f : features)
    for (int k = 0; k < kFeatureDim; ++k) {
      pooled[static_cast<std::size_t>(k)] += f[static_cast<std::size_t>(k)];
      pooled[static_cast<std::size_t>(kFeatureDim + k)] =
          std::max(pooled[static_cast<std::size_t>(kFeatureDim + k)], f[static_cast<std::size_t>(k)]);
    }
  for (int k = 0; k < kFeatureDim; ++k)
    pooled[static_cast<std::size_t>(k)] /= static_cast<double>(features.size());
  return pooled;
}

double value_estimate(const PolicyParams& params, std::span<const FeatureVector> features) {
  auto pooled = pool_features(features);
  return params.value.forward(pooled);
}

double migrate_probability(const PolicyParams& params, const FeatureVector& features) {
  double z = params.policy.forward(features);
  return clamp_probability(1.0 / (1.0 + std::exp(-z)));
}

ActionSample select_action(const PolicyParams& params, std::span<const FeatureVector> features,
                           bool greedy, Prng* rng) {
  ActionSample out;
  out.mask.resize(features.size(), 0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    double p = migrate_probability(params, features[i]);
    bool selected = greedy ? p > 0.5 : (rng->next_double() < p);
    out.mask[i] = selected ? 1 : 0;
    out.joint_logp += bernoulli_logp(p, selected);
  }
  return out;
}

double step_reward(double ec_t, double ec_next, double scale) {
  return (ec_t - ec_next) / scale;
}

void compute_advantages(Trajectory& traj, const PPOConfig& cfg) {
  if (!traj.complete)
    throw IncompleteTrajectoryError("episode must run through its final slot first");
  double next_value = 0.0;  // value past the last recorded step
  double next_adv = 0.0;
  for (std::size_t i = traj.steps.size(); i-- > 0;) {
    TrajectoryStep& s = traj.steps[i];
    double delta = s.reward + cfg.gamma * next_value - s.value;
    s.advantage = delta + cfg.gamma * cfg.gae_lambda * next_adv;
    s.ret = s.advantage + s.value;
    next_value = s.value;
    next_adv = s.advantage;
  }
}

double ppo_ratio(double logp_new, double logp_old) { return std::exp(logp_new - logp_old); }

double clipped_objective(std::span<const double> ratios, std::span<const double> advantages,
                         double eps) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    double r = ratios[i];
    double a = advantages[i];
    sum += std::min(r * a, std::clamp(r, 1.0 - eps, 1.0 + eps) * a);
  }
  return ratios.empty() ? 0.0 : sum / static_cast<double>(ratios.size());
}

PolicyBatchResult evaluate_policy_batch(const PolicyParams& params,
                                        std::span<const TrajectoryStep* const> steps,
                                        std::span<const double> advantages, double clip_eps,
                                        double surrogate_weight, double entropy_weight,
                                        Mlp* policy_grad, Mlp* value_grad) {
  PolicyBatchResult res;
  const double nsteps = static_cast<double>(steps.size());
  long decisions = 0;
  for (const TrajectoryStep* s : steps) decisions += static_cast<long>(s->features.size());
  const double ndecisions = std::max<long>(decisions, 1);

  Mlp::Cache cache;
  long clipped = 0;
  for (std::size_t si = 0; si < steps.size(); ++si) {
    const TrajectoryStep& step = *steps[si];
    const double adv = advantages[si];

    // Per-VM forward passes; the joint log-probability is the sum of the
    // independent Bernoulli terms.
    std::vector<Mlp::Cache> caches(step.features.size());
    std::vector<double> probs(step.features.size());
    double logp_new = 0.0;
    for (std::size_t v = 0; v < step.features.size(); ++v) {
      double z = params.policy.forward(step.features[v], caches[v]);
      double p = clamp_probability(1.0 / (1.0 + std::exp(-z)));
      probs[v] = p;
      logp_new += bernoulli_logp(p, step.action[v] != 0);
    }

    double ratio = ppo_ratio(logp_new, step.logp);
    double unclipped = ratio * adv;
    double clipped_term = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
    res.surrogate += std::min(unclipped, clipped_term);
    res.mean_ratio += ratio;
    const bool use_unclipped = unclipped <= clipped_term;
    if (!use_unclipped) ++clipped;

    double entropy_sum = 0.0;
    for (double p : probs) entropy_sum += bernoulli_entropy(p);
    res.entropy += entropy_sum;

    if (policy_grad != nullptr) {
      // d(min)/d(logp_new): through the unclipped branch it is ratio * adv;
      // when the clipped branch is active the ratio sits outside the band,
      // so the derivative is zero.
      double dJ_dlogp = use_unclipped ? ratio * adv : 0.0;
      for (std::size_t v = 0; v < step.features.size(); ++v) {
        double p = probs[v];
        double dlogp_dz = (step.action[v] != 0) ? (1.0 - p) : -p;
        double dH_dz = (std::log1p(-p) - std::log(p)) * p * (1.0 - p);
        double seed = -(surrogate_weight * dJ_dlogp * dlogp_dz / nsteps +
                        entropy_weight * dH_dz / ndecisions);
        if (seed != 0.0) params.policy.backward(caches[v], seed, *policy_grad);
      }
    }

    auto pooled = pool_features(step.features);
    double v = params.value.forward(pooled, cache);
    double err = v - step.ret;
    res.value_loss += err * err;
    if (value_grad != nullptr) params.value.backward(cache, 2.0 * err / nsteps, *value_grad);
  }
  if (!steps.empty()) {
    res.surrogate /= nsteps;
    res.mean_ratio /= nsteps;
    res.clip_fraction = static_cast<double>(clipped) / nsteps;
    res.value_loss /= nsteps;
  }
  res.entropy /= ndecisions;
  return res;
}

Optimizers make_optimizers(const PolicyParams& params, double learning_rate) {
  return {AdamOptimizer(params.policy.param_count(), learning_rate),
          AdamOptimizer(params.value.param_count(), learning_rate)};
}

UpdateDiagnostics ppo_update(PolicyParams& params, std::vector<Trajectory>& trajectories,
                             const PPOConfig& cfg, Optimizers& opt, Prng& shuffle_rng) {
  std::vector<const TrajectoryStep*> steps;
  for (const Trajectory& traj : trajectories) {
    if (!traj.complete) throw IncompleteTrajectoryError("update needs complete trajectories");
    for (const TrajectoryStep& s : traj.steps) steps.push_back(&s);
  }
  if (steps.empty()) throw IncompleteTrajectoryError("update needs at least one step");

  // Batch-normalized advantages.
  double mean = 0.0;
  for (const TrajectoryStep* s : steps) mean += s->advantage;
  mean /= static_cast<double>(steps.size());
  double var = 0.0;
  for (const TrajectoryStep* s : steps) {
    double d = s->advantage - mean;
    var += d * d;
  }
  var /= static_cast<double>(steps.size());
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  std::vector<double> norm_adv(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i)
    norm_adv[i] = (steps[i]->advantage - mean) * inv_std;

  long decisions = 0;
  for (const TrajectoryStep* s : steps) decisions += static_cast<long>(s->features.size());
  const double mean_vms =
      static_cast<double>(decisions) / static_cast<double>(steps.size());
  const std::size_t steps_per_minibatch = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.minibatch_size / std::max(mean_vms, 1.0))));

  std::vector<std::size_t> order(steps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  UpdateDiagnostics diag;
  long minibatches = 0;
  Mlp policy_grad = params.policy.zeros_like();
  Mlp value_grad = params.value.zeros_like();
  std::vector<const TrajectoryStep*> batch_steps;
  std::vector<double> batch_adv;
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size(); begin += steps_per_minibatch) {
      std::size_t end = std::min(begin + steps_per_minibatch, order.size());
      batch_steps.clear();
      batch_adv.clear();
      for (std::size_t i = begin; i < end; ++i) {
        batch_steps.push_back(steps[order[i]]);
        batch_adv.push_back(norm_adv[order[i]]);
      }
      policy_grad.fill(0.0);
      value_grad.fill(0.0);
      PolicyBatchResult res =
          evaluate_policy_batch(params, batch_steps, batch_adv, cfg.clip_eps, 1.0,
                                cfg.entropy_coef, &policy_grad, &value_grad);
      if (!policy_grad.all_finite() || !value_grad.all_finite() ||
          !std::isfinite(res.surrogate) || !std::isfinite(res.value_loss))
        throw NonFiniteGradientError("epoch " + std::to_string(epoch) + ", minibatch " +
                                     std::to_string(begin / steps_per_minibatch));
      opt.policy.step(params.policy, policy_grad);
      opt.value.step(params.value, value_grad);
      diag.mean_ratio += res.mean_ratio;
      diag.clip_fraction += res.clip_fraction;
      diag.value_loss += res.value_loss;
      diag.entropy += res.entropy;
      diag.surrogate += res.surrogate;
      ++minibatches;
    }
  }
  if (minibatches > 0) {
    diag.mean_ratio /= static_cast<double>(minibatches);
    diag.clip_fraction /= static_cast<double>(minibatches);
    diag.value_loss /= static_cast<double>(minibatches);
    diag.entropy /= static_cast<double>(minibatches);
    diag.surrogate /= static_cast<double>(minibatches);
  }
  if (!params.policy.all_finite() || !params.value.all_finite())
    throw NonFiniteGradientError("parameters after update");
  return diag;
}

RolloutResult rollout_episode(std::shared_ptr<const RequestSet> request,
                              const ClusterConfig& cluster_cfg, const DetectionConfig& det,
                              const PolicyParams& params, bool sample, Prng* rng) {
  RolloutResult out;
  ClusterState state = make_cluster(request, cluster_cfg);
  PabfdPlacer placer;
  const int slots = state.slot_count();
  out.accounting.reserve(static_cast<std::size_t>(slots));
  for (int t = 0; t < slots; ++t) {
    auto features = encode_state(state, det);
    const bool record = sample && t + 1 < slots;
    ActionSample action = select_action(params, features, !record, rng);
    MigrationSet mig;
    for (std::size_t vm = 0; vm < action.mask.size(); ++vm)
      if (action.mask[vm])
        mig.entries.push_back({static_cast<int>(vm), state.placement.host_of(static_cast<int>(vm))});
    if (record) {
      TrajectoryStep step;
      step.action = action.mask;
      step.logp = action.joint_logp;
      step.value = value_estimate(params, features);
      step.features = std::move(features);
      out.traj.steps.push_back(std::move(step));
    }
    out.accounting.push_back(advance_slot(state, mig, placer));
  }
  out.traj.complete = true;
  return out;
}

std::string learning_curve_csv(std::span<const LearningCurveRow> curve) {
  std::string out = kLearningCurveCsvHeader;
  out += '\n';
  for (const LearningCurveRow& row : curve) {
    out += std::to_string(row.iteration);
    out += ',' + fmt_double(row.mean_ec);
    out += ',' + fmt_double(row.mean_slav);
    out += ',' + fmt_double(row.mean_migrations);
    out += ',' + fmt_double(row.clip_frac);
    out += ',' + fmt_double(row.entropy);
    out += '\n';
  }
  return out;
}

TrainResult train(std::shared_ptr<const RequestSet> request, const ClusterConfig& cluster_cfg,
                  const DetectionConfig& det, const PPOConfig& cfg, const PolicyParams* resume) {
  if (cfg.iterations <= 0 || cfg.rollout_episodes <= 0)
    throw InvalidSpecError("training needs positive iteration and rollout counts");
  TrainResult result;
  result.params = resume != nullptr ? *resume : make_policy_params(cfg.seed);
  double scale = cfg.reward_scale > 0.0 ? cfg.reward_scale : result.params.reward_scale;

  Prng master(cfg.seed);
  Prng rollout_rng = master.split();
  Prng shuffle_rng = master.split();
  Optimizers opt = make_optimizers(result.params, cfg.learning_rate);

  const int host_count = make_cluster(request, cluster_cfg).host_count();
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    std::vector<Trajectory> trajectories;
    trajectories.reserve(static_cast<std::size_t>(cfg.rollout_episodes));
    double sum_ec = 0.0, sum_slav = 0.0, sum_migs = 0.0;
    for (int e = 0; e < cfg.rollout_episodes; ++e) {
      RolloutResult ro = rollout_episode(request, cluster_cfg, det, result.params, true,
                                         &rollout_rng);
      if (scale <= 0.0) {
        // Anchor the reward unit to the untrained policy's energy level.
        double total = 0.0;
        for (const SlotAccounting& a : ro.accounting) total += a.ec_total;
        scale = total / static_cast<double>(ro.accounting.size());
        if (scale <= 0.0) scale = 1.0;
      }
      for (std::size_t t = 0; t < ro.traj.steps.size(); ++t)
        ro.traj.steps[t].reward =
            step_reward(ro.accounting[t].ec_total, ro.accounting[t + 1].ec_total, scale);
      compute_advantages(ro.traj, cfg);
      EpisodeMetrics m = summarize(ro.accounting, *request, host_count);
      sum_ec += m.total_ec;
      sum_slav += m.slav;
      sum_migs += static_cast<double>(m.migrations);
      trajectories.push_back(std::move(ro.traj));
    }
    UpdateDiagnostics diag = ppo_update(result.params, trajectories, cfg, opt, shuffle_rng);
    LearningCurveRow row;
    row.iteration = result.params.iterations_trained + iter;
    row.mean_ec = sum_ec / cfg.rollout_episodes;
    row.mean_slav = sum_slav / cfg.rollout_episodes;
    row.mean_migrations = sum_migs / cfg.rollout_episodes;
    row.clip_frac = diag.clip_fraction;
    row.entropy = diag.entropy;
    result.curve.push_back(row);
  }
  result.params.iterations_trained += cfg.iterations;
  result.params.reward_scale = scale;
  return result;
}

MigrationSet rl_step(const PolicyParams& params, const ClusterState& state,
                     const DetectionConfig& det) {
  auto features = encode_state(state, det);
  ActionSample action = select_action(params, features, true, nullptr);
  MigrationSet mig;
  for (std::size_t vm = 0; vm < action.mask.size(); ++vm)
    if (action.mask[vm])
      mig.entries.push_back({static_cast<int>(vm), state.placement.host_of(static_cast<int>(vm))});
  return mig;
}

std::string serialize_params(const PolicyParams& params) {
  std::string out = "rlvm-policy v1\n";
  out += "iterations " + std::to_string(params.iterations_trained) + '\n';
  out += "reward_scale " + fmt_double(params.reward_scale) + '\n';
  auto shape_line = [](const char* tag, const Mlp& net) {
    std::string line = tag;
    line += ' ' + std::to_string(net.sizes().size());
    for (int s : net.sizes()) line += ' ' + std::to_string(s);
    return line + '\n';
  };
  out += shape_line("policy", params.policy);
  out += shape_line("value", params.value);
  out += "data\n";
  auto dump = [&out](const Mlp& net) {
    auto flat = net.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      out += fmt_double(flat[i]);
      out += (i % 8 == 7 || i + 1 == flat.size()) ? '\n' : ' ';
    }
  };
  dump(params.policy);
  dump(params.value);
  out += "end\n";
  return out;
}

PolicyParams parse_params(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "rlvm-policy v1")
    throw ModelLoadError("bad magic header");
  PolicyParams params;
  auto read_shapes = [](std::string_view s, const char* tag,
                        const std::vector<int>& expected) {
    auto tokens = split(trim(s), ' ');
    if (tokens.size() < 2 || tokens[0] != tag) throw ModelLoadError(std::string("expected ") + tag + " shape line");
    auto count = parse_int(tokens[1]);
    if (!count || tokens.size() != 2 + static_cast<std::size_t>(*count))
      throw ModelLoadError(std::string(tag) + ": malformed shape list");
    std::vector<int> sizes;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      auto v = parse_int(tokens[i]);
      if (!v) throw ModelLoadError(std::string(tag) + ": non-numeric shape");
      sizes.push_back(static_cast<int>(*v));
    }
    if (sizes != expected) throw ModelLoadError(std::string(tag) + ": shape mismatch");
  };
  if (!std::getline(in, line)) throw ModelLoadError("truncated header");
  {
    auto tokens = split(trim(line), ' ');
    if (tokens.size() != 2 || tokens[0] != "iterations") throw ModelLoadError("expected iterations");
    auto v = parse_int(tokens[1]);
    if (!v || *v < 0) throw ModelLoadError("bad iteration count");
    params.iterations_trained = *v;
  }
  if (!std::getline(in, line)) throw ModelLoadError("truncated header");
  {
    auto tokens = split(trim(line), ' ');
    if (tokens.size() != 2 || tokens[0] != "reward_scale") throw ModelLoadError("expected reward_scale");
    auto v = parse_double(tokens[1]);
    if (!v || !std::isfinite(*v)) throw ModelLoadError("bad reward scale");
    params.reward_scale = *v;
  }
  if (!std::getline(in, line)) throw ModelLoadError("truncated header");
  read_shapes(line, "policy", params.policy.sizes());
  if (!std::getline(in, line)) throw ModelLoadError("truncated header");
  read_shapes(line, "value", params.value.sizes());
  if (!std::getline(in, line) || trim(line) != "data") throw ModelLoadError("expected data section");

  const std::size_t total = params.policy.param_count() + params.value.param_count();
  std::vector<double> values;
  values.reserve(total);
  std::string token;
  while (values.size() < total && in >> token) {
    auto v = parse_double(token);
    if (!v || !std::isfinite(*v)) throw ModelLoadError("non-finite or non-numeric weight");
    values.push_back(*v);
  }
  if (values.size() != total) throw ModelLoadError("truncated weight data");
  if (!(in >> token) || token != "end") throw ModelLoadError("missing end marker");

  params.policy.unflatten(std::span(values).subspan(0, params.policy.param_count()));
  params.value.unflatten(std::span(values).subspan(params.policy.param_count()));
  return params;
}

void save_params(const PolicyParams& params, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_params(params));
}

PolicyParams load_params(const std::filesystem::path& path) {
  return parse_params(read_file(path));
}

}  // namespace rlvm
