#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rlvm/cluster.hpp"
#include "rlvm/metrics.hpp"
#include "rlvm/mlp.hpp"
#include "rlvm/policies.hpp"
#include "rlvm/prng.hpp"

namespace rlvm {

// Per-VM observation, all components dimensionless:
//   0 vm draw / declared demand        1 vm draw / host capacity
//   2 ram usage / ram demand           3 host utilization
//   4 one-step utilization forecast    5 fraction of past slots overloaded
//   6 VMs on host / total VMs
inline constexpr int kFeatureDim = 7;
inline constexpr int kValueFeatureDim = 2 * kFeatureDim;  // mean and max pools

using FeatureVector = std::array<double, kFeatureDim>;

inline constexpr int kPolicyHidden = 32;
inline constexpr int kValueHidden = 32;

// Selection policy (per-VM migrate logit) and value head (pooled cluster
// features). The reward scale and update counter travel with the weights so
// training can resume.
struct PolicyParams {
  Mlp policy{{kFeatureDim, kPolicyHidden, kPolicyHidden, 1}};
  Mlp value{{kValueFeatureDim, kValueHidden, 1}};
  long long iterations_trained = 0;
  double reward_scale = 0.0;

  bool operator==(const PolicyParams&) const = default;
};

PolicyParams make_policy_params(std::uint64_t seed);

std::vector<FeatureVector> encode_state(const ClusterState& state,
                                        const DetectionConfig& det = {});

std::array<double, kValueFeatureDim> pool_features(std::span<const FeatureVector> features);
double value_estimate(const PolicyParams& params, std::span<const FeatureVector> features);

// Migrate probability for one VM; sigmoid of the policy logit, kept inside
// (0, 1) so log-probabilities stay finite.
double migrate_probability(const PolicyParams& params, const FeatureVector& features);

struct ActionSample {
  std::vector<std::uint8_t> mask;  // 1 = selected for migration
  double joint_logp = 0.0;         // sum of per-VM Bernoulli log-probabilities
};

// `greedy` takes every VM with probability > 1/2; otherwise independent
// Bernoulli draws from `rng`.
ActionSample select_action(const PolicyParams& params, std::span<const FeatureVector> features,
                           bool greedy, Prng* rng);

// Energy decrement between consecutive slots, in units of `scale`.
double step_reward(double ec_t, double ec_next, double scale);

struct TrajectoryStep {
  std::vector<FeatureVector> features;
  std::vector<std::uint8_t> action;
  double logp = 0.0;
  double reward = 0.0;
  double value = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  bool complete = false;
};

struct PPOConfig {
  double gamma = 0.99;
  double clip_eps = 0.2;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int epochs_per_update = 4;
  int minibatch_size = 256;  // VM decisions per minibatch
  int rollout_episodes = 4;
  double reward_scale = 0.0;  // <= 0: mean per-slot energy of the first rollout
  double entropy_coef = 0.01;
  std::uint64_t seed = 0;
  int iterations = 100;
};

// Generalized advantage estimation over a complete episode; the value past
// the final recorded step is 0. Fills advantage and return fields, leaving
// advantages unnormalized (the update normalizes per batch).
void compute_advantages(Trajectory& traj, const PPOConfig& cfg);

double ppo_ratio(double logp_new, double logp_old);

// Mean over samples of min(ratio * adv, clip(ratio) * adv).
double clipped_objective(std::span<const double> ratios, std::span<const double> advantages,
                         double eps);

// One evaluation (and optional gradient accumulation) over a batch of
// steps. `advantages` is parallel to `steps`. When grads are requested,
// `policy_grad` receives d/dtheta of -(surrogate_weight * J + entropy_weight * H)
// and `value_grad` receives d/dphi of the mean squared error to returns.
struct PolicyBatchResult {
  double surrogate = 0.0;      // mean clipped objective over steps
  double entropy = 0.0;        // mean Bernoulli entropy over VM decisions
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;  // fraction of steps where clipping bound
  double value_loss = 0.0;     // mean squared error to returns
};
PolicyBatchResult evaluate_policy_batch(const PolicyParams& params,
                                        std::span<const TrajectoryStep* const> steps,
                                        std::span<const double> advantages, double clip_eps,
                                        double surrogate_weight, double entropy_weight,
                                        Mlp* policy_grad, Mlp* value_grad);

struct Optimizers {
  AdamOptimizer policy;
  AdamOptimizer value;
};
Optimizers make_optimizers(const PolicyParams& params, double learning_rate);

struct UpdateDiagnostics {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double surrogate = 0.0;
};

// Clipped-surrogate ascent with entropy bonus plus value regression, over
// shuffled minibatches for several epochs. Advantages are normalized to
// zero mean / unit variance across the whole batch first.
UpdateDiagnostics ppo_update(PolicyParams& params, std::vector<Trajectory>& trajectories,
                             const PPOConfig& cfg, Optimizers& opt, Prng& shuffle_rng);

// One episode with the policy driving selection and PABFD placing. Sampled
// mode records steps for every slot but the last, which always acts
// greedily (there is no later slot whose energy the sample could trade
// against). Rewards are left unset; the caller derives them from the
// accounting.
struct RolloutResult {
  Trajectory traj;
  std::vector<SlotAccounting> accounting;
};
RolloutResult rollout_episode(std::shared_ptr<const RequestSet> request,
                              const ClusterConfig& cluster_cfg, const DetectionConfig& det,
                              const PolicyParams& params, bool sample, Prng* rng);

struct LearningCurveRow {
  long long iteration = 0;
  double mean_ec = 0.0;
  double mean_slav = 0.0;
  double mean_migrations = 0.0;
  double clip_frac = 0.0;
  double entropy = 0.0;
};

inline constexpr const char* kLearningCurveCsvHeader =
    "iteration,mean_ec,mean_slav,mean_migrations,clip_frac,entropy";

std::string learning_curve_csv(std::span<const LearningCurveRow> curve);

struct TrainResult {
  PolicyParams params;
  std::vector<LearningCurveRow> curve;
};

TrainResult train(std::shared_ptr<const RequestSet> request, const ClusterConfig& cluster_cfg,
                  const DetectionConfig& det, const PPOConfig& cfg,
                  const PolicyParams* resume = nullptr);

// Greedy selection for one slot; combined with the PABFD placer inside the
// slot advance this is the full RL-PABFD method.
MigrationSet rl_step(const PolicyParams& params, const ClusterState& state,
                     const DetectionConfig& det = {});

// Versioned text container: "rlvm-policy v1" header, layer shapes, then the
// weights in row-major order as exact decimal text.
std::string serialize_params(const PolicyParams& params);
PolicyParams parse_params(const std::string& text);
void save_params(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_params(const std::filesystem::path& path);

}  // namespace rlvm
