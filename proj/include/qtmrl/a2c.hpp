#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtmrl/neural_core.hpp"
#include "qtmrl/trading_env.hpp"

namespace qtmrl {

struct A2CConfig {
    double gamma = 0.96;
    int rollout = 50;
    double value_coef = 0.5;
    double entropy_coef = 0.05;
    double learning_rate = 1e-5;
    long long total_timesteps = 100000;
    std::uint64_t seed = 42;
    std::vector<std::size_t> hidden = {256, 128};
    int checkpoint_interval = 200;  // updates between checkpoints, 0 = final only
    double grad_clip = 0.0;         // max gradient norm, 0 disables
    bool normalize_advantages = false;

    void validate() const;
};

/// One rollout of consecutive environment steps under the current policy.
struct Trajectory {
    std::vector<std::vector<double>> inputs;  // flattened network inputs
    std::vector<std::size_t> actions;
    std::vector<double> rewards;
    std::vector<double> log_probs;
    std::vector<double> values;
    std::vector<double> entropies;
    bool terminal = false;
    double bootstrap_value = 0.0;  // critic(s_T) when cut off mid-episode

    std::size_t size() const { return rewards.size(); }
};

struct LossBreakdown {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy_loss = 0.0;
    double total_loss = 0.0;  // policy + c_v * value + c_e * entropy, exact
};

/// Flattened network input for a state: the W x N x F window followed by
/// portfolio status (cash fraction and per-asset position value fractions).
std::vector<double> state_to_input(const MarketState& state, const TradingEnv& env);
std::size_t input_size(const TradingEnv& env);

/// Samples up to `horizon` steps from the live policy. The environment must
/// not be done at entry. On episode end the terminal flag is set; otherwise
/// the bootstrap value is the critic's estimate of the cutoff state.
Trajectory collect_rollout(TradingEnv& env, const MlpParams& actor,
                           const MlpParams& critic, int horizon, Rng& rng);

/// Backward recursion G_t = r_t + gamma * G_{t+1}, from 0 when terminal and
/// from the bootstrap value otherwise.
std::vector<double> compute_returns(const Trajectory& traj, double gamma);

/// Elementwise G_t - V_t.
std::vector<double> compute_advantages(const std::vector<double>& returns,
                                       const std::vector<double>& values);

/// policy = -mean(log_prob * A) with A held constant, value = mean((V-G)^2),
/// entropy = -mean(H).
LossBreakdown compute_losses(const Trajectory& traj,
                             const std::vector<double>& returns,
                             const std::vector<double>& advantages,
                             const A2CConfig& config);

/// Gradients of the total loss for one frozen batch, accumulated into the
/// supplied buffers. Returns the loss values of the same pass.
LossBreakdown accumulate_gradients(const MlpParams& actor, const MlpParams& critic,
                                   const Trajectory& traj,
                                   const std::vector<double>& returns,
                                   const std::vector<double>& advantages,
                                   const A2CConfig& config,
                                   MlpGrads& actor_grads, MlpGrads& critic_grads);

struct TrainLogRow {
    long long update_idx = 0;
    long long timesteps = 0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double mean_reward = 0.0;
    double equity = 0.0;
};

struct TrainResult {
    MlpParams actor;
    MlpParams critic;
    std::vector<TrainLogRow> log;
    long long timesteps = 0;
    bool aborted = false;          // non-finite loss; params hold the last good state
    std::string abort_reason;
};

/// Optional hook invoked after each update (checkpointing, progress).
using UpdateHook = std::function<void(const TrainLogRow&, const MlpParams& actor,
                                      const MlpParams& critic)>;

/// The training loop: collect -> returns -> advantages -> losses -> Adam,
/// until total_timesteps are consumed. Episodes are contiguous index ranges
/// of the supplied environment's data; starts are drawn uniformly at random
/// from the seeded generator so long budgets see diverse regimes.
TrainResult train(TradingEnv& env, const A2CConfig& config,
                  const UpdateHook& hook = nullptr);

/// update_idx,timesteps,policy_loss,value_loss,entropy,mean_reward,equity
void write_training_log(const std::vector<TrainLogRow>& log, const std::string& path);

}  // namespace qtmrl
