#include "qtmrl/a2c.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qtmrl/csv.hpp"

namespace qtmrl {

void A2CConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("bad-config", "gamma must be in (0, 1]");
    if (rollout < 1) throw Error("bad-config", "rollout must be >= 1");
    if (value_coef < 0.0 || entropy_coef < 0.0) {
        throw Error("bad-config", "loss coefficients must be >= 0");
    }
    if (!(learning_rate > 0.0)) throw Error("bad-config", "learning_rate must be > 0");
    if (total_timesteps < 0) throw Error("bad-config", "total_timesteps must be >= 0");
    if (grad_clip < 0.0) throw Error("bad-config", "grad_clip must be >= 0");
}

std::size_t input_size(const TradingEnv& env) {
    const MarketState probe = env.observe();
    if (probe.window.empty()) {
        throw Error("bad-config", "environment has no feature frame to learn from");
    }
    return probe.window.size() + env.asset_count() + 1;
}

std::vector<double> state_to_input(const MarketState& state, const TradingEnv& env) {
    std::vector<double> input = state.window;
    // Portfolio status: cash fraction and per-asset position value fractions.
    const double equity = state.portfolio.equity;
    const double safe_equity = equity > 0.0 ? equity : 1.0;
    input.push_back(state.portfolio.cash / safe_equity);
    for (std::size_t i = 0; i < env.asset_count(); ++i) {
        input.push_back(static_cast<double>(state.portfolio.positions[i]) * env.close_price(i) /
                        safe_equity);
    }
    return input;
}

Trajectory collect_rollout(TradingEnv& env, const MlpParams& actor, const MlpParams& critic,
                           int horizon, Rng& rng) {
    if (env.done()) throw Error("env-misuse", "collect_rollout on a finished episode");
    Trajectory traj;
    for (int step = 0; step < horizon && !env.done(); ++step) {
        const MarketState state = env.observe();
        std::vector<double> input = state_to_input(state, env);
        const std::vector<double> probs = softmax(forward(actor, input));
        const ActionSample sample = sample_action(probs, rng);
        const double value = forward(critic, input)[0];

        StepResult result = env.step(ActionCode{static_cast<std::uint32_t>(sample.action)});
        traj.inputs.push_back(std::move(input));
        traj.actions.push_back(sample.action);
        traj.rewards.push_back(result.reward);
        traj.log_probs.push_back(sample.log_prob);
        traj.values.push_back(value);
        traj.entropies.push_back(entropy(probs));
    }
    traj.terminal = env.done();
    if (!traj.terminal) {
        const MarketState state = env.observe();
        traj.bootstrap_value = forward(critic, state_to_input(state, env))[0];
    }
    return traj;
}

std::vector<double> compute_returns(const Trajectory& traj, double gamma) {
    std::vector<double> returns(traj.size());
    double running = traj.terminal ? 0.0 : traj.bootstrap_value;
    for (std::size_t t = traj.size(); t-- > 0;) {
        running = traj.rewards[t] + gamma * running;
        returns[t] = running;
    }
    return returns;
}

std::vector<double> compute_advantages(const std::vector<double>& returns,
                                       const std::vector<double>& values) {
    if (returns.size() != values.size()) {
        throw Error("dim-mismatch", "returns and value estimates differ in length");
    }
    std::vector<double> adv(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t) adv[t] = returns[t] - values[t];
    return adv;
}

LossBreakdown compute_losses(const Trajectory& traj, const std::vector<double>& returns,
                             const std::vector<double>& advantages, const A2CConfig& config) {
    const std::size_t m = traj.size();
    LossBreakdown loss;
    for (std::size_t t = 0; t < m; ++t) {
        loss.policy_loss -= traj.log_probs[t] * advantages[t];
        const double err = traj.values[t] - returns[t];
        loss.value_loss += err * err;
        loss.entropy_loss -= traj.entropies[t];
    }
    if (m > 0) {
        loss.policy_loss /= static_cast<double>(m);
        loss.value_loss /= static_cast<double>(m);
        loss.entropy_loss /= static_cast<double>(m);
    }
    loss.total_loss = loss.policy_loss + config.value_coef * loss.value_loss +
                      config.entropy_coef * loss.entropy_loss;
    return loss;
}

LossBreakdown accumulate_gradients(const MlpParams& actor, const MlpParams& critic,
                                   const Trajectory& traj, const std::vector<double>& returns,
                                   const std::vector<double>& advantages, const A2CConfig& config,
                                   MlpGrads& actor_grads, MlpGrads& critic_grads) {
    const std::size_t m = traj.size();
    if (m == 0) throw Error("env-misuse", "cannot update from an empty trajectory");
    const double inv_m = 1.0 / static_cast<double>(m);
    LossBreakdown loss;

    for (std::size_t t = 0; t < m; ++t) {
        const auto& input = traj.inputs[t];

        // Actor: policy term with the advantage held constant, plus the
        // entropy bonus. d(-log p[a] * A)/dz_i = -A * (1[i==a] - p_i);
        // d(-H)/dz_i = p_i * (log p_i + H).
        ForwardCache actor_cache = forward_cached(actor, input);
        const std::vector<double> probs = softmax(actor_cache.output());
        const double h = entropy(probs);
        const std::size_t a = traj.actions[t];
        std::vector<double> upstream(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double indicator = i == a ? 1.0 : 0.0;
            const double d_policy = -advantages[t] * (indicator - probs[i]);
            const double log_p = probs[i] > 0.0 ? std::log(probs[i]) : 0.0;
            const double d_entropy = probs[i] * (log_p + h);
            upstream[i] = (d_policy + config.entropy_coef * d_entropy) * inv_m;
        }
        backward(actor, actor_cache, upstream, actor_grads);

        // Critic: c_v * (v - G)^2 averaged over the batch.
        ForwardCache critic_cache = forward_cached(critic, input);
        const double v = critic_cache.output()[0];
        const std::vector<double> critic_upstream = {config.value_coef * 2.0 * (v - returns[t]) *
                                                     inv_m};
        backward(critic, critic_cache, critic_upstream, critic_grads);

        loss.policy_loss -= std::log(probs[a]) * advantages[t];
        loss.value_loss += (v - returns[t]) * (v - returns[t]);
        loss.entropy_loss -= h;
    }
    loss.policy_loss *= inv_m;
    loss.value_loss *= inv_m;
    loss.entropy_loss *= inv_m;
    loss.total_loss = loss.policy_loss + config.value_coef * loss.value_loss +
                      config.entropy_coef * loss.entropy_loss;
    return loss;
}

namespace {

void clip_gradients(MlpGrads& grads, double max_norm) {
    if (max_norm <= 0.0) return;
    double sq = 0.0;
    for (const auto& w : grads.weights) {
        for (double v : w.data) sq += v * v;
    }
    for (const auto& b : grads.bias) {
        for (double v : b) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) grads.scale(max_norm / norm);
}

}  // namespace

namespace {

// Episode starts are drawn uniformly so long training budgets see many
// regimes rather than replaying the series front-to-back.
std::size_t draw_episode_start(const TradingEnv& env, Rng& rng) {
    const std::size_t w = static_cast<std::size_t>(env.config().window);
    const std::size_t data_len = env.data_length();
    if (data_len < w + 1) {
        throw Error("short-series", "data does not cover one window plus one step");
    }
    const std::size_t min_start = w - 1;
    const std::size_t max_start = data_len - 2;
    return min_start + static_cast<std::size_t>(rng.uniform_int(max_start - min_start + 1));
}

}  // namespace

TrainResult train(TradingEnv& env, const A2CConfig& config, const UpdateHook& hook) {
    config.validate();
    Rng rng(config.seed);

    const std::size_t in_dim = [&] {
        // Probe with a throwaway reset so observe() is valid.
        const std::size_t w = static_cast<std::size_t>(env.config().window);
        env.reset(w - 1, config.seed);
        return input_size(env);
    }();

    std::vector<std::size_t> actor_dims = {in_dim};
    std::vector<std::size_t> critic_dims = {in_dim};
    for (std::size_t hsize : config.hidden) {
        actor_dims.push_back(hsize);
        critic_dims.push_back(hsize);
    }
    actor_dims.push_back(env.action_space());
    critic_dims.push_back(1);

    TrainResult result;
    result.actor = make_mlp(actor_dims, rng);
    result.critic = make_mlp(critic_dims, rng);
    AdamState actor_opt = AdamState::init(result.actor, config.learning_rate);
    AdamState critic_opt = AdamState::init(result.critic, config.learning_rate);

    long long update_idx = 0;
    bool needs_reset = true;

    while (result.timesteps < config.total_timesteps) {
        if (needs_reset || env.done()) {
            env.reset(draw_episode_start(env, rng), config.seed);
            needs_reset = false;
        }
        // Any numeric failure mid-update (diverged parameters overflowing a
        // forward pass, non-finite loss, non-finite gradients) aborts the
        // run; the loss check and adam_step's gradient validation both fire
        // before parameters change, so the returned networks are the last
        // ones that produced a finite update.
        try {
            const int horizon = static_cast<int>(std::min<long long>(
                config.rollout, config.total_timesteps - result.timesteps));
            Trajectory traj = collect_rollout(env, result.actor, result.critic, horizon, rng);
            result.timesteps += static_cast<long long>(traj.size());

            std::vector<double> returns = compute_returns(traj, config.gamma);
            std::vector<double> advantages = compute_advantages(returns, traj.values);
            if (config.normalize_advantages && advantages.size() > 1) {
                double mean = 0.0;
                for (double a : advantages) mean += a;
                mean /= static_cast<double>(advantages.size());
                double var = 0.0;
                for (double a : advantages) var += (a - mean) * (a - mean);
                const double stddev = std::sqrt(var / static_cast<double>(advantages.size()));
                if (stddev > 0.0) {
                    for (double& a : advantages) a = (a - mean) / stddev;
                }
            }

            MlpGrads actor_grads = MlpGrads::zeros_like(result.actor);
            MlpGrads critic_grads = MlpGrads::zeros_like(result.critic);
            LossBreakdown loss = accumulate_gradients(result.actor, result.critic, traj, returns,
                                                      advantages, config, actor_grads,
                                                      critic_grads);
            if (!std::isfinite(loss.total_loss)) {
                throw Error("non-finite", "total loss is not finite");
            }
            clip_gradients(actor_grads, config.grad_clip);
            clip_gradients(critic_grads, config.grad_clip);
            adam_step(actor_opt, result.actor, actor_grads);
            adam_step(critic_opt, result.critic, critic_grads);

            update_idx += 1;
            double reward_sum = 0.0;
            for (double r : traj.rewards) reward_sum += r;
            TrainLogRow row;
            row.update_idx = update_idx;
            row.timesteps = result.timesteps;
            row.policy_loss = loss.policy_loss;
            row.value_loss = loss.value_loss;
            row.entropy = -loss.entropy_loss;
            row.mean_reward = reward_sum / static_cast<double>(traj.size());
            row.equity = env.equity();
            result.log.push_back(row);
            if (hook) hook(row, result.actor, result.critic);
        } catch (const Error& e) {
            result.aborted = true;
            result.abort_reason = e.what();
            break;
        }
    }
    return result;
}

void write_training_log(const std::vector<TrainLogRow>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("missing-file", "cannot write training log '" + path + "'");
    out << "update_idx,timesteps,policy_loss,value_loss,entropy,mean_reward,equity\n";
    for (const TrainLogRow& row : log) {
        out << row.update_idx << ',' << row.timesteps << ',' << format_double(row.policy_loss)
            << ',' << format_double(row.value_loss) << ',' << format_double(row.entropy) << ','
            << format_double(row.mean_reward) << ',' << format_double(row.equity) << '\n';
    }
}

}  // namespace qtmrl
