#include "mtcsim/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace mtcsim {

void RewardConfig::validate() const {
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be non-negative");
    if (!(gamma >= 0.0) || !(gamma < 1.0))
        throw std::invalid_argument("gamma must be in [0, 1)");
}

double compute_reward(const SlotOutcome& outcome, const RewardConfig& cfg) {
    int successes = 0;
    int collisions = 0;
    for (auto s : outcome.successes) successes += s;
    for (auto c : outcome.collisions) collisions += c;
    return static_cast<double>(successes) - cfg.rho * static_cast<double>(collisions);
}

void ExplorationSchedule::validate() const {
    if (!(beta_start > 0.0) || !(beta_end > 0.0))
        throw std::invalid_argument("beta must be positive");
    if (!(epsilon_start >= 0.0) || !(epsilon_min >= 0.0) ||
        epsilon_min > epsilon_start)
        throw std::invalid_argument("epsilon schedule must be non-negative and non-increasing");
    if (episodes <= 0) throw std::invalid_argument("schedule episodes must be positive");
}

namespace {

double lerp_over_episodes(double from, double to, int episode, int episodes) {
    if (episodes <= 1) return from;
    const int e = std::clamp(episode, 0, episodes - 1);
    const double t = static_cast<double>(e) / static_cast<double>(episodes - 1);
    return from + t * (to - from);
}

}  // namespace

double ExplorationSchedule::beta_at(int episode) const {
    return lerp_over_episodes(beta_start, beta_end, episode, episodes);
}

double ExplorationSchedule::epsilon_at(int episode) const {
    return lerp_over_episodes(epsilon_start, epsilon_min, episode, episodes);
}

ActionDistribution action_distribution(double q_wait, double q_transmit, double beta,
                                       double epsilon) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
    const double top = std::max(q_wait, q_transmit);
    const double ew = std::exp(beta * (q_wait - top));
    const double et = std::exp(beta * (q_transmit - top));
    const double z = ew + et;
    ActionDistribution d;
    d.p_wait = (ew / z + epsilon / 2.0) / (1.0 + epsilon);
    d.p_transmit = (et / z + epsilon / 2.0) / (1.0 + epsilon);
    return d;
}

int select_action(double q_wait, double q_transmit, double beta, double epsilon,
                  Rng& rng) {
    const auto d = action_distribution(q_wait, q_transmit, beta, epsilon);
    return rng.uniform() < d.p_transmit ? 1 : 0;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    items_.reserve(capacity);
}

void ReplayBuffer::push(ReplayTransition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
    ++pushed_;
}

const ReplayTransition& ReplayBuffer::at(std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("replay index out of range");
    return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample(int count, Rng& rng) const {
    if (count <= 0 || items_.empty())
        throw std::invalid_argument("sample needs a positive count and a non-empty buffer");
    std::vector<std::size_t> out(static_cast<std::size_t>(count));
    for (auto& idx : out)
        idx = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(items_.size())));
    return out;
}

double td_target(double reward, std::span<const double> next_state,
                 const Mlp& target_net, double gamma, bool terminal) {
    if (terminal) return reward;
    double q[2];
    target_net.forward(next_state, q);
    return reward + gamma * std::max(q[0], q[1]);
}

void DqnConfig::validate() const {
    reward.validate();
    schedule.validate();
    for (int w : hidden)
        if (w <= 0) throw std::invalid_argument("hidden layer sizes must be positive");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("learning_rate must be positive");
    if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
    if (target_update <= 0) throw std::invalid_argument("target_update must be positive");
    if (replay_capacity < batch_size)
        throw std::invalid_argument("replay_capacity must be at least batch_size");
    if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
}

TrainResult train(const EnvConfig& env_cfg, const DqnConfig& cfg,
                  const StreamSeeds& seeds,
                  const std::function<void(const TrainEpisodeLog&)>& on_episode) {
    env_cfg.validate();
    cfg.validate();
    Environment env(env_cfg);
    const int n = env.n_devices();
    const int in_dim = 2 * env_cfg.history_size + 1;

    Rng arrival_rng(seeds.arrivals);
    Rng policy_rng(seeds.policy);
    Rng train_rng(seeds.train);

    std::vector<int> dims;
    dims.push_back(in_dim);
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(2);
    Mlp net = Mlp::fan_in_init(dims, train_rng);
    Mlp target = net;
    AdamOptimizer opt({.learning_rate = cfg.learning_rate}, net.parameter_count());
    ReplayBuffer replay(static_cast<std::size_t>(cfg.replay_capacity));

    const auto stride = static_cast<std::size_t>(in_dim);
    std::vector<double> states(static_cast<std::size_t>(n) * stride);
    std::vector<double> next_states(static_cast<std::size_t>(n) * stride);
    std::vector<std::uint8_t> actions(static_cast<std::size_t>(n));
    double q[2];

    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    std::vector<double> batch_states(batch * stride);
    std::vector<int> batch_actions(batch);
    std::vector<double> batch_targets(batch);
    std::vector<double> grad(net.parameter_count());
    Mlp::Workspace ws;

    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(cfg.episodes));

    for (int episode = 0; episode < cfg.episodes; ++episode) {
        env.reset();
        env.activate_episode(arrival_rng);
        const double beta = cfg.schedule.beta_at(episode);
        const double epsilon = cfg.schedule.epsilon_at(episode);

        double cumulative = 0.0;
        double loss_sum = 0.0;
        int steps = 0;

        for (int slot = 0; slot < env.horizon(); ++slot) {
            if (env_cfg.per_slot_arrivals) env.step_arrivals(arrival_rng);

            for (int dev = 0; dev < n; ++dev) {
                auto row = std::span(states).subspan(static_cast<std::size_t>(dev) * stride, stride);
                env.observe_into(dev, row);
                if (env.device(dev).buffer) {
                    net.forward(row, q);
                    actions[static_cast<std::size_t>(dev)] = static_cast<std::uint8_t>(
                        select_action(q[0], q[1], beta, epsilon, policy_rng));
                } else {
                    actions[static_cast<std::size_t>(dev)] = 0;
                }
            }

            const SlotOutcome outcome = env.resolve(actions);
            const double reward = compute_reward(outcome, cfg.reward);
            cumulative += reward;
            env.commit_slot(outcome);

            for (int dev = 0; dev < n; ++dev) {
                auto row = std::span(next_states)
                               .subspan(static_cast<std::size_t>(dev) * stride, stride);
                env.observe_into(dev, row);
            }

            // Every device contributes a transition, including the ones that
            // slept through the slot with a zero state.
            for (int dev = 0; dev < n; ++dev) {
                const auto d = static_cast<std::size_t>(dev);
                ReplayTransition t;
                t.state.assign(states.begin() + static_cast<std::ptrdiff_t>(d * stride),
                               states.begin() + static_cast<std::ptrdiff_t>((d + 1) * stride));
                t.next_state.assign(
                    next_states.begin() + static_cast<std::ptrdiff_t>(d * stride),
                    next_states.begin() + static_cast<std::ptrdiff_t>((d + 1) * stride));
                t.action = actions[d];
                t.reward = reward;
                t.terminal = outcome.successes[d] != 0;
                replay.push(std::move(t));
            }

            if (replay.size() >= batch) {
                const auto picks = replay.sample(cfg.batch_size, train_rng);
                for (std::size_t i = 0; i < batch; ++i) {
                    const auto& t = replay.at(picks[i]);
                    std::copy(t.state.begin(), t.state.end(),
                              batch_states.begin() + static_cast<std::ptrdiff_t>(i * stride));
                    batch_actions[i] = t.action;
                    batch_targets[i] = td_target(t.reward, t.next_state, target,
                                                 cfg.reward.gamma, t.terminal);
                }
                loss_sum += mse_backward(net, batch_states, cfg.batch_size, batch_actions,
                                         batch_targets, grad, ws);
                opt.step(net, grad);
                ++steps;
                if (opt.step_count() % static_cast<std::uint64_t>(cfg.target_update) == 0)
                    target = net;
            }
        }

        TrainEpisodeLog log;
        log.episode = episode;
        log.cumulative_reward = cumulative;
        log.beta = beta;
        log.epsilon = epsilon;
        log.mean_loss = steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
        log.optimizer_steps = steps;
        result.log.push_back(log);
        if (on_episode) on_episode(log);
    }

    result.net = std::move(net);
    return result;
}

DqnPolicy::DqnPolicy(Mlp net, double beta, double epsilon)
    : net_(std::move(net)), beta_(beta), epsilon_(epsilon) {
    if (net_.output_size() != 2)
        throw std::invalid_argument("action-value network must have two outputs");
    state_.resize(static_cast<std::size_t>(net_.input_size()));
    q_.resize(2);
}

void DqnPolicy::begin_episode(const Environment& env) {
    const int expect = 2 * env.config().history_size + 1;
    if (expect != net_.input_size())
        throw std::invalid_argument("network input does not match the history size");
}

void DqnPolicy::decide(const Environment& env, std::span<std::uint8_t> actions,
                       Rng& rng) {
    for (int dev = 0; dev < env.n_devices(); ++dev) {
        if (!env.device(dev).buffer) {
            actions[static_cast<std::size_t>(dev)] = 0;
            continue;
        }
        env.observe_into(dev, state_);
        net_.forward(state_, q_);
        actions[static_cast<std::size_t>(dev)] =
            static_cast<std::uint8_t>(select_action(q_[0], q_[1], beta_, epsilon_, rng));
    }
}

EpisodeMetrics run_episode(Environment& env, AccessPolicy& policy, int episode,
                           Rng& arrival_rng, Rng& policy_rng,
                           const RewardConfig& reward, bool literal_collision_rate,
                           TraceWriter* trace) {
    env.reset();
    const auto active = env.activate_episode(arrival_rng);
    policy.begin_episode(env);
    if (trace) trace->episode_start(episode, env.horizon(), active);

    MetricsAccumulator acc(literal_collision_rate);
    std::vector<std::uint8_t> actions(static_cast<std::size_t>(env.n_devices()));
    std::vector<int> fresh;
    double cumulative = 0.0;

    for (int slot = 0; slot < env.horizon(); ++slot) {
        fresh.clear();
        if (env.config().per_slot_arrivals) fresh = env.step_arrivals(arrival_rng);
        policy.decide(env, actions, policy_rng);
        const SlotOutcome outcome = env.resolve(actions);
        cumulative += compute_reward(outcome, reward);
        acc.record_slot(outcome);
        if (trace) trace->slot(episode, slot, outcome, fresh);
        env.commit_slot(outcome);
        policy.observe_outcome(env, outcome);
    }

    auto metrics = acc.finalize(env, episode);
    metrics.cumulative_reward = cumulative;
    if (trace) trace->episode_end(episode, env);
    return metrics;
}

std::vector<EpisodeMetrics> evaluate(AccessPolicy& policy, const EnvConfig& env_cfg,
                                     int episodes, Rng& arrival_rng, Rng& policy_rng,
                                     const RewardConfig& reward,
                                     bool literal_collision_rate, TraceWriter* trace) {
    env_cfg.validate();
    if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
    Environment env(env_cfg);
    std::vector<EpisodeMetrics> out;
    out.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e)
        out.push_back(run_episode(env, policy, e, arrival_rng, policy_rng, reward,
                                  literal_collision_rate, trace));
    return out;
}

}  // namespace mtcsim
