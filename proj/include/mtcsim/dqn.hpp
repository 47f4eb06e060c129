#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mtcsim/env.hpp"
#include "mtcsim/metrics.hpp"
#include "mtcsim/nn.hpp"
#include "mtcsim/policies.hpp"
#include "mtcsim/rng.hpp"
#include "mtcsim/trace.hpp"

namespace mtcsim {

struct RewardConfig {
    double rho = 0.2;    // collision penalty weight
    double gamma = 0.9;  // discount

    void validate() const;
};

// Shared reward for the slot: total successes minus rho times the number of
// colliding devices. Every agent receives the same value.
double compute_reward(const SlotOutcome& outcome, const RewardConfig& cfg);

// Linear annealing over training episodes: beta (softmax inverse temperature)
// ramps up while epsilon (uniform exploration mass) ramps down. Endpoints are
// inclusive; episode indices outside the range clamp.
struct ExplorationSchedule {
    double beta_start = 1.0;
    double beta_end = 15.0;
    double epsilon_start = 0.5;
    double epsilon_min = 0.1;
    int episodes = 50;

    double beta_at(int episode) const;
    double epsilon_at(int episode) const;
    void validate() const;
};

struct ActionDistribution {
    double p_wait = 0.0;
    double p_transmit = 0.0;
};

// Softmax over the two Q-values at inverse temperature beta, mixed with a
// uniform epsilon floor: w(a) = (softmax_beta(a) + epsilon/2) / (1 + epsilon).
// Both probabilities are positive and sum to one for any finite inputs.
ActionDistribution action_distribution(double q_wait, double q_transmit, double beta,
                                       double epsilon);

// Samples 0 (wait) or 1 (transmit) from that distribution.
int select_action(double q_wait, double q_transmit, double beta, double epsilon,
                  Rng& rng);

struct ReplayTransition {
    std::vector<double> state;
    std::vector<double> next_state;
    int action = 0;
    double reward = 0.0;
    bool terminal = false;  // the device delivered its packet this slot
};

// Fixed-capacity FIFO; pushing past capacity evicts the oldest entry.
// Sampling is uniform with replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return items_.size(); }
    std::uint64_t total_pushed() const { return pushed_; }

    void push(ReplayTransition t);
    const ReplayTransition& at(std::size_t i) const;  // 0 = oldest surviving

    std::vector<std::size_t> sample(int count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::vector<ReplayTransition> items_;  // ring
    std::size_t head_ = 0;                 // index of the oldest entry
    std::uint64_t pushed_ = 0;
};

// r + gamma * max_a Q(next_state, a; target) for non-terminal transitions,
// plain r for terminal ones.
double td_target(double reward, std::span<const double> next_state,
                 const Mlp& target_net, double gamma, bool terminal);

struct DqnConfig {
    RewardConfig reward;
    ExplorationSchedule schedule;
    std::vector<int> hidden = {150, 100};
    double learning_rate = 1e-4;
    int batch_size = 8;
    int target_update = 100;     // optimizer steps between target syncs
    int replay_capacity = 10000;
    int episodes = 50;

    void validate() const;
};

struct TrainEpisodeLog {
    int episode = 0;
    double cumulative_reward = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    double mean_loss = 0.0;  // over this episode's optimizer steps
    int optimizer_steps = 0;
};

struct TrainResult {
    Mlp net;
    std::vector<TrainEpisodeLog> log;
};

struct StreamSeeds {
    std::uint64_t arrivals = 0;  // device activations, shared across policies
    std::uint64_t policy = 0;    // action sampling
    std::uint64_t train = 0;     // weight init and minibatch sampling
};

// Full training run: one shared network acting for every device, transitions
// from all devices (idle ones included, with zero states) pushed each slot,
// one minibatch update per slot once the buffer holds a batch, and a frozen
// target network refreshed every target_update steps.
TrainResult train(const EnvConfig& env_cfg, const DqnConfig& cfg,
                  const StreamSeeds& seeds,
                  const std::function<void(const TrainEpisodeLog&)>& on_episode = {});

// Greedy-ish actor around a trained network at fixed beta and epsilon.
class DqnPolicy final : public AccessPolicy {
public:
    DqnPolicy(Mlp net, double beta, double epsilon);

    std::string name() const override { return "dqn"; }
    void begin_episode(const Environment& env) override;
    void decide(const Environment& env, std::span<std::uint8_t> actions,
                Rng& rng) override;
    void observe_outcome(const Environment&, const SlotOutcome&) override {}

    const Mlp& net() const { return net_; }

private:
    Mlp net_;
    double beta_;
    double epsilon_;
    std::vector<double> state_;
    std::vector<double> q_;
};

// One evaluation episode under any policy: activation, the slot loop, metric
// and optional trace recording. The environment is reset first.
EpisodeMetrics run_episode(Environment& env, AccessPolicy& policy, int episode,
                           Rng& arrival_rng, Rng& policy_rng,
                           const RewardConfig& reward, bool literal_collision_rate,
                           TraceWriter* trace);

std::vector<EpisodeMetrics> evaluate(AccessPolicy& policy, const EnvConfig& env_cfg,
                                     int episodes, Rng& arrival_rng, Rng& policy_rng,
                                     const RewardConfig& reward,
                                     bool literal_collision_rate, TraceWriter* trace);

}  // namespace mtcsim
