#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mtcsim/config.hpp"
#include "mtcsim/dqn.hpp"
#include "mtcsim/metrics.hpp"

namespace mtcsim {

enum class PolicyKind {
    Dqn,    // trained network
    Bnseb,  // binary (sigma = 2) asymmetric backoff
    Bseb,   // binary symmetric backoff
    Nseb,   // asymmetric backoff at the configured sigma
    Seb,    // symmetric backoff at the configured sigma
};

std::string policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);  // throws ConfigError
const std::vector<PolicyKind>& all_policies();

// Seed derivation. Evaluation arrivals depend only on (seed, N), so every
// policy evaluated under the same seed faces the same activation sequence;
// action sampling gets a per-policy stream. Training draws from disjoint
// substreams so test episodes are never the trained-on ones.
StreamSeeds train_seeds(std::uint64_t seed, int n_devices);
StreamSeeds eval_seeds(std::uint64_t seed, int n_devices, PolicyKind kind);

// Builds an actor for the given kind; `net` is required for PolicyKind::Dqn
// (evaluated at beta_end / epsilon_min) and ignored otherwise.
std::unique_ptr<AccessPolicy> make_policy(PolicyKind kind, const ExperimentConfig& cfg,
                                          const Mlp* net);

std::string checkpoint_filename(const ExperimentConfig& cfg);

struct TrainRun {
    TrainResult result;
    std::string checkpoint_path;
    std::string log_path;     // per-episode training curve CSV
    std::string config_path;  // resolved config, round-trippable
};

TrainRun run_train(const ExperimentConfig& cfg, const std::string& out_dir,
                   const std::function<void(const TrainEpisodeLog&)>& on_episode = {});

struct EvalRun {
    std::vector<EpisodeMetrics> episodes;
    std::string csv_path;
    std::string trace_path;  // empty when tracing is off
};

// Evaluates one policy for cfg.eval_episodes episodes and writes the
// per-episode metrics CSV. checkpoint_path is consulted only for Dqn.
EvalRun run_eval(const ExperimentConfig& cfg, PolicyKind kind,
                 const std::string& checkpoint_path, const std::string& out_dir,
                 bool trace_enabled);

struct CompareCell {
    PolicyKind kind;
    int n_devices = 0;
    std::vector<EpisodeMetrics> episodes;
};

struct CompareRun {
    std::vector<CompareCell> cells;  // device-count major, then policy order
    std::string csv_path;            // every (policy, N) pair, one row per episode
    std::string summary_path;        // per-(policy, N) mean / standard error table
    // Plot-ready series (x = device count, y = metric mean, one series per
    // policy): throughput, collision rate, mean delay, in that order.
    std::vector<std::string> plot_paths;
    std::vector<std::string> checkpoint_paths;  // one per device count when dqn runs
};

// Evaluates every policy in `kinds` at every configured device count under
// matched arrival seeds. For Dqn, loads checkpoint_path if given (single
// device count only), otherwise trains per device count and saves the
// checkpoints next to the other outputs.
CompareRun run_compare(const ExperimentConfig& cfg, std::vector<PolicyKind> kinds,
                       const std::string& checkpoint_path, const std::string& out_dir,
                       bool trace_enabled,
                       const std::function<void(const TrainEpisodeLog&)>& on_episode = {});

}  // namespace mtcsim
