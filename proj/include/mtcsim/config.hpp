#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mtcsim/dqn.hpp"
#include "mtcsim/env.hpp"
#include "mtcsim/policies.hpp"

namespace mtcsim {

// A config problem tied to a specific key (unknown key, bad value, failed
// range check). The key is kept separate so the CLI can report it cleanly.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message),
          key_(std::move(key)) {}

    const std::string& key() const { return key_; }

private:
    std::string key_;
};

// Everything a run needs, flat. Parsed from `key = value` lines; unknown keys
// are errors, later duplicates win.
struct ExperimentConfig {
    // environment
    int n_devices = 50;
    // Device counts for comparison sweeps; empty means just n_devices.
    std::vector<int> n_devices_list = {};
    double arrival_rate = 0.05;
    int horizon = 0;  // 0 derives 4 * arrival_rate * n_devices
    int history_size = 5;
    bool per_slot_arrivals = false;

    // reward
    double rho = 0.2;
    double gamma = 0.9;

    // exponential backoff (the sigma=2 variants ignore sigma)
    double sigma = 2.0;
    double p_min = 0.001;
    double p_max = 0.9;

    // q-learning
    std::vector<int> hidden = {150, 100};
    double learning_rate = 1e-4;
    int batch_size = 8;
    int target_update = 100;
    int replay_capacity = 10000;
    int episodes = 50;  // training episodes
    double beta_start = 1.0;
    double beta_end = 15.0;
    double epsilon_start = 0.5;
    double epsilon_min = 0.1;

    // evaluation
    int eval_episodes = 50;
    bool collision_rate_literal = false;

    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError naming the offending key

    // n_devices_list when set, otherwise {n_devices}.
    std::vector<int> device_counts() const;
    // Copy with n_devices pinned to one sweep entry (list cleared).
    ExperimentConfig with_n_devices(int n) const;

    EnvConfig env_config() const;
    DqnConfig dqn_config() const;
    // sigma_override <= 0 means "use the configured sigma".
    EbConfig eb_config(bool symmetric, double sigma_override = 0.0) const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace mtcsim
