#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtcsim/rng.hpp"

namespace mtcsim {

struct EnvConfig {
    int n_devices = 0;           // N
    double arrival_rate = 0.05;  // lambda_n per device, in (0, 1]
    int horizon = 0;             // K; 0 derives round(4 * lambda_n * N), at least 1
    int history_size = 5;        // h
    // Bernoulli(lambda_n) arrivals every slot on top of the episode-start
    // activation. Off by default: the standard protocol activates devices
    // only when an episode begins.
    bool per_slot_arrivals = false;

    int resolved_horizon() const;
    void validate() const;  // throws std::invalid_argument naming the field
};

// Rolling window of the last h (action, feedback) pairs plus the device's
// buffer bit. Flattened oldest-first to 2h+1 values; this is the network
// input. Contains nothing that identifies the device.
class LocalHistory {
public:
    LocalHistory() = default;
    explicit LocalHistory(int h);

    void reset();
    // Drops the oldest pair and appends (action, feedback) as the newest.
    void push(bool action, bool feedback);
    void set_buffer_bit(bool bit);

    int size() const { return h_; }
    int flat_size() const { return 2 * h_ + 1; }
    bool action_at(int i) const { return actions_[static_cast<std::size_t>(i)] != 0; }
    bool feedback_at(int i) const { return feedback_[static_cast<std::size_t>(i)] != 0; }
    bool buffer_bit() const { return buffer_bit_ != 0; }

    void flatten(std::span<double> out) const;
    std::vector<double> flattened() const;

    bool operator==(const LocalHistory&) const = default;

private:
    int h_ = 0;
    std::vector<std::uint8_t> actions_;   // index 0 = oldest
    std::vector<std::uint8_t> feedback_;
    std::uint8_t buffer_bit_ = 0;
};

struct DeviceState {
    std::uint8_t buffer = 0;  // at most one packet
    LocalHistory history;
    int buffered_slots = 0;  // slots spent with a packet in the buffer
    int success_count = 0;   // packets delivered
};

struct SlotOutcome {
    std::vector<std::uint8_t> actions;
    std::vector<std::uint8_t> successes;
    std::vector<std::uint8_t> collisions;
    std::uint8_t feedback = 1;  // 0 on collision, 1 otherwise (broadcast)
    int transmit_count = 0;
};

// Collision-channel rule for one slot: a single transmission succeeds, two or
// more collide, and the one-bit feedback is broadcast to everyone. Throws
// std::invalid_argument if a device transmits with an empty buffer (that is a
// policy-layer bug, not a channel event).
SlotOutcome resolve_slot(std::span<const std::uint8_t> actions,
                         std::span<const std::uint8_t> buffers);

class Environment {
public:
    explicit Environment(EnvConfig cfg);

    const EnvConfig& config() const { return cfg_; }
    int n_devices() const { return cfg_.n_devices; }
    int horizon() const { return horizon_; }

    // All buffers empty, all histories zero, per-episode counters cleared.
    void reset();

    // Draws N_a ~ Poisson(lambda_n * N), clamped to N, and activates that
    // many distinct devices chosen uniformly at random. Returns the active
    // set. Expects a freshly reset environment.
    std::vector<int> activate_episode(Rng& rng);

    // Gives each listed device a packet. Used by activate_episode and by
    // scripted scenarios.
    void activate_devices(std::span<const int> devices);

    // Per-slot arrival mode only: one Bernoulli(lambda_n) draw per device
    // (every device, so the stream is policy-independent); empty-buffer
    // devices that draw true wake with a packet and a zeroed history.
    // Returns the newly activated devices.
    std::vector<int> step_arrivals(Rng& rng);

    SlotOutcome resolve(std::span<const std::uint8_t> actions) const;

    // End-of-slot bookkeeping: buffered-slot counters (success slot
    // included), buffer drain on success, history shift with the new
    // (action, feedback) pair for every device that held a packet this slot.
    void commit_slot(const SlotOutcome& outcome);

    // The device's local history, zero-masked when its buffer is empty.
    LocalHistory observe(int device) const;
    // Same, flattened into out (size 2h+1); the hot path for the agent loop.
    void observe_into(int device, std::span<double> out) const;

    const DeviceState& device(int n) const;
    const std::vector<DeviceState>& devices() const { return devices_; }
    std::vector<std::uint8_t> buffers() const;

    int packets_activated() const { return packets_activated_; }
    // Number of Poisson draws that exceeded N and were clamped (diagnostic).
    int activation_clamps() const { return activation_clamps_; }

private:
    EnvConfig cfg_;
    int horizon_ = 0;
    std::vector<DeviceState> devices_;
    int packets_activated_ = 0;
    int activation_clamps_ = 0;
};

}  // namespace mtcsim
