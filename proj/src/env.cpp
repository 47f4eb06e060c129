#include "mtcsim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mtcsim {

int EnvConfig::resolved_horizon() const {
    if (horizon > 0) return horizon;
    auto k = static_cast<int>(std::llround(4.0 * arrival_rate * n_devices));
    return std::max(1, k);
}

void EnvConfig::validate() const {
    if (n_devices <= 0) throw std::invalid_argument("n_devices must be positive");
    if (!(arrival_rate > 0.0) || arrival_rate > 1.0)
        throw std::invalid_argument("arrival_rate must be in (0, 1]");
    if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
    if (history_size <= 0) throw std::invalid_argument("history_size must be positive");
}

LocalHistory::LocalHistory(int h) : h_(h) {
    if (h <= 0) throw std::invalid_argument("history size must be positive");
    actions_.assign(static_cast<std::size_t>(h), 0);
    feedback_.assign(static_cast<std::size_t>(h), 0);
}

void LocalHistory::reset() {
    std::fill(actions_.begin(), actions_.end(), std::uint8_t{0});
    std::fill(feedback_.begin(), feedback_.end(), std::uint8_t{0});
    buffer_bit_ = 0;
}

void LocalHistory::push(bool action, bool feedback) {
    std::rotate(actions_.begin(), actions_.begin() + 1, actions_.end());
    std::rotate(feedback_.begin(), feedback_.begin() + 1, feedback_.end());
    actions_.back() = action ? 1 : 0;
    feedback_.back() = feedback ? 1 : 0;
}

void LocalHistory::set_buffer_bit(bool bit) { buffer_bit_ = bit ? 1 : 0; }

void LocalHistory::flatten(std::span<double> out) const {
    if (out.size() != static_cast<std::size_t>(flat_size()))
        throw std::invalid_argument("flatten: output span has wrong size");
    for (int i = 0; i < h_; ++i) {
        out[static_cast<std::size_t>(2 * i)] = actions_[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(2 * i + 1)] = feedback_[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(2 * h_)] = buffer_bit_;
}

std::vector<double> LocalHistory::flattened() const {
    std::vector<double> out(static_cast<std::size_t>(flat_size()));
    flatten(out);
    return out;
}

SlotOutcome resolve_slot(std::span<const std::uint8_t> actions,
                         std::span<const std::uint8_t> buffers) {
    if (actions.size() != buffers.size())
        throw std::invalid_argument("resolve_slot: actions/buffers size mismatch");
    const auto n = actions.size();
    SlotOutcome out;
    out.actions.assign(actions.begin(), actions.end());
    out.successes.assign(n, 0);
    out.collisions.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (actions[i] && !buffers[i])
            throw std::invalid_argument("resolve_slot: device " + std::to_string(i) +
                                        " transmitted with an empty buffer");
        out.transmit_count += actions[i] ? 1 : 0;
    }
    out.feedback = out.transmit_count >= 2 ? 0 : 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!actions[i]) continue;
        if (out.feedback)
            out.successes[i] = 1;
        else
            out.collisions[i] = 1;
    }
    return out;
}

Environment::Environment(EnvConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    horizon_ = cfg_.resolved_horizon();
    devices_.resize(static_cast<std::size_t>(cfg_.n_devices));
    for (auto& d : devices_) d.history = LocalHistory(cfg_.history_size);
    reset();
}

void Environment::reset() {
    for (auto& d : devices_) {
        d.buffer = 0;
        d.history.reset();
        d.buffered_slots = 0;
        d.success_count = 0;
    }
    packets_activated_ = 0;
    activation_clamps_ = 0;
}

std::vector<int> Environment::activate_episode(Rng& rng) {
    const int n = cfg_.n_devices;
    int draw = rng.poisson(cfg_.arrival_rate * n);
    if (draw > n) {
        draw = n;
        ++activation_clamps_;
    }
    auto active = rng.sample_without_replacement(n, draw);
    activate_devices(active);
    return active;
}

void Environment::activate_devices(std::span<const int> devices) {
    for (int id : devices) {
        auto& d = devices_.at(static_cast<std::size_t>(id));
        if (!d.buffer) {
            d.buffer = 1;
            d.history.set_buffer_bit(true);
            ++packets_activated_;
        }
    }
}

std::vector<int> Environment::step_arrivals(Rng& rng) {
    std::vector<int> fresh;
    // One draw per device regardless of buffer state, so the arrival stream
    // does not depend on which policy is driving the actions.
    for (int id = 0; id < cfg_.n_devices; ++id) {
        const bool arrived = rng.bernoulli(cfg_.arrival_rate);
        auto& d = devices_[static_cast<std::size_t>(id)];
        if (!arrived || d.buffer) continue;
        d.buffer = 1;
        d.history.reset();  // the device slept through the interim
        d.history.set_buffer_bit(true);
        ++packets_activated_;
        fresh.push_back(id);
    }
    return fresh;
}

SlotOutcome Environment::resolve(std::span<const std::uint8_t> actions) const {
    return resolve_slot(actions, buffers());
}

void Environment::commit_slot(const SlotOutcome& outcome) {
    if (outcome.actions.size() != devices_.size())
        throw std::invalid_argument("commit_slot: outcome size mismatch");
    // Which devices held a packet during the slot, before any drain.
    std::vector<std::uint8_t> held(devices_.size());
    for (std::size_t i = 0; i < devices_.size(); ++i) held[i] = devices_[i].buffer;

    for (std::size_t i = 0; i < devices_.size(); ++i) {
        auto& d = devices_[i];
        if (held[i]) ++d.buffered_slots;
        if (outcome.successes[i]) {
            d.buffer = 0;
            ++d.success_count;
        }
    }
    // Only devices that were part of the slot record it; sleepers keep their
    // zero history.
    for (std::size_t i = 0; i < devices_.size(); ++i) {
        if (!held[i]) continue;
        auto& d = devices_[i];
        d.history.push(outcome.actions[i] != 0, outcome.feedback != 0);
        d.history.set_buffer_bit(d.buffer != 0);
    }
}

LocalHistory Environment::observe(int device) const {
    const auto& d = devices_.at(static_cast<std::size_t>(device));
    if (!d.buffer) return LocalHistory(cfg_.history_size);  // zero-masked
    return d.history;
}

void Environment::observe_into(int device, std::span<double> out) const {
    const auto& d = devices_.at(static_cast<std::size_t>(device));
    if (!d.buffer) {
        std::fill(out.begin(), out.end(), 0.0);
        if (out.size() != static_cast<std::size_t>(d.history.flat_size()))
            throw std::invalid_argument("observe_into: output span has wrong size");
        return;
    }
    d.history.flatten(out);
}

const DeviceState& Environment::device(int n) const {
    return devices_.at(static_cast<std::size_t>(n));
}

std::vector<std::uint8_t> Environment::buffers() const {
    std::vector<std::uint8_t> out(devices_.size());
    for (std::size_t i = 0; i < devices_.size(); ++i) out[i] = devices_[i].buffer;
    return out;
}

}  // namespace mtcsim
