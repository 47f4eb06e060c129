#include "mtcsim/policies.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace mtcsim {

void EbConfig::validate() const {
    if (!(sigma > 1.0)) throw std::invalid_argument("sigma must be greater than 1");
    if (!(p_min > 0.0)) throw std::invalid_argument("p_min must be positive");
    if (!(p_max <= 1.0) || !(p_max > p_min))
        throw std::invalid_argument("p_max must satisfy p_min < p_max <= 1");
}

ExponentialBackoff::ExponentialBackoff(EbConfig cfg, int n_devices)
    : cfg_(cfg), n_devices_(n_devices) {
    cfg_.validate();
    if (n_devices <= 0) throw std::invalid_argument("n_devices must be positive");
    p_.assign(cfg_.symmetric ? 1 : static_cast<std::size_t>(n_devices), cfg_.p_max);
}

void ExponentialBackoff::reset() {
    std::fill(p_.begin(), p_.end(), cfg_.p_max);
}

double ExponentialBackoff::lower(double p) const {
    return std::max(p / cfg_.sigma, cfg_.p_min);
}

double ExponentialBackoff::raise(double p) const {
    return std::min(p * cfg_.sigma, cfg_.p_max);
}

double ExponentialBackoff::probability(int device) const {
    if (device < 0 || device >= n_devices_)
        throw std::out_of_range("probability: device index out of range");
    return cfg_.symmetric ? p_[0] : p_[static_cast<std::size_t>(device)];
}

bool ExponentialBackoff::act(int device, bool buffered, Rng& rng) const {
    if (!buffered) return false;
    return rng.bernoulli(probability(device));
}

void ExponentialBackoff::nseb_update(int device, bool collided) {
    auto& p = p_.at(static_cast<std::size_t>(device));
    p = collided ? lower(p) : cfg_.p_max;
}

void ExponentialBackoff::seb_update(bool collision_occurred) {
    p_[0] = collision_occurred ? lower(p_[0]) : raise(p_[0]);
}

void ExponentialBackoff::apply_outcome(const SlotOutcome& outcome) {
    if (cfg_.symmetric) {
        seb_update(outcome.feedback == 0);
        return;
    }
    // Per-device: only the devices that transmitted learn anything this slot.
    for (int i = 0; i < n_devices_; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!outcome.actions[idx]) continue;
        nseb_update(i, outcome.collisions[idx] != 0);
    }
}

EbPolicy::EbPolicy(std::string name, EbConfig cfg, int n_devices)
    : name_(std::move(name)), backoff_(cfg, n_devices) {}

void EbPolicy::begin_episode(const Environment&) { backoff_.reset(); }

void EbPolicy::decide(const Environment& env, std::span<std::uint8_t> actions,
                      Rng& rng) {
    for (int i = 0; i < env.n_devices(); ++i) {
        const bool buffered = env.device(i).buffer != 0;
        actions[static_cast<std::size_t>(i)] = backoff_.act(i, buffered, rng) ? 1 : 0;
    }
}

void EbPolicy::observe_outcome(const Environment&, const SlotOutcome& outcome) {
    backoff_.apply_outcome(outcome);
}

FixedProbabilityPolicy::FixedProbabilityPolicy(double p) : p_(p) {
    if (!(p >= 0.0) || !(p <= 1.0))
        throw std::invalid_argument("transmit probability must lie in [0, 1]");
}

void FixedProbabilityPolicy::decide(const Environment& env,
                                    std::span<std::uint8_t> actions, Rng& rng) {
    for (int i = 0; i < env.n_devices(); ++i) {
        const bool buffered = env.device(i).buffer != 0;
        actions[static_cast<std::size_t>(i)] =
            (buffered && rng.bernoulli(p_)) ? 1 : 0;
    }
}

}  // namespace mtcsim
