#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtcsim/env.hpp"
#include "mtcsim/rng.hpp"

namespace mtcsim {

struct EbConfig {
    double sigma = 2.0;    // backoff factor, > 1
    double p_min = 0.001;
    double p_max = 0.9;
    // Symmetric: one shared probability driven by the broadcast feedback.
    // Asymmetric: per-device probabilities driven by each device's own
    // collisions and successes.
    bool symmetric = false;

    void validate() const;
};

// Exponential backoff over transmission probabilities.
//
// Asymmetric (nSEB): each device halts at p/sigma after a collision of its
// own and snaps back to p_max after delivering; devices that stayed silent
// keep their probability.
//
// Symmetric (SEB): a single probability shared by everyone, updated from the
// broadcast feedback every slot, so it decays on any collision and recovers
// otherwise, whether or not a given device transmitted.
class ExponentialBackoff {
public:
    ExponentialBackoff(EbConfig cfg, int n_devices);

    const EbConfig& config() const { return cfg_; }

    void reset();  // everyone back to p_max

    double probability(int device) const;

    bool act(int device, bool buffered, Rng& rng) const;

    // Applies one slot's outcome to the probabilities.
    void apply_outcome(const SlotOutcome& outcome);

    // The two primitive updates, exposed for direct testing.
    void nseb_update(int device, bool collided);
    void seb_update(bool collision_occurred);

private:
    EbConfig cfg_;
    int n_devices_;
    std::vector<double> p_;  // size 1 when symmetric
    double lower(double p) const;
    double raise(double p) const;
};

// A per-episode actor: decides the action vector each slot and hears the
// broadcast outcome afterwards.
class AccessPolicy {
public:
    virtual ~AccessPolicy() = default;
    virtual std::string name() const = 0;
    virtual void begin_episode(const Environment& env) = 0;
    virtual void decide(const Environment& env, std::span<std::uint8_t> actions,
                        Rng& rng) = 0;
    virtual void observe_outcome(const Environment& env, const SlotOutcome& outcome) = 0;
};

class EbPolicy final : public AccessPolicy {
public:
    EbPolicy(std::string name, EbConfig cfg, int n_devices);

    std::string name() const override { return name_; }
    void begin_episode(const Environment& env) override;
    void decide(const Environment& env, std::span<std::uint8_t> actions,
                Rng& rng) override;
    void observe_outcome(const Environment& env, const SlotOutcome& outcome) override;

    const ExponentialBackoff& backoff() const { return backoff_; }

private:
    std::string name_;
    ExponentialBackoff backoff_;
};

// Transmits with a fixed probability whenever buffered. The no-learning
// control in tests.
class FixedProbabilityPolicy final : public AccessPolicy {
public:
    explicit FixedProbabilityPolicy(double p);

    std::string name() const override { return "fixed"; }
    void begin_episode(const Environment&) override {}
    void decide(const Environment& env, std::span<std::uint8_t> actions,
                Rng& rng) override;
    void observe_outcome(const Environment&, const SlotOutcome&) override {}

private:
    double p_;
};

}  // namespace mtcsim
