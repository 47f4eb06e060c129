#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtcsim/env.hpp"

namespace mtcsim {

struct EpisodeMetrics {
    int episode = 0;
    int horizon = 0;
    double throughput = 0.0;      // delivered packets per slot
    double collision_rate = 0.0;  // collision slots per slot (see literal flag)
    double mean_delay = 0.0;      // buffered slots per delivery, delivering devices only
    int delivered_devices = 0;
    int undelivered_count = 0;    // devices still holding a packet at the end
    int packets_activated = 0;
    double cumulative_reward = 0.0;
};

// Per-slot tallies for one episode. The collision rate counts slots whose
// broadcast feedback reported a collision; with literal_feedback_rate it
// instead averages the feedback bit itself (which rewards idle slots too).
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(bool literal_feedback_rate = false)
        : literal_(literal_feedback_rate) {}

    void reset();
    void record_slot(const SlotOutcome& outcome);
    EpisodeMetrics finalize(const Environment& env, int episode) const;

    int slots() const { return slots_; }

private:
    bool literal_ = false;
    int slots_ = 0;
    long long successes_ = 0;
    long long collision_slots_ = 0;
    long long feedback_sum_ = 0;
};

struct SummaryStats {
    double mean = 0.0;
    double std_dev = 0.0;   // sample standard deviation
    double std_err = 0.0;
    int count = 0;
};

SummaryStats summarize(std::span<const double> xs);

// CSV with one row per evaluated episode. The mean_delay field is left empty
// when no device delivered (the per-delivery average has no value then).
std::string metrics_csv_header();
void append_metrics_row(std::string& out, const std::string& run_id,
                        const std::string& policy, int n_devices, double lambda_n,
                        std::uint64_t seed, const EpisodeMetrics& m);

}  // namespace mtcsim
