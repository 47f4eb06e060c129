#include "mtcsim/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "mtcsim/ioutil.hpp"

namespace mtcsim {

void MetricsAccumulator::reset() {
    slots_ = 0;
    successes_ = 0;
    collision_slots_ = 0;
    feedback_sum_ = 0;
}

void MetricsAccumulator::record_slot(const SlotOutcome& outcome) {
    ++slots_;
    for (auto s : outcome.successes) successes_ += s;
    collision_slots_ += outcome.feedback == 0 ? 1 : 0;
    feedback_sum_ += outcome.feedback;
}

EpisodeMetrics MetricsAccumulator::finalize(const Environment& env, int episode) const {
    if (slots_ == 0) throw std::logic_error("finalize: no slots recorded");
    EpisodeMetrics m;
    m.episode = episode;
    m.horizon = slots_;
    const auto k = static_cast<double>(slots_);
    m.throughput = static_cast<double>(successes_) / k;
    m.collision_rate = literal_ ? static_cast<double>(feedback_sum_) / k
                                : static_cast<double>(collision_slots_) / k;
    double delay_sum = 0.0;
    for (const auto& d : env.devices()) {
        if (d.success_count > 0) {
            delay_sum += static_cast<double>(d.buffered_slots) /
                         static_cast<double>(d.success_count);
            ++m.delivered_devices;
        }
        m.undelivered_count += d.buffer ? 1 : 0;
    }
    m.mean_delay =
        m.delivered_devices > 0 ? delay_sum / static_cast<double>(m.delivered_devices) : 0.0;
    m.packets_activated = env.packets_activated();
    return m;
}

SummaryStats summarize(std::span<const double> xs) {
    SummaryStats s;
    s.count = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double sq = 0.0;
        for (double x : xs) sq += (x - s.mean) * (x - s.mean);
        s.std_dev = std::sqrt(sq / static_cast<double>(xs.size() - 1));
        s.std_err = s.std_dev / std::sqrt(static_cast<double>(xs.size()));
    }
    return s;
}

std::string metrics_csv_header() {
    return "run_id,policy,N,lambda_n,seed,episode,K,throughput,collision_rate,"
           "mean_delay,undelivered_count\n";
}

void append_metrics_row(std::string& out, const std::string& run_id,
                        const std::string& policy, int n_devices, double lambda_n,
                        std::uint64_t seed, const EpisodeMetrics& m) {
    out += run_id;
    out += ',';
    out += policy;
    out += ',';
    out += std::to_string(n_devices);
    out += ',';
    out += format_double(lambda_n);
    out += ',';
    out += std::to_string(seed);
    out += ',';
    out += std::to_string(m.episode);
    out += ',';
    out += std::to_string(m.horizon);
    out += ',';
    out += format_double(m.throughput);
    out += ',';
    out += format_double(m.collision_rate);
    out += ',';
    if (m.delivered_devices > 0) out += format_double(m.mean_delay);
    out += ',';
    out += std::to_string(m.undelivered_count);
    out += '\n';
}

}  // namespace mtcsim
