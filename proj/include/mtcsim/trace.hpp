#pragma once

#include <span>
#include <string>

#include "mtcsim/env.hpp"

namespace mtcsim {

// JSON-lines episode trace, one object per line. Types:
//   episode_start: episode, horizon, active device ids
//   slot:          episode, slot, transmitting ids, feedback bit,
//                  fresh arrivals (omitted when none)
//   episode_end:   episode, delivered packet count, ids still buffered
// Enough to replay the episode and recompute every metric from scratch.
class TraceWriter {
public:
    TraceWriter() = default;

    void enable() { enabled_ = true; }
    bool enabled() const { return enabled_; }

    void episode_start(int episode, int horizon, std::span<const int> active);
    void slot(int episode, int slot, const SlotOutcome& outcome,
              std::span<const int> arrivals);
    void episode_end(int episode, const Environment& env);

    const std::string& str() const { return buf_; }
    void write(const std::string& path) const;

private:
    bool enabled_ = false;
    std::string buf_;
};

}  // namespace mtcsim
