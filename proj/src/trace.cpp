#include "mtcsim/trace.hpp"

#include <json.hpp>

#include "mtcsim/ioutil.hpp"

namespace mtcsim {

void TraceWriter::episode_start(int episode, int horizon, std::span<const int> active) {
    if (!enabled_) return;
    nlohmann::json j;
    j["type"] = "episode_start";
    j["episode"] = episode;
    j["horizon"] = horizon;
    j["active"] = std::vector<int>(active.begin(), active.end());
    buf_ += j.dump();
    buf_ += '\n';
}

void TraceWriter::slot(int episode, int slot, const SlotOutcome& outcome,
                       std::span<const int> arrivals) {
    if (!enabled_) return;
    nlohmann::json j;
    j["type"] = "slot";
    j["episode"] = episode;
    j["slot"] = slot;
    std::vector<int> tx;
    for (std::size_t i = 0; i < outcome.actions.size(); ++i)
        if (outcome.actions[i]) tx.push_back(static_cast<int>(i));
    j["tx"] = tx;
    j["feedback"] = static_cast<int>(outcome.feedback);
    if (!arrivals.empty())
        j["arrivals"] = std::vector<int>(arrivals.begin(), arrivals.end());
    buf_ += j.dump();
    buf_ += '\n';
}

void TraceWriter::episode_end(int episode, const Environment& env) {
    if (!enabled_) return;
    nlohmann::json j;
    j["type"] = "episode_end";
    j["episode"] = episode;
    int delivered = 0;
    std::vector<int> undelivered;
    for (int i = 0; i < env.n_devices(); ++i) {
        delivered += env.device(i).success_count;
        if (env.device(i).buffer) undelivered.push_back(i);
    }
    j["delivered"] = delivered;
    j["undelivered"] = undelivered;
    buf_ += j.dump();
    buf_ += '\n';
}

void TraceWriter::write(const std::string& path) const {
    atomic_write_file(path, buf_);
}

}  // namespace mtcsim
