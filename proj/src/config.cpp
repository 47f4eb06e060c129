#include "mtcsim/config.hpp"

#include <charconv>
#include <climits>
#include <cstdlib>

#include "mtcsim/ioutil.hpp"

namespace mtcsim {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

long long parse_ll(const std::string& key, std::string_view v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
    return out;
}

int parse_int(const std::string& key, std::string_view v) {
    const auto ll = parse_ll(key, v);
    if (ll < INT_MIN || ll > INT_MAX) throw ConfigError(key, "integer out of range");
    return static_cast<int>(ll);
}

std::uint64_t parse_u64(const std::string& key, std::string_view v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(key, "expected an unsigned integer, got '" + std::string(v) + "'");
    return out;
}

double parse_double(const std::string& key, std::string_view v) {
    // strtod via a copy: from_chars<double> handles no hex-free locale quirks
    // but GCC 11 supports it; still, the copy keeps the null terminator simple.
    const std::string s(v);
    char* end = nullptr;
    const double out = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
        throw ConfigError(key, "expected a number, got '" + std::string(v) + "'");
    return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key, "expected true/false, got '" + std::string(v) + "'");
}

std::vector<int> parse_int_list(const std::string& key, std::string_view v) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        auto comma = v.find(',', start);
        if (comma == std::string_view::npos) comma = v.size();
        const auto item = trim(v.substr(start, comma - start));
        if (item.empty()) throw ConfigError(key, "empty list entry");
        out.push_back(parse_int(key, item));
        start = comma + 1;
    }
    return out;
}

std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(xs[i]);
    }
    return out;
}

void apply(ExperimentConfig& cfg, const std::string& key, std::string_view value) {
    if (key == "n_devices") cfg.n_devices = parse_int(key, value);
    else if (key == "n_devices_list") cfg.n_devices_list = parse_int_list(key, value);
    else if (key == "arrival_rate") cfg.arrival_rate = parse_double(key, value);
    else if (key == "horizon") cfg.horizon = parse_int(key, value);
    else if (key == "history_size") cfg.history_size = parse_int(key, value);
    else if (key == "per_slot_arrivals") cfg.per_slot_arrivals = parse_bool(key, value);
    else if (key == "rho") cfg.rho = parse_double(key, value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "sigma") cfg.sigma = parse_double(key, value);
    else if (key == "p_min") cfg.p_min = parse_double(key, value);
    else if (key == "p_max") cfg.p_max = parse_double(key, value);
    else if (key == "hidden") cfg.hidden = parse_int_list(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
    else if (key == "target_update") cfg.target_update = parse_int(key, value);
    else if (key == "replay_capacity") cfg.replay_capacity = parse_int(key, value);
    else if (key == "episodes") cfg.episodes = parse_int(key, value);
    else if (key == "beta_start") cfg.beta_start = parse_double(key, value);
    else if (key == "beta_end") cfg.beta_end = parse_double(key, value);
    else if (key == "epsilon_start") cfg.epsilon_start = parse_double(key, value);
    else if (key == "epsilon_min") cfg.epsilon_min = parse_double(key, value);
    else if (key == "eval_episodes") cfg.eval_episodes = parse_int(key, value);
    else if (key == "collision_rate_literal")
        cfg.collision_rate_literal = parse_bool(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else throw ConfigError(key, "unknown key");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("", "line " + std::to_string(line_no) +
                                      ": expected key = value");
        const std::string key{trim(line.substr(0, eq))};
        const auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
        apply(cfg, key, value);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_file(path));
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    auto kv = [&out](std::string_view k, const std::string& v) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    };
    kv("n_devices", std::to_string(cfg.n_devices));
    if (!cfg.n_devices_list.empty()) kv("n_devices_list", join_ints(cfg.n_devices_list));
    kv("arrival_rate", format_double(cfg.arrival_rate));
    kv("horizon", std::to_string(cfg.horizon));
    kv("history_size", std::to_string(cfg.history_size));
    kv("per_slot_arrivals", cfg.per_slot_arrivals ? "true" : "false");
    kv("rho", format_double(cfg.rho));
    kv("gamma", format_double(cfg.gamma));
    kv("sigma", format_double(cfg.sigma));
    kv("p_min", format_double(cfg.p_min));
    kv("p_max", format_double(cfg.p_max));
    kv("hidden", join_ints(cfg.hidden));
    kv("learning_rate", format_double(cfg.learning_rate));
    kv("batch_size", std::to_string(cfg.batch_size));
    kv("target_update", std::to_string(cfg.target_update));
    kv("replay_capacity", std::to_string(cfg.replay_capacity));
    kv("episodes", std::to_string(cfg.episodes));
    kv("beta_start", format_double(cfg.beta_start));
    kv("beta_end", format_double(cfg.beta_end));
    kv("epsilon_start", format_double(cfg.epsilon_start));
    kv("epsilon_min", format_double(cfg.epsilon_min));
    kv("eval_episodes", std::to_string(cfg.eval_episodes));
    kv("collision_rate_literal", cfg.collision_rate_literal ? "true" : "false");
    kv("seed", std::to_string(cfg.seed));
    return out;
}

void ExperimentConfig::validate() const {
    auto check = [](bool ok, const char* key, const char* msg) {
        if (!ok) throw ConfigError(key, msg);
    };
    check(n_devices > 0, "n_devices", "must be positive");
    for (int n : n_devices_list)
        check(n > 0, "n_devices_list", "entries must be positive");
    check(arrival_rate > 0.0 && arrival_rate <= 1.0, "arrival_rate",
          "must be in (0, 1]");
    check(horizon >= 0, "horizon", "must be non-negative (0 derives it)");
    check(history_size > 0, "history_size", "must be positive");
    check(rho >= 0.0, "rho", "must be non-negative");
    check(gamma >= 0.0 && gamma < 1.0, "gamma", "must be in [0, 1)");
    check(sigma > 1.0, "sigma", "must be greater than 1");
    check(p_min > 0.0, "p_min", "must be positive");
    check(p_max > p_min && p_max <= 1.0, "p_max", "must satisfy p_min < p_max <= 1");
    check(!hidden.empty(), "hidden", "needs at least one layer");
    for (int w : hidden) check(w > 0, "hidden", "layer sizes must be positive");
    check(learning_rate > 0.0, "learning_rate", "must be positive");
    check(batch_size > 0, "batch_size", "must be positive");
    check(target_update > 0, "target_update", "must be positive");
    check(replay_capacity >= batch_size, "replay_capacity",
          "must be at least batch_size");
    check(episodes > 0, "episodes", "must be positive");
    check(beta_start > 0.0 && beta_end > 0.0, "beta_start", "beta must be positive");
    check(epsilon_start >= 0.0, "epsilon_start", "must be non-negative");
    check(epsilon_min >= 0.0 && epsilon_min <= epsilon_start, "epsilon_min",
          "must be in [0, epsilon_start]");
    check(eval_episodes > 0, "eval_episodes", "must be positive");
}

std::vector<int> ExperimentConfig::device_counts() const {
    return n_devices_list.empty() ? std::vector<int>{n_devices} : n_devices_list;
}

ExperimentConfig ExperimentConfig::with_n_devices(int n) const {
    ExperimentConfig out = *this;
    out.n_devices = n;
    out.n_devices_list.clear();
    return out;
}

EnvConfig ExperimentConfig::env_config() const {
    EnvConfig e;
    e.n_devices = n_devices;
    e.arrival_rate = arrival_rate;
    e.horizon = horizon;
    e.history_size = history_size;
    e.per_slot_arrivals = per_slot_arrivals;
    return e;
}

DqnConfig ExperimentConfig::dqn_config() const {
    DqnConfig d;
    d.reward = {.rho = rho, .gamma = gamma};
    d.schedule = {.beta_start = beta_start,
                  .beta_end = beta_end,
                  .epsilon_start = epsilon_start,
                  .epsilon_min = epsilon_min,
                  .episodes = episodes};
    d.hidden = hidden;
    d.learning_rate = learning_rate;
    d.batch_size = batch_size;
    d.target_update = target_update;
    d.replay_capacity = replay_capacity;
    d.episodes = episodes;
    return d;
}

EbConfig ExperimentConfig::eb_config(bool symmetric, double sigma_override) const {
    EbConfig e;
    e.sigma = sigma_override > 0.0 ? sigma_override : sigma;
    e.p_min = p_min;
    e.p_max = p_max;
    e.symmetric = symmetric;
    return e;
}

}  // namespace mtcsim
