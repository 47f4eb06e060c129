#include "mtcsim/experiments.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "mtcsim/ioutil.hpp"

namespace mtcsim {

namespace {

constexpr std::uint64_t kArrivalSalt = 0x61727276;  // "arrv"
constexpr std::uint64_t kPolicySalt = 0x61637473;   // "acts"
constexpr std::uint64_t kInitSalt = 0x696e6974;     // "init"
constexpr std::uint64_t kTrainPhase = 0x7472;       // "tr"
constexpr std::uint64_t kEvalPhase = 0x6576;        // "ev"

int policy_stream_id(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Dqn: return 1;
        case PolicyKind::Bnseb: return 2;
        case PolicyKind::Bseb: return 3;
        case PolicyKind::Nseb: return 4;
        case PolicyKind::Seb: return 5;
    }
    throw std::logic_error("unreachable policy kind");
}

std::string run_id(const ExperimentConfig& cfg, PolicyKind kind) {
    return policy_name(kind) + "-N" + std::to_string(cfg.n_devices) + "-s" +
           std::to_string(cfg.seed);
}

std::string file_stem(const ExperimentConfig& cfg) {
    return "N" + std::to_string(cfg.n_devices) + "_seed" + std::to_string(cfg.seed);
}

void ensure_dir(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::vector<EpisodeMetrics> eval_policy(const ExperimentConfig& cfg, PolicyKind kind,
                                        AccessPolicy& policy, TraceWriter* trace) {
    const auto seeds = eval_seeds(cfg.seed, cfg.n_devices, kind);
    Rng arrival_rng(seeds.arrivals);
    Rng policy_rng(seeds.policy);
    const RewardConfig reward{.rho = cfg.rho, .gamma = cfg.gamma};
    return evaluate(policy, cfg.env_config(), cfg.eval_episodes, arrival_rng,
                    policy_rng, reward, cfg.collision_rate_literal, trace);
}

Mlp net_for_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
    Mlp net = load_checkpoint(checkpoint_path);
    if (net.input_size() != 2 * cfg.history_size + 1)
        throw std::runtime_error("checkpoint input size " +
                                 std::to_string(net.input_size()) +
                                 " does not match history_size " +
                                 std::to_string(cfg.history_size));
    return net;
}

}  // namespace

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Dqn: return "dqn";
        case PolicyKind::Bnseb: return "bnseb";
        case PolicyKind::Bseb: return "bseb";
        case PolicyKind::Nseb: return "nseb";
        case PolicyKind::Seb: return "seb";
    }
    throw std::logic_error("unreachable policy kind");
}

PolicyKind policy_from_name(const std::string& name) {
    for (auto kind : all_policies())
        if (policy_name(kind) == name) return kind;
    throw ConfigError("policy", "unknown policy '" + name +
                                    "' (expected dqn, bnseb, bseb, nseb, or seb)");
}

const std::vector<PolicyKind>& all_policies() {
    static const std::vector<PolicyKind> kinds = {
        PolicyKind::Dqn, PolicyKind::Bnseb, PolicyKind::Bseb, PolicyKind::Nseb,
        PolicyKind::Seb};
    return kinds;
}

StreamSeeds train_seeds(std::uint64_t seed, int n_devices) {
    const auto n = static_cast<std::uint64_t>(n_devices);
    return {.arrivals = mix_seed({seed, n, kTrainPhase, kArrivalSalt}),
            .policy = mix_seed({seed, n, kTrainPhase, kPolicySalt}),
            .train = mix_seed({seed, n, kTrainPhase, kInitSalt})};
}

StreamSeeds eval_seeds(std::uint64_t seed, int n_devices, PolicyKind kind) {
    const auto n = static_cast<std::uint64_t>(n_devices);
    return {.arrivals = mix_seed({seed, n, kEvalPhase, kArrivalSalt}),
            .policy = mix_seed({seed, n, kEvalPhase, kPolicySalt,
                                static_cast<std::uint64_t>(policy_stream_id(kind))}),
            .train = 0};
}

std::unique_ptr<AccessPolicy> make_policy(PolicyKind kind, const ExperimentConfig& cfg,
                                          const Mlp* net) {
    switch (kind) {
        case PolicyKind::Dqn:
            if (!net) throw std::invalid_argument("dqn policy needs a network");
            return std::make_unique<DqnPolicy>(*net, cfg.beta_end, cfg.epsilon_min);
        case PolicyKind::Bnseb:
            return std::make_unique<EbPolicy>("bnseb", cfg.eb_config(false, 2.0),
                                              cfg.n_devices);
        case PolicyKind::Bseb:
            return std::make_unique<EbPolicy>("bseb", cfg.eb_config(true, 2.0),
                                              cfg.n_devices);
        case PolicyKind::Nseb:
            return std::make_unique<EbPolicy>("nseb", cfg.eb_config(false),
                                              cfg.n_devices);
        case PolicyKind::Seb:
            return std::make_unique<EbPolicy>("seb", cfg.eb_config(true),
                                              cfg.n_devices);
    }
    throw std::logic_error("unreachable policy kind");
}

std::string checkpoint_filename(const ExperimentConfig& cfg) {
    return "dqn_" + file_stem(cfg) + ".ckpt";
}

TrainRun run_train(const ExperimentConfig& cfg, const std::string& out_dir,
                   const std::function<void(const TrainEpisodeLog&)>& on_episode) {
    cfg.validate();
    ensure_dir(out_dir);
    TrainRun run;
    run.result = train(cfg.env_config(), cfg.dqn_config(),
                       train_seeds(cfg.seed, cfg.n_devices), on_episode);

    run.checkpoint_path = join(out_dir, checkpoint_filename(cfg));
    save_checkpoint(run.result.net, run.checkpoint_path);

    std::string csv = "episode,cumulative_reward,beta,epsilon,mean_loss,optimizer_steps\n";
    for (const auto& e : run.result.log) {
        csv += std::to_string(e.episode);
        csv += ',';
        csv += format_double(e.cumulative_reward);
        csv += ',';
        csv += format_double(e.beta);
        csv += ',';
        csv += format_double(e.epsilon);
        csv += ',';
        csv += format_double(e.mean_loss);
        csv += ',';
        csv += std::to_string(e.optimizer_steps);
        csv += '\n';
    }
    run.log_path = join(out_dir, "train_" + file_stem(cfg) + ".csv");
    atomic_write_file(run.log_path, csv);

    run.config_path = join(out_dir, "config_" + file_stem(cfg) + ".cfg");
    atomic_write_file(run.config_path, serialize_config(cfg));
    return run;
}

EvalRun run_eval(const ExperimentConfig& cfg, PolicyKind kind,
                 const std::string& checkpoint_path, const std::string& out_dir,
                 bool trace_enabled) {
    cfg.validate();
    ensure_dir(out_dir);

    Mlp net;
    const Mlp* net_ptr = nullptr;
    if (kind == PolicyKind::Dqn) {
        net = net_for_eval(cfg, checkpoint_path);
        net_ptr = &net;
    }
    auto policy = make_policy(kind, cfg, net_ptr);

    TraceWriter trace;
    if (trace_enabled) trace.enable();
    EvalRun run;
    run.episodes = eval_policy(cfg, kind, *policy, trace_enabled ? &trace : nullptr);

    std::string csv = metrics_csv_header();
    const auto id = run_id(cfg, kind);
    for (const auto& m : run.episodes)
        append_metrics_row(csv, id, policy_name(kind), cfg.n_devices, cfg.arrival_rate,
                           cfg.seed, m);
    run.csv_path =
        join(out_dir, "eval_" + policy_name(kind) + "_" + file_stem(cfg) + ".csv");
    atomic_write_file(run.csv_path, csv);

    if (trace_enabled) {
        run.trace_path =
            join(out_dir, "trace_" + policy_name(kind) + "_" + file_stem(cfg) + ".jsonl");
        trace.write(run.trace_path);
    }
    return run;
}

CompareRun run_compare(const ExperimentConfig& cfg, std::vector<PolicyKind> kinds,
                       const std::string& checkpoint_path, const std::string& out_dir,
                       bool trace_enabled,
                       const std::function<void(const TrainEpisodeLog&)>& on_episode) {
    cfg.validate();
    ensure_dir(out_dir);
    CompareRun run;

    const auto counts = cfg.device_counts();
    const bool wants_dqn =
        std::find(kinds.begin(), kinds.end(), PolicyKind::Dqn) != kinds.end();
    if (!checkpoint_path.empty() && counts.size() > 1)
        throw ConfigError("checkpoint",
                          "an explicit checkpoint covers one device count; sweeps "
                          "train per count instead");

    std::string csv = metrics_csv_header();
    std::string summary =
        "policy,N,lambda_n,episodes,throughput_mean,throughput_se,"
        "collision_rate_mean,collision_rate_se,mean_delay_mean,mean_delay_se,"
        "delivered_episodes,undelivered_mean\n";
    struct CellStats {
        SummaryStats throughput, collision, delay;
    };
    std::vector<CellStats> stats;  // parallel to run.cells

    for (int n : counts) {
        const auto cfg_n = cfg.with_n_devices(n);
        Mlp net;
        if (wants_dqn) {
            if (checkpoint_path.empty()) {
                auto trained = run_train(cfg_n, out_dir, on_episode);
                net = std::move(trained.result.net);
                run.checkpoint_paths.push_back(trained.checkpoint_path);
            } else {
                net = net_for_eval(cfg_n, checkpoint_path);
                run.checkpoint_paths.push_back(checkpoint_path);
            }
        }

        for (auto kind : kinds) {
            auto policy =
                make_policy(kind, cfg_n, kind == PolicyKind::Dqn ? &net : nullptr);
            TraceWriter trace;
            if (trace_enabled) trace.enable();
            auto episodes =
                eval_policy(cfg_n, kind, *policy, trace_enabled ? &trace : nullptr);

            const auto id = run_id(cfg_n, kind);
            std::vector<double> tput, coll, delay, undeliv;
            for (const auto& m : episodes) {
                append_metrics_row(csv, id, policy_name(kind), n, cfg.arrival_rate,
                                   cfg.seed, m);
                tput.push_back(m.throughput);
                coll.push_back(m.collision_rate);
                // Episodes where nothing was delivered have no delay to report.
                if (m.delivered_devices > 0) delay.push_back(m.mean_delay);
                undeliv.push_back(static_cast<double>(m.undelivered_count));
            }
            const auto t = summarize(tput);
            const auto c = summarize(coll);
            const auto d = summarize(delay);
            const auto u = summarize(undeliv);
            summary += policy_name(kind);
            summary += ',';
            summary += std::to_string(n);
            summary += ',';
            summary += format_double(cfg.arrival_rate);
            summary += ',';
            summary += std::to_string(episodes.size());
            summary += ',';
            summary += format_double(t.mean);
            summary += ',';
            summary += format_double(t.std_err);
            summary += ',';
            summary += format_double(c.mean);
            summary += ',';
            summary += format_double(c.std_err);
            summary += ',';
            if (d.count > 0) {
                summary += format_double(d.mean);
                summary += ',';
                summary += format_double(d.std_err);
            } else {
                summary += ',';
            }
            summary += ',';
            summary += std::to_string(d.count);
            summary += ',';
            summary += format_double(u.mean);
            summary += '\n';

            if (trace_enabled) {
                trace.write(join(out_dir, "trace_" + policy_name(kind) + "_" +
                                              file_stem(cfg_n) + ".jsonl"));
            }
            run.cells.push_back({kind, n, std::move(episodes)});
            stats.push_back({t, c, d});
        }
    }

    const auto seed_stem = "seed" + std::to_string(cfg.seed);
    run.csv_path = join(out_dir, "compare_" + seed_stem + ".csv");
    atomic_write_file(run.csv_path, csv);
    run.summary_path = join(out_dir, "summary_" + seed_stem + ".csv");
    atomic_write_file(run.summary_path, summary);

    // One file per metric: rows grouped by policy (the plot series), device
    // count ascending within each, mirroring the summary's statistics.
    const char* metric_names[] = {"throughput", "collision_rate", "mean_delay"};
    for (int metric = 0; metric < 3; ++metric) {
        std::string plot = "policy,n_devices,mean,std_err\n";
        for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
            for (std::size_t ni = 0; ni < counts.size(); ++ni) {
                const auto& cell_stats = stats[ni * kinds.size() + ki];
                const auto& s = metric == 0   ? cell_stats.throughput
                                : metric == 1 ? cell_stats.collision
                                              : cell_stats.delay;
                plot += policy_name(kinds[ki]);
                plot += ',';
                plot += std::to_string(counts[ni]);
                plot += ',';
                if (s.count > 0) {
                    plot += format_double(s.mean);
                    plot += ',';
                    plot += format_double(s.std_err);
                } else {
                    plot += ',';
                }
                plot += '\n';
            }
        }
        const auto path = join(
            out_dir, "plot_" + std::string(metric_names[metric]) + "_" + seed_stem + ".csv");
        atomic_write_file(path, plot);
        run.plot_paths.push_back(path);
    }
    return run;
}

}  // namespace mtcsim
