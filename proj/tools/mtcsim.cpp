// Command-line front end: train a collision-resolution network, evaluate a
// single policy, or compare several under matched arrival sequences.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtcsim/config.hpp"
#include "mtcsim/experiments.hpp"
#include "mtcsim/ioutil.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool trace = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path,
                    "Config file (key = value lines)");
    cmd->add_option("-o,--out", args.out_dir, "Output directory")
        ->capture_default_str();
    cmd->add_option("-s,--seed", args.seed, "Seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_flag("-t,--trace", args.trace, "Write a JSON-lines episode trace");
}

mtcsim::ExperimentConfig resolve_config(const CommonArgs& args) {
    mtcsim::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = mtcsim::load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    cfg.validate();
    return cfg;
}

void print_error(const char* kind, const std::string& message, const std::string& key) {
    nlohmann::json j;
    j["error"] = kind;
    j["message"] = message;
    if (!key.empty()) j["key"] = key;
    std::fprintf(stderr, "%s\n", j.dump().c_str());
}

void print_episode(const mtcsim::TrainEpisodeLog& e) {
    std::printf("episode %3d  reward %10.4f  beta %6.3f  epsilon %5.3f  loss %.6f\n",
                e.episode, e.cumulative_reward, e.beta, e.epsilon, e.mean_loss);
    std::fflush(stdout);
}

int cmd_train(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const auto run = mtcsim::run_train(cfg, args.out_dir, print_episode);
    std::printf("checkpoint: %s\n", run.checkpoint_path.c_str());
    std::printf("training log: %s\n", run.log_path.c_str());
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& policy,
             const std::string& checkpoint) {
    const auto cfg = resolve_config(args);
    const auto kind = mtcsim::policy_from_name(policy);
    if (kind == mtcsim::PolicyKind::Dqn && checkpoint.empty())
        throw mtcsim::ConfigError("checkpoint", "evaluating dqn needs --checkpoint");
    const auto run = mtcsim::run_eval(cfg, kind, checkpoint, args.out_dir, args.trace);

    std::vector<double> tput, coll;
    for (const auto& m : run.episodes) {
        tput.push_back(m.throughput);
        coll.push_back(m.collision_rate);
    }
    const auto t = mtcsim::summarize(tput);
    const auto c = mtcsim::summarize(coll);
    std::printf("%s over %zu episodes: throughput %.4f +/- %.4f, collision rate %.4f +/- %.4f\n",
                policy.c_str(), run.episodes.size(), t.mean, t.std_err, c.mean, c.std_err);
    std::printf("metrics: %s\n", run.csv_path.c_str());
    if (!run.trace_path.empty()) std::printf("trace: %s\n", run.trace_path.c_str());
    return 0;
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& policies,
                const std::string& checkpoint) {
    const auto cfg = resolve_config(args);
    std::vector<mtcsim::PolicyKind> kinds;
    if (policies.empty()) {
        kinds = {mtcsim::PolicyKind::Dqn, mtcsim::PolicyKind::Bnseb,
                 mtcsim::PolicyKind::Bseb};
    } else {
        for (const auto& p : policies) kinds.push_back(mtcsim::policy_from_name(p));
    }
    const auto run =
        mtcsim::run_compare(cfg, kinds, checkpoint, args.out_dir, args.trace, print_episode);
    std::printf("episodes: %s\n", run.csv_path.c_str());
    std::printf("summary: %s\n", run.summary_path.c_str());
    for (const auto& p : run.plot_paths) std::printf("plot data: %s\n", p.c_str());
    for (const auto& p : run.checkpoint_paths)
        std::printf("checkpoint: %s\n", p.c_str());
    std::printf("%s", mtcsim::read_file(run.summary_path).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slotted random-access simulator with a learned collision-resolution policy"};
    app.require_subcommand(1);

    CommonArgs train_args;
    auto* train = app.add_subcommand("train", "Train the shared Q-network");
    add_common(train, train_args);

    CommonArgs eval_args;
    std::string eval_policy = "dqn";
    std::string eval_checkpoint;
    auto* eval = app.add_subcommand("eval", "Evaluate one policy");
    add_common(eval, eval_args);
    eval->add_option("-p,--policy", eval_policy, "dqn, bnseb, bseb, nseb, or seb")
        ->capture_default_str();
    eval->add_option("-k,--checkpoint", eval_checkpoint, "Checkpoint for dqn");

    CommonArgs cmp_args;
    std::vector<std::string> cmp_policies;
    std::string cmp_checkpoint;
    auto* cmp = app.add_subcommand(
        "compare", "Evaluate several policies under matched arrivals");
    add_common(cmp, cmp_args);
    cmp->add_option("-p,--policy", cmp_policies,
                    "Policies to compare (default: dqn bnseb bseb)");
    cmp->add_option("-k,--checkpoint", cmp_checkpoint,
                    "Reuse this checkpoint instead of training");

    try {
        app.parse(argc, argv);
        if (train->parsed()) return cmd_train(train_args);
        if (eval->parsed()) return cmd_eval(eval_args, eval_policy, eval_checkpoint);
        if (cmp->parsed()) return cmd_compare(cmp_args, cmp_policies, cmp_checkpoint);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        print_error("usage", e.what(), "");
        return kExitConfig;
    } catch (const mtcsim::ConfigError& e) {
        print_error("config", e.what(), e.key());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        print_error("config", e.what(), "");
        return kExitConfig;
    } catch (const std::exception& e) {
        print_error("runtime", e.what(), "");
        return kExitRuntime;
    }
}
