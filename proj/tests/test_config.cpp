#include <doctest.h>

#include <string>
#include <vector>

#include "mtcsim/config.hpp"

using namespace mtcsim;

TEST_SUITE("config") {

TEST_CASE("defaults carry the standard operating point") {
    const ExperimentConfig cfg;
    CHECK(cfg.n_devices == 50);
    CHECK(cfg.n_devices_list.empty());
    CHECK(cfg.arrival_rate == 0.05);
    CHECK(cfg.horizon == 0);
    CHECK(cfg.history_size == 5);
    CHECK_FALSE(cfg.per_slot_arrivals);
    CHECK(cfg.rho == 0.2);
    CHECK(cfg.gamma == 0.9);
    CHECK(cfg.sigma == 2.0);
    CHECK(cfg.p_min == 0.001);
    CHECK(cfg.p_max == 0.9);
    CHECK(cfg.hidden == std::vector<int>{150, 100});
    CHECK(cfg.learning_rate == 1e-4);
    CHECK(cfg.batch_size == 8);
    CHECK(cfg.target_update == 100);
    CHECK(cfg.replay_capacity == 10000);
    CHECK(cfg.episodes == 50);
    CHECK(cfg.beta_start == 1.0);
    CHECK(cfg.beta_end == 15.0);
    CHECK(cfg.epsilon_start == 0.5);
    CHECK(cfg.epsilon_min == 0.1);
    CHECK(cfg.eval_episodes == 50);
    CHECK_FALSE(cfg.collision_rate_literal);
    CHECK(cfg.seed == 1);
    CHECK_NOTHROW(cfg.validate());
    // the derived horizon at the default load
    CHECK(cfg.env_config().resolved_horizon() == 10);
}

TEST_CASE("key value lines parse with comments and blank lines") {
    const auto cfg = parse_config(
        "# experiment setup\n"
        "n_devices = 100\n"
        "\n"
        "arrival_rate = 0.1   # heavier load\n"
        "  episodes=20\n"
        "per_slot_arrivals = true\n"
        "hidden = 32, 16\n"
        "n_devices_list = 50, 100\n");
    CHECK(cfg.n_devices == 100);
    CHECK(cfg.arrival_rate == 0.1);
    CHECK(cfg.episodes == 20);
    CHECK(cfg.per_slot_arrivals);
    CHECK(cfg.hidden == std::vector<int>{32, 16});
    CHECK(cfg.n_devices_list == std::vector<int>{50, 100});
}

TEST_CASE("the last duplicate wins") {
    const auto cfg = parse_config("seed = 3\nseed = 9\n");
    CHECK(cfg.seed == 9);
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        parse_config("n_device = 10\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "n_device");
        CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }
}

TEST_CASE("malformed values name their key") {
    CHECK_THROWS_AS(parse_config("n_devices = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("arrival_rate = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("per_slot_arrivals = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("hidden = 32,,16\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just a line\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("= 5\n"), ConfigError);
    try {
        parse_config("batch_size = 8.5\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "batch_size");
    }
}

TEST_CASE("boolean spellings") {
    CHECK(parse_config("per_slot_arrivals = 1\n").per_slot_arrivals);
    CHECK_FALSE(parse_config("per_slot_arrivals = 0\n").per_slot_arrivals);
    CHECK(parse_config("collision_rate_literal = true\n").collision_rate_literal);
}

TEST_CASE("serialization round-trips losslessly") {
    ExperimentConfig cfg;
    cfg.n_devices = 123;
    cfg.n_devices_list = {50, 100, 500};
    cfg.arrival_rate = 0.07;
    cfg.learning_rate = 3e-5;
    cfg.hidden = {64};
    cfg.per_slot_arrivals = true;
    cfg.seed = 77;
    const auto text = serialize_config(cfg);
    const auto back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.n_devices == 123);
    CHECK(back.n_devices_list == std::vector<int>{50, 100, 500});
    CHECK(back.arrival_rate == 0.07);
    CHECK(back.learning_rate == 3e-5);

    // defaults round-trip too
    CHECK(serialize_config(parse_config(serialize_config(ExperimentConfig{}))) ==
          serialize_config(ExperimentConfig{}));
}

TEST_CASE("validation points at the failing key") {
    auto expect_key = [](ExperimentConfig cfg, const std::string& key) {
        try {
            cfg.validate();
            FAIL(("expected a config error for " + key));
        } catch (const ConfigError& e) {
            CHECK(e.key() == key);
        }
    };
    ExperimentConfig cfg;
    cfg.n_devices = 0;
    expect_key(cfg, "n_devices");
    cfg = ExperimentConfig{};
    cfg.n_devices_list = {50, -1};
    expect_key(cfg, "n_devices_list");
    cfg = ExperimentConfig{};
    cfg.gamma = 1.0;
    expect_key(cfg, "gamma");
    cfg = ExperimentConfig{};
    cfg.sigma = 1.0;
    expect_key(cfg, "sigma");
    cfg = ExperimentConfig{};
    cfg.p_max = 0.001;
    expect_key(cfg, "p_max");
    cfg = ExperimentConfig{};
    cfg.epsilon_min = 0.9;
    expect_key(cfg, "epsilon_min");
    cfg = ExperimentConfig{};
    cfg.replay_capacity = 4;
    expect_key(cfg, "replay_capacity");
    cfg = ExperimentConfig{};
    cfg.hidden = {};
    expect_key(cfg, "hidden");
}

TEST_CASE("sub-config mapping") {
    ExperimentConfig cfg;
    cfg.n_devices = 100;
    cfg.sigma = 4.0;

    const auto env = cfg.env_config();
    CHECK(env.n_devices == 100);
    CHECK(env.resolved_horizon() == 20);

    const auto dqn = cfg.dqn_config();
    CHECK(dqn.reward.rho == 0.2);
    CHECK(dqn.schedule.episodes == 50);
    CHECK(dqn.hidden == std::vector<int>{150, 100});

    CHECK(cfg.eb_config(false).sigma == 4.0);
    CHECK_FALSE(cfg.eb_config(false).symmetric);
    CHECK(cfg.eb_config(true).symmetric);
    // the pinned binary variants override sigma
    CHECK(cfg.eb_config(true, 2.0).sigma == 2.0);
    CHECK(cfg.eb_config(false, 0.0).sigma == 4.0);
}

TEST_CASE("device count sweeps") {
    ExperimentConfig cfg;
    CHECK(cfg.device_counts() == std::vector<int>{50});
    cfg.n_devices_list = {50, 100};
    CHECK(cfg.device_counts() == std::vector<int>{50, 100});
    const auto pinned = cfg.with_n_devices(100);
    CHECK(pinned.n_devices == 100);
    CHECK(pinned.n_devices_list.empty());
    CHECK(pinned.device_counts() == std::vector<int>{100});
}

}  // TEST_SUITE
