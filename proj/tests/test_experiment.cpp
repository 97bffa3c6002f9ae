#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fedrda/experiment.hpp"

using namespace fedrda;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// small but complete configuration that runs in well under a second per seed
ExperimentConfig mini_config() {
    ExperimentConfig cfg = default_experiment_config();
    cfg.dataset.classes = 3;
    cfg.dataset.per_class = 30;
    cfg.dataset.test_per_class = 10;
    cfg.dataset.dim = 16;
    cfg.dataset.spread = 0.3;
    cfg.clients = 4;
    cfg.attacker_ratio = 0.25;
    cfg.attack.poison.trigger = square_trigger(cfg.dataset.dim, 2, 1.0, 1);
    cfg.distribution.kind = "iid";
    cfg.plan.total_rounds = 4;
    cfg.plan.attack_rounds = {2};
    cfg.train.epochs = 1;
    cfg.train.batch_size = 16;
    cfg.attack.extra_epochs = 1;
    cfg.seeds = {1, 2};
    cfg.stimuli_per_class = 5;
    cfg.hidden_dims = {8};
    return cfg;
}

} // namespace

TEST_CASE("config survives a json round trip") {
    ExperimentConfig cfg = default_experiment_config();
    nlohmann::json j1 = config_to_json(cfg);
    ExperimentConfig back = config_from_json(j1);
    nlohmann::json j2 = config_to_json(back);
    CHECK(j1.dump(2) == j2.dump(2));

    CHECK(j1["dataset"]["kind"] == "synth_blobs");
    CHECK(j1["clients"] == 10);
    CHECK(j1["detector"]["delta"] == 1.5);
    CHECK(j1["seeds"].size() == 5);
    CHECK(j1["attack"]["poison"]["trigger"]["pixel_indices"].is_array());
}

TEST_CASE("unknown configuration keys are rejected") {
    nlohmann::json j = config_to_json(default_experiment_config());
    j["bogus"] = 1;
    CHECK_THROWS_AS(config_from_json(j), ConfigError);

    nlohmann::json nested = config_to_json(default_experiment_config());
    nested["detector"]["bogus"] = 1;
    CHECK_THROWS_AS(config_from_json(nested), ConfigError);
}

TEST_CASE("validation rejects out-of-contract settings") {
    auto reject = [](void (*mutate)(ExperimentConfig&)) {
        ExperimentConfig cfg = default_experiment_config();
        mutate(cfg);
        CHECK_THROWS_AS(validate(cfg), ConfigError);
    };
    reject([](ExperimentConfig& c) { c.attacker_ratio = 0.5; });
    reject([](ExperimentConfig& c) { c.attacker_ratio = -0.1; });
    reject([](ExperimentConfig& c) { c.clients = 1; });
    reject([](ExperimentConfig& c) { c.detector.delta = 1.0; });
    reject([](ExperimentConfig& c) { c.detector.epsilon_d = -0.5; });
    reject([](ExperimentConfig& c) { c.detector.min_remaining = 2; });
    reject([](ExperimentConfig& c) { c.detector.calibration_window = -1; });
    reject([](ExperimentConfig& c) { c.train.learning_rate = 0.0; });
    reject([](ExperimentConfig& c) { c.train.epochs = -1; });
    reject([](ExperimentConfig& c) { c.train.batch_size = 0; });
    reject([](ExperimentConfig& c) { c.seeds.clear(); });
    reject([](ExperimentConfig& c) { c.stimuli_per_class = c.dataset.test_per_class + 1; });
    reject([](ExperimentConfig& c) { c.plan.attack_rounds = {c.plan.total_rounds}; });
    reject([](ExperimentConfig& c) { c.plan.attack_rounds = {1, 2}; });
    reject([](ExperimentConfig& c) { c.distribution.alpha = 0.0; });
    reject([](ExperimentConfig& c) { c.distribution.kind = "banana"; });
    reject([](ExperimentConfig& c) { c.dataset.kind = "banana"; });
    reject([](ExperimentConfig& c) { c.output_kind = "banana"; });
    reject([](ExperimentConfig& c) { c.hidden_dims = {0}; });
    reject([](ExperimentConfig& c) { c.attack.poison.trigger.reset(); });
    reject([](ExperimentConfig& c) { c.attack.extra_epochs = -1; });

    validate(default_experiment_config());
}

TEST_CASE("a majority attacker share needs an explicit override") {
    ExperimentConfig cfg = default_experiment_config();
    cfg.clients = 2;
    cfg.attacker_ratio = 0.4; // rounds to one attacker of two
    CHECK_THROWS_AS(validate(cfg), ConfigError);

    cfg.allow_majority_attackers = true;
    std::ostringstream captured;
    auto* old = std::clog.rdbuf(captured.rdbuf());
    validate(cfg);
    std::clog.rdbuf(old);
    CHECK(captured.str().find("[warn]") != std::string::npos);
}

TEST_CASE("experiment run writes a reproducible report and round logs") {
    ExperimentConfig cfg = mini_config();
    fs::path dir_a = "exp_test_a";
    fs::path dir_b = "exp_test_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    RunExperimentOptions opts;
    opts.out_dir = dir_a.string();
    ExperimentReport rep = run_experiment(cfg, opts);

    REQUIRE(rep.per_seed.size() == 2);
    CHECK(rep.per_seed[0].seed == 1);
    CHECK(rep.per_seed[1].seed == 2);
    for (const auto& sr : rep.per_seed) {
        REQUIRE(sr.rounds.size() == 4);
        CHECK(sr.final_accuracy == sr.rounds.back().accuracy);
        CHECK(sr.final_asr == sr.rounds.back().asr);

        // single attack round: the averaged confusion equals that round's
        DecisionVector truth;
        truth.dec = {0, 0, 0, 1};
        DetectionMetrics want = detection_metrics(sr.rounds[2].decisions, truth);
        CHECK(sr.mean_metrics.tp == want.tp);
        CHECK(sr.mean_metrics.fp == want.fp);
        CHECK(sr.mean_metrics.fn == want.fn);
        CHECK(sr.mean_metrics.f1 == doctest::Approx(want.f1).epsilon(1e-15));
    }
    CHECK(rep.mean_f1 ==
          doctest::Approx((rep.per_seed[0].mean_metrics.f1 + rep.per_seed[1].mean_metrics.f1) / 2)
              .epsilon(1e-15));
    CHECK(rep.mean_final_accuracy ==
          doctest::Approx((rep.per_seed[0].final_accuracy + rep.per_seed[1].final_accuracy) / 2)
              .epsilon(1e-15));

    REQUIRE(fs::exists(dir_a / "report.json"));
    REQUIRE(fs::exists(dir_a / "rounds_seed1.csv"));
    REQUIRE(fs::exists(dir_a / "rounds_seed2.csv"));

    std::string csv = slurp(dir_a / "rounds_seed1.csv");
    CHECK(csv.rfind("round,accuracy,asr,detect_time_s,decisions\n", 0) == 0);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(line.find(",0.000,") != std::string::npos); // wall times off by default
        std::string decisions = line.substr(line.rfind(',') + 1);
        CHECK(decisions.size() == 4);
        for (char ch : decisions) CHECK((ch == '0' || ch == '1'));
    }
    CHECK(rows == 4);

    auto j = nlohmann::json::parse(slurp(dir_a / "report.json"));
    CHECK(j["aggregate"]["mean_f1"].get<double>() == rep.mean_f1);
    CHECK(j["aggregate"]["mean_final_asr"].get<double>() == rep.mean_final_asr);
    CHECK(j["per_seed"].size() == 2);
    CHECK(j["per_seed"][0]["seed"] == 1);
    CHECK(j["per_seed"][0]["final_accuracy"].get<double>() == rep.per_seed[0].final_accuracy);
    CHECK(j["per_seed"][0]["metrics"]["tp"].get<int>() == rep.per_seed[0].mean_metrics.tp);
    CHECK(j["config"]["clients"] == 4);

    RunExperimentOptions opts_b;
    opts_b.out_dir = dir_b.string();
    run_experiment(cfg, opts_b);
    CHECK(slurp(dir_a / "report.json") == slurp(dir_b / "report.json"));
    CHECK(slurp(dir_a / "rounds_seed1.csv") == slurp(dir_b / "rounds_seed1.csv"));
    CHECK(slurp(dir_a / "rounds_seed2.csv") == slurp(dir_b / "rounds_seed2.csv"));

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("trace dumps are written on demand") {
    ExperimentConfig cfg = mini_config();
    cfg.seeds = {1};
    fs::path dir = "exp_test_traces";
    fs::remove_all(dir);
    RunExperimentOptions opts;
    opts.out_dir = dir.string();
    opts.traces = true;
    run_experiment(cfg, opts);
    REQUIRE(fs::exists(dir / "traces_seed1.json"));
    auto j = nlohmann::json::parse(slurp(dir / "traces_seed1.json"));
    CHECK(j.is_array());
    CHECK(j.size() == 4);
    fs::remove_all(dir);
}

TEST_CASE("experiment without an output directory writes nothing") {
    ExperimentConfig cfg = mini_config();
    cfg.seeds = {1};
    ExperimentReport rep = run_experiment(cfg);
    CHECK(rep.per_seed.size() == 1);
    CHECK_FALSE(fs::exists("report.json"));
}

TEST_CASE("timing scan covers the requested grid") {
    auto rows = timing_scan({4}, {2}, 3, 8, 2, 5);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].clients == 4);
    CHECK(rows[0].stimuli_per_class == 2);
    CHECK(rows[0].reps == 2);
    CHECK(rows[0].seconds_total > 0.0);
    CHECK(rows[0].seconds_per_detection ==
          doctest::Approx(rows[0].seconds_total / 2.0).epsilon(1e-12));

    auto grid = timing_scan({4, 5}, {2, 3}, 3, 8, 1, 5);
    CHECK(grid.size() == 4);

    CHECK_THROWS_AS(timing_scan({}, {2}, 3, 8, 1, 5), ArgumentError);
    CHECK_THROWS_AS(timing_scan({4}, {}, 3, 8, 1, 5), ArgumentError);
    CHECK_THROWS_AS(timing_scan({2}, {2}, 3, 8, 1, 5), ArgumentError);
    CHECK_THROWS_AS(timing_scan({4}, {0}, 3, 8, 1, 5), ArgumentError);
    CHECK_THROWS_AS(timing_scan({4}, {2}, 3, 8, 0, 5), ArgumentError);

    std::ostringstream out;
    write_timing_csv(rows, out);
    std::string s = out.str();
    CHECK(s.rfind("clients,stimuli_per_class,reps,seconds_total,seconds_per_detection\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 2);
}
