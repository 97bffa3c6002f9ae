#include "fedrda/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "fedrda/rng.hpp"

namespace fedrda {

namespace {

constexpr uint64_t kStreamPartition = 0xA1;
constexpr uint64_t kStreamPoison = 0xA2;
constexpr uint64_t kStreamStimuli = 0xA3;

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception& e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

} // namespace

ExperimentConfig default_experiment_config() {
    ExperimentConfig cfg;
    cfg.plan.total_rounds = 20;
    cfg.plan.attack_rounds = {10};
    cfg.plan.mode = AttackMode::replacement;
    cfg.plan.defense_enabled_from = 0;
    cfg.train.learning_rate = 0.05;
    cfg.train.epochs = 5;
    cfg.train.batch_size = 32;
    cfg.attack.poison.kind = PoisonKind::backdoor_trigger;
    cfg.attack.poison.attack_rate = 0.2;
    cfg.attack.poison.trigger = square_trigger(cfg.dataset.dim, 3, 1.0, 1);
    return cfg;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    require_keys(j, {"dataset", "clients", "attacker_ratio", "distribution", "plan", "train",
                     "detector", "seeds", "attack", "stimuli_per_class", "hidden_dims",
                     "output_kind", "allow_majority_attackers"},
                 "config");
    ExperimentConfig cfg = default_experiment_config();

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        require_keys(d, {"kind", "classes", "per_class", "test_per_class", "dim", "spread",
                         "seed", "images_path", "labels_path", "test_images_path",
                         "test_labels_path"},
                     "dataset");
        cfg.dataset.kind = get_or<std::string>(d, "kind", cfg.dataset.kind);
        cfg.dataset.classes = get_or(d, "classes", cfg.dataset.classes);
        cfg.dataset.per_class = get_or(d, "per_class", cfg.dataset.per_class);
        cfg.dataset.test_per_class = get_or(d, "test_per_class", cfg.dataset.test_per_class);
        cfg.dataset.dim = get_or(d, "dim", cfg.dataset.dim);
        cfg.dataset.spread = get_or(d, "spread", cfg.dataset.spread);
        cfg.dataset.seed = get_or(d, "seed", cfg.dataset.seed);
        cfg.dataset.images_path = get_or<std::string>(d, "images_path", "");
        cfg.dataset.labels_path = get_or<std::string>(d, "labels_path", "");
        cfg.dataset.test_images_path = get_or<std::string>(d, "test_images_path", "");
        cfg.dataset.test_labels_path = get_or<std::string>(d, "test_labels_path", "");
    }
    cfg.clients = get_or(j, "clients", cfg.clients);
    cfg.attacker_ratio = get_or(j, "attacker_ratio", cfg.attacker_ratio);
    if (j.contains("distribution")) {
        const auto& d = j.at("distribution");
        require_keys(d, {"kind", "alpha"}, "distribution");
        cfg.distribution.kind = get_or<std::string>(d, "kind", cfg.distribution.kind);
        cfg.distribution.alpha = get_or(d, "alpha", cfg.distribution.alpha);
    }
    if (j.contains("plan")) {
        const auto& p = j.at("plan");
        require_keys(p, {"total_rounds", "attack_rounds", "mode", "defense_enabled_from"},
                     "plan");
        cfg.plan.total_rounds = get_or(p, "total_rounds", cfg.plan.total_rounds);
        if (p.contains("attack_rounds")) {
            cfg.plan.attack_rounds.clear();
            for (int r : get_or(p, "attack_rounds", std::vector<int>{}))
                cfg.plan.attack_rounds.insert(r);
        }
        std::string mode = get_or<std::string>(p, "mode", "replacement");
        if (mode == "replacement") cfg.plan.mode = AttackMode::replacement;
        else if (mode == "continuous") cfg.plan.mode = AttackMode::continuous;
        else throw ConfigError("plan.mode must be replacement or continuous");
        cfg.plan.defense_enabled_from =
            get_or(p, "defense_enabled_from", cfg.plan.defense_enabled_from);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        require_keys(t, {"learning_rate", "epochs", "batch_size", "seed"}, "train");
        cfg.train.learning_rate = get_or(t, "learning_rate", cfg.train.learning_rate);
        cfg.train.epochs = get_or(t, "epochs", cfg.train.epochs);
        cfg.train.batch_size = get_or(t, "batch_size", cfg.train.batch_size);
        cfg.train.seed = get_or(t, "seed", cfg.train.seed);
    }
    if (j.contains("detector")) {
        const auto& d = j.at("detector");
        require_keys(d, {"delta", "epsilon_d", "mode", "min_remaining", "calibration_window"},
                     "detector");
        cfg.detector.delta = get_or(d, "delta", cfg.detector.delta);
        cfg.detector.epsilon_d = get_or(d, "epsilon_d", cfg.detector.epsilon_d);
        std::string mode = get_or<std::string>(d, "mode", "refined");
        if (mode == "basic") cfg.detector.mode = DetectMode::basic;
        else if (mode == "refined") cfg.detector.mode = DetectMode::refined;
        else throw ConfigError("detector.mode must be basic or refined");
        cfg.detector.min_remaining = get_or(d, "min_remaining", cfg.detector.min_remaining);
        cfg.detector.calibration_window =
            get_or(d, "calibration_window", cfg.detector.calibration_window);
    }
    cfg.seeds = get_or(j, "seeds", cfg.seeds);
    if (j.contains("attack")) {
        const auto& a = j.at("attack");
        require_keys(a, {"poison", "boost", "stealth_lambda", "extra_epochs"}, "attack");
        if (a.contains("poison")) {
            const auto& p = a.at("poison");
            require_keys(p, {"kind", "attack_rate", "trigger", "flip_source", "flip_target",
                             "subgroup"},
                         "attack.poison");
            std::string kind = get_or<std::string>(p, "kind", "backdoor_trigger");
            if (kind == "backdoor_trigger") cfg.attack.poison.kind = PoisonKind::backdoor_trigger;
            else if (kind == "label_flip") cfg.attack.poison.kind = PoisonKind::label_flip;
            else if (kind == "subgroup_relabel")
                cfg.attack.poison.kind = PoisonKind::subgroup_relabel;
            else if (kind == "none") cfg.attack.poison.kind = PoisonKind::none;
            else throw ConfigError("attack.poison.kind unknown: " + kind);
            cfg.attack.poison.attack_rate =
                get_or(p, "attack_rate", cfg.attack.poison.attack_rate);
            if (p.contains("trigger")) {
                const auto& t = p.at("trigger");
                require_keys(t, {"pixel_indices", "square_side", "trigger_value", "target_label"},
                             "trigger");
                TriggerSpec trig;
                trig.trigger_value = get_or(t, "trigger_value", 1.0);
                trig.target_label = get_or(t, "target_label", 1);
                if (t.contains("pixel_indices")) {
                    trig.pixel_indices = get_or(t, "pixel_indices", std::vector<size_t>{});
                } else {
                    int side = get_or(t, "square_side", 3);
                    trig = square_trigger(cfg.dataset.dim, side, trig.trigger_value,
                                          trig.target_label);
                }
                cfg.attack.poison.trigger = trig;
            } else {
                cfg.attack.poison.trigger = square_trigger(cfg.dataset.dim, 3, 1.0, 1);
            }
            cfg.attack.poison.flip_source = get_or(p, "flip_source", 0);
            cfg.attack.poison.flip_target = get_or(p, "flip_target", 0);
            if (p.contains("subgroup")) {
                const auto& s = p.at("subgroup");
                require_keys(s, {"dims", "lo", "hi", "relabel_to"}, "subgroup");
                SubgroupBox box;
                box.dims = get_or(s, "dims", std::vector<size_t>{});
                box.lo = get_or(s, "lo", std::vector<double>{});
                box.hi = get_or(s, "hi", std::vector<double>{});
                box.relabel_to = get_or(s, "relabel_to", 0);
                cfg.attack.poison.subgroup = box;
            }
        }
        if (a.contains("boost")) cfg.attack.boost = a.at("boost").get<double>();
        cfg.attack.stealth_lambda = get_or(a, "stealth_lambda", cfg.attack.stealth_lambda);
        cfg.attack.extra_epochs = get_or(a, "extra_epochs", cfg.attack.extra_epochs);
    } else {
        cfg.attack.poison.trigger = square_trigger(cfg.dataset.dim, 3, 1.0, 1);
    }
    cfg.stimuli_per_class = get_or(j, "stimuli_per_class", cfg.stimuli_per_class);
    cfg.hidden_dims = get_or(j, "hidden_dims", cfg.hidden_dims);
    cfg.output_kind = get_or<std::string>(j, "output_kind", cfg.output_kind);
    cfg.allow_majority_attackers =
        get_or(j, "allow_majority_attackers", cfg.allow_majority_attackers);
    validate(cfg);
    return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["dataset"] = {{"kind", cfg.dataset.kind},
                    {"classes", cfg.dataset.classes},
                    {"per_class", cfg.dataset.per_class},
                    {"test_per_class", cfg.dataset.test_per_class},
                    {"dim", cfg.dataset.dim},
                    {"spread", cfg.dataset.spread},
                    {"seed", cfg.dataset.seed}};
    if (cfg.dataset.kind == "idx") {
        j["dataset"]["images_path"] = cfg.dataset.images_path;
        j["dataset"]["labels_path"] = cfg.dataset.labels_path;
        j["dataset"]["test_images_path"] = cfg.dataset.test_images_path;
        j["dataset"]["test_labels_path"] = cfg.dataset.test_labels_path;
    }
    j["clients"] = cfg.clients;
    j["attacker_ratio"] = cfg.attacker_ratio;
    j["distribution"] = {{"kind", cfg.distribution.kind}, {"alpha", cfg.distribution.alpha}};
    j["plan"] = {{"total_rounds", cfg.plan.total_rounds},
                 {"attack_rounds", std::vector<int>(cfg.plan.attack_rounds.begin(),
                                                    cfg.plan.attack_rounds.end())},
                 {"mode", cfg.plan.mode == AttackMode::replacement ? "replacement" : "continuous"},
                 {"defense_enabled_from", cfg.plan.defense_enabled_from}};
    j["train"] = {{"learning_rate", cfg.train.learning_rate},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size}};
    j["detector"] = {{"delta", cfg.detector.delta},
                     {"epsilon_d", cfg.detector.epsilon_d},
                     {"mode", cfg.detector.mode == DetectMode::basic ? "basic" : "refined"},
                     {"min_remaining", cfg.detector.min_remaining},
                     {"calibration_window", cfg.detector.calibration_window}};
    j["seeds"] = cfg.seeds;
    nlohmann::json poison;
    switch (cfg.attack.poison.kind) {
        case PoisonKind::backdoor_trigger: poison["kind"] = "backdoor_trigger"; break;
        case PoisonKind::label_flip: poison["kind"] = "label_flip"; break;
        case PoisonKind::subgroup_relabel: poison["kind"] = "subgroup_relabel"; break;
        case PoisonKind::none: poison["kind"] = "none"; break;
    }
    poison["attack_rate"] = cfg.attack.poison.attack_rate;
    if (cfg.attack.poison.trigger) {
        poison["trigger"] = {{"pixel_indices", cfg.attack.poison.trigger->pixel_indices},
                             {"trigger_value", cfg.attack.poison.trigger->trigger_value},
                             {"target_label", cfg.attack.poison.trigger->target_label}};
    }
    j["attack"] = {{"poison", poison}, {"stealth_lambda", cfg.attack.stealth_lambda},
                   {"extra_epochs", cfg.attack.extra_epochs}};
    if (cfg.attack.boost) j["attack"]["boost"] = *cfg.attack.boost;
    j["stimuli_per_class"] = cfg.stimuli_per_class;
    j["hidden_dims"] = cfg.hidden_dims;
    j["output_kind"] = cfg.output_kind;
    j["allow_majority_attackers"] = cfg.allow_majority_attackers;
    return j;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.dataset.kind != "synth_blobs" && cfg.dataset.kind != "idx")
        throw ConfigError("dataset.kind must be synth_blobs or idx");
    if (cfg.clients < 2) throw ConfigError("need at least 2 clients");
    if (cfg.attacker_ratio < 0.0 || cfg.attacker_ratio > 0.4)
        throw ConfigError("attacker_ratio must lie in [0, 0.4]");
    int K = static_cast<int>(std::llround(cfg.attacker_ratio * cfg.clients));
    int majority = (cfg.clients + 1) / 2;
    if (K >= majority) {
        if (!cfg.allow_majority_attackers)
            throw ConfigError("attackers would not be a minority; set "
                              "allow_majority_attackers to override");
        std::clog << "[warn] attackers are not a minority (" << K << "/" << cfg.clients
                  << "); detection assumptions are void\n";
    }
    if (cfg.distribution.kind != "iid" && cfg.distribution.kind != "dirichlet")
        throw ConfigError("distribution.kind must be iid or dirichlet");
    if (cfg.distribution.kind == "dirichlet" && cfg.distribution.alpha <= 0.0)
        throw ConfigError("distribution.alpha must be positive");
    if (cfg.plan.total_rounds < 1) throw ConfigError("plan.total_rounds must be positive");
    for (int r : cfg.plan.attack_rounds)
        if (r < 0 || r >= cfg.plan.total_rounds)
            throw ConfigError("plan.attack_rounds outside [0, total_rounds)");
    if (cfg.plan.mode == AttackMode::replacement && cfg.plan.attack_rounds.size() > 1)
        throw ConfigError("replacement mode uses a single attack round");
    if (cfg.train.learning_rate <= 0.0) throw ConfigError("train.learning_rate must be positive");
    if (cfg.train.epochs < 0) throw ConfigError("train.epochs must be non-negative");
    if (cfg.train.batch_size < 1) throw ConfigError("train.batch_size must be positive");
    if (cfg.detector.delta <= 1.0) throw ConfigError("detector.delta must exceed 1");
    if (cfg.detector.epsilon_d < 0.0) throw ConfigError("detector.epsilon_d must be >= 0");
    if (cfg.detector.min_remaining < 3) throw ConfigError("detector.min_remaining must be >= 3");
    if (cfg.detector.calibration_window < 0)
        throw ConfigError("detector.calibration_window must be >= 0");
    if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (cfg.stimuli_per_class < 1) throw ConfigError("stimuli_per_class must be positive");
    if (cfg.stimuli_per_class > cfg.dataset.test_per_class && cfg.dataset.kind == "synth_blobs")
        throw ConfigError("stimuli_per_class exceeds test_per_class");
    for (int h : cfg.hidden_dims)
        if (h < 1) throw ConfigError("hidden_dims must be positive");
    if (cfg.output_kind != "softmax" && cfg.output_kind != "logits")
        throw ConfigError("output_kind must be softmax or logits");
    if (cfg.attack.poison.kind == PoisonKind::backdoor_trigger && !cfg.attack.poison.trigger)
        throw ConfigError("backdoor poison needs a trigger");
    if (cfg.attack.extra_epochs < 0) throw ConfigError("attack.extra_epochs must be >= 0");
}

namespace {

struct BuiltData {
    LabeledDataset train;
    LabeledDataset test;
};

BuiltData build_data(const DatasetSpec& ds) {
    BuiltData b;
    if (ds.kind == "idx") {
        b.train = load_idx(ds.images_path, ds.labels_path);
        b.test = load_idx(ds.test_images_path, ds.test_labels_path);
        return b;
    }
    LabeledDataset full =
        synth_blobs(ds.classes, ds.per_class + ds.test_per_class, ds.dim, ds.spread, ds.seed);
    std::vector<size_t> tr, te;
    int block = ds.per_class + ds.test_per_class;
    for (int c = 0; c < ds.classes; ++c) {
        size_t base = static_cast<size_t>(c) * block;
        for (int i = 0; i < ds.per_class; ++i) tr.push_back(base + i);
        for (int i = ds.per_class; i < block; ++i) te.push_back(base + i);
    }
    b.train = subset(full, tr);
    b.test = subset(full, te);
    return b;
}

DetectionMetrics mean_attack_round_metrics(const std::vector<RoundRecord>& rounds,
                                           const RoundPlan& plan, const DecisionVector& truth) {
    DetectionMetrics mean;
    int n = 0;
    for (int t : plan.attack_rounds) {
        const auto& rec = rounds[static_cast<size_t>(t)];
        DetectionMetrics m = detection_metrics(rec.decisions, truth);
        mean.tp += m.tp;
        mean.fp += m.fp;
        mean.tn += m.tn;
        mean.fn += m.fn;
        mean.fpr += m.fpr;
        mean.fnr += m.fnr;
        mean.f1 += m.f1;
        ++n;
    }
    if (n > 0) {
        mean.fpr /= n;
        mean.fnr /= n;
        mean.f1 /= n;
    }
    return mean;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunExperimentOptions& opts) {
    validate(cfg);
    ExperimentReport report;
    report.config = cfg;

    if (!opts.out_dir.empty()) std::filesystem::create_directories(opts.out_dir);

    BuiltData data = build_data(cfg.dataset);
    int K = static_cast<int>(std::llround(cfg.attacker_ratio * cfg.clients));

    try {
        for (uint64_t seed : cfg.seeds) {
            Partition part =
                cfg.distribution.kind == "iid"
                    ? partition_iid(data.train, cfg.clients, mix_seed(seed, kStreamPartition))
                    : partition_dirichlet(data.train, cfg.clients, cfg.distribution.alpha,
                                          mix_seed(seed, kStreamPartition));

            std::vector<ClientState> clients(cfg.clients);
            DecisionVector truth;
            truth.dec.assign(cfg.clients, 0);
            for (int i = 0; i < cfg.clients; ++i) {
                ClientState& c = clients[i];
                c.id = i;
                c.data = subset(data.train, part.assignments[i]);
                c.malicious = i >= cfg.clients - K;
                c.epochs = cfg.train.epochs;
                c.extra_epochs = cfg.attack.extra_epochs;
                if (c.malicious) {
                    truth.dec[i] = 1;
                    c.poisoned_data = apply_poison(c.data, cfg.attack.poison,
                                                   mix_seed(seed, kStreamPoison,
                                                            static_cast<uint64_t>(i)));
                    c.boost = cfg.attack.boost.value_or(
                        cfg.plan.mode == AttackMode::replacement
                            ? static_cast<double>(cfg.clients)
                            : 1.0);
                    c.stealth_lambda = cfg.attack.stealth_lambda;
                }
            }

            EvalSets eval;
            eval.clean_test = data.test;
            eval.stimuli =
                sample_stimuli(data.test, cfg.stimuli_per_class, mix_seed(seed, kStreamStimuli));
            if (cfg.attack.poison.kind == PoisonKind::backdoor_trigger &&
                cfg.attack.poison.trigger) {
                eval.backdoor_test = make_backdoor_testset(data.test, *cfg.attack.poison.trigger);
                eval.target_label = cfg.attack.poison.trigger->target_label;
            }

            TrainConfig tc = cfg.train;
            tc.seed = seed;
            RunOptions ropts;
            ropts.parallel = opts.parallel;
            ropts.hidden_dims = cfg.hidden_dims;
            ropts.output_kind =
                cfg.output_kind == "logits" ? OutputKind::logits : OutputKind::softmax;
            std::vector<DetectionTrace> traces;
            if (opts.traces) ropts.traces = &traces;

            SeedResult res;
            res.seed = seed;
            res.rounds = run_rounds(clients, cfg.plan, tc, cfg.detector, eval, seed, ropts);
            res.mean_metrics = mean_attack_round_metrics(res.rounds, cfg.plan, truth);
            res.final_accuracy = res.rounds.back().accuracy;
            res.final_asr = res.rounds.back().asr;

            if (!opts.out_dir.empty()) {
                write_rounds_csv(res.rounds,
                                 opts.out_dir + "/rounds_seed" + std::to_string(seed) + ".csv",
                                 opts.wall_times);
                if (opts.traces) {
                    std::ofstream tf(opts.out_dir + "/traces_seed" + std::to_string(seed) +
                                     ".json");
                    tf << "[\n";
                    for (size_t i = 0; i < traces.size(); ++i) {
                        tf << traces[i].to_json();
                        if (i + 1 < traces.size()) tf << ",";
                        tf << "\n";
                    }
                    tf << "]\n";
                }
            }
            report.per_seed.push_back(std::move(res));
        }
    } catch (...) {
        if (!opts.out_dir.empty() && !report.per_seed.empty())
            write_report_json(report, opts.out_dir + "/report.json");
        throw;
    }

    double n = static_cast<double>(report.per_seed.size());
    for (const auto& r : report.per_seed) {
        report.mean_f1 += r.mean_metrics.f1 / n;
        report.mean_fpr += r.mean_metrics.fpr / n;
        report.mean_fnr += r.mean_metrics.fnr / n;
        report.mean_final_accuracy += r.final_accuracy / n;
        report.mean_final_asr += r.final_asr / n;
    }
    if (!opts.out_dir.empty()) write_report_json(report, opts.out_dir + "/report.json");
    return report;
}

void write_rounds_csv(const std::vector<RoundRecord>& rounds, const std::string& path,
                      bool wall_times) {
    std::ofstream f(path);
    if (!f) throw RuntimeFailure("cannot open for writing: " + path);
    f << "round,accuracy,asr,detect_time_s,decisions\n";
    char tbuf[32];
    for (const auto& r : rounds) {
        std::snprintf(tbuf, sizeof(tbuf), "%.3f", wall_times ? r.detect_time : 0.0);
        f << r.round << ',' << format_double(r.accuracy) << ',' << format_double(r.asr) << ','
          << tbuf << ',' << r.decisions.to_string() << '\n';
    }
    if (!f) throw RuntimeFailure("write failed: " + path);
}

void write_report_json(const ExperimentReport& report, const std::string& path) {
    nlohmann::json j;
    j["config"] = config_to_json(report.config);
    j["per_seed"] = nlohmann::json::array();
    for (const auto& r : report.per_seed) {
        nlohmann::json s;
        s["seed"] = r.seed;
        s["metrics"] = {{"tp", r.mean_metrics.tp}, {"fp", r.mean_metrics.fp},
                        {"tn", r.mean_metrics.tn}, {"fn", r.mean_metrics.fn},
                        {"fpr", r.mean_metrics.fpr}, {"fnr", r.mean_metrics.fnr},
                        {"f1", r.mean_metrics.f1}};
        s["final_accuracy"] = r.final_accuracy;
        s["final_asr"] = r.final_asr;
        j["per_seed"].push_back(s);
    }
    j["aggregate"] = {{"mean_f1", report.mean_f1},
                      {"mean_fpr", report.mean_fpr},
                      {"mean_fnr", report.mean_fnr},
                      {"mean_final_accuracy", report.mean_final_accuracy},
                      {"mean_final_asr", report.mean_final_asr}};
    std::ofstream f(path);
    if (!f) throw RuntimeFailure("cannot open for writing: " + path);
    f << j.dump(2) << '\n';
    if (!f) throw RuntimeFailure("write failed: " + path);
}

std::vector<TimingRow> timing_scan(const std::vector<int>& client_counts,
                                   const std::vector<int>& stimuli_sizes, int classes, int dim,
                                   int reps, uint64_t seed) {
    if (client_counts.empty() || stimuli_sizes.empty())
        throw ArgumentError("timing_scan: empty grid");
    if (reps < 1) throw ArgumentError("timing_scan: reps must be positive");
    std::vector<TimingRow> rows;
    for (int n : client_counts) {
        if (n < 3) throw ArgumentError("timing_scan: need at least 3 clients");
        for (int b : stimuli_sizes) {
            if (b < 1) throw ArgumentError("timing_scan: stimuli size must be positive");
            LabeledDataset pool = synth_blobs(classes, b, dim, 0.3, mix_seed(seed, 0xB0));
            StimulusSet stim = sample_stimuli(pool, b, mix_seed(seed, 0xB1));
            std::vector<MlpModel> models;
            models.reserve(n);
            for (int i = 0; i < n; ++i)
                models.push_back(init_mlp({dim, 16, classes},
                                          mix_seed(seed, 0xB2, static_cast<uint64_t>(i))));
            std::vector<const MlpModel*> ms;
            for (const auto& m : models) ms.push_back(&m);
            DetectorConfig dcfg;
            dcfg.epsilon_d = 0.05;

            // serial kernels so the measurement reflects algorithmic scaling
            // instead of thread scheduling overhead at micro sizes
            auto t0 = std::chrono::steady_clock::now();
            for (int r = 0; r < reps; ++r) {
                auto obs = serial::extract_observations(ms, stim);
                auto dist = serial::client_distance_matrix(obs);
                (void)detect(dist, dcfg, nullptr, false);
            }
            double total =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rows.push_back({n, b, reps, total, total / reps});
        }
    }
    return rows;
}

void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out) {
    out << "clients,stimuli_per_class,reps,seconds_total,seconds_per_detection\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.6f,%.9f", r.clients, r.stimuli_per_class,
                      r.reps, r.seconds_total, r.seconds_per_detection);
        out << buf << '\n';
    }
}

} // namespace fedrda
