#include "fedrda/fl.hpp"

#include <chrono>
#include <deque>
#include <exception>
#include <iostream>
#include <limits>

#include "fedrda/metrics.hpp"
#include "fedrda/rng.hpp"

namespace fedrda {

namespace {

// substream tags hashed together with the run seed so every consumer of
// randomness draws independently
constexpr uint64_t kStreamLocal = 0xA5;
constexpr uint64_t kStreamInit = 0xA4;

MlpModel apply_boost(const MlpModel& global, MlpModel trained, double boost) {
    if (boost == 1.0) return trained;
    for (size_t i = 0; i < trained.weights.size(); ++i) {
        for (size_t j = 0; j < trained.weights[i].values.size(); ++j) {
            double g = global.weights[i].values[j];
            trained.weights[i].values[j] = g + boost * (trained.weights[i].values[j] - g);
        }
        for (size_t j = 0; j < trained.biases[i].size(); ++j) {
            double g = global.biases[i][j];
            trained.biases[i][j] = g + boost * (trained.biases[i][j] - g);
        }
    }
    return trained;
}

MlpModel shifted(const MlpModel& base, const MlpModel& delta) {
    MlpModel out = base;
    for (size_t i = 0; i < out.weights.size(); ++i) {
        for (size_t j = 0; j < out.weights[i].values.size(); ++j)
            out.weights[i].values[j] += delta.weights[i].values[j];
        for (size_t j = 0; j < out.biases[i].size(); ++j)
            out.biases[i][j] += delta.biases[i][j];
    }
    return out;
}

} // namespace

MlpModel local_update(const MlpModel& global, const ClientState& client, const TrainConfig& cfg,
                      int round, const RoundPlan& plan, const MlpModel* prev_benign_mean_update) {
    if (client.data.size() == 0) throw ArgumentError("local_update: client has no data");
    TrainConfig local = cfg;
    local.seed = mix_seed(cfg.seed, kStreamLocal, static_cast<uint64_t>(client.id),
                          static_cast<uint64_t>(round));
    local.epochs = client.epochs;

    bool attacking = client.malicious && plan.attack_rounds.count(round) > 0;
    if (!attacking) return train_local(global, client.data, local);

    local.epochs = client.epochs + client.extra_epochs;
    MlpModel trained;
    if (client.stealth_lambda > 0.0) {
        if (prev_benign_mean_update == nullptr) {
            std::clog << "[warn] client " << client.id
                      << ": stealth term requested without a previous benign mean update; "
                         "training unregularized\n";
            trained = train_local(global, client.poisoned_data, local);
        } else {
            MlpModel anchor = shifted(global, *prev_benign_mean_update);
            trained = train_local_penalized(global, client.poisoned_data, local,
                                            client.stealth_lambda, &anchor);
        }
    } else {
        trained = train_local(global, client.poisoned_data, local);
    }
    return apply_boost(global, std::move(trained), client.boost);
}

MlpModel fedavg(const std::vector<MlpModel>& updates, const std::vector<size_t>& sizes,
                const DecisionVector& include) {
    if (updates.empty()) throw ArgumentError("fedavg: no updates");
    if (sizes.size() != updates.size()) throw ArgumentError("fedavg: size list mismatch");
    if (!include.dec.empty() && include.dec.size() != updates.size())
        throw ArgumentError("fedavg: decision vector length mismatch");
    for (const auto& u : updates)
        if (!same_shape(u, updates.front())) throw ShapeError("fedavg: model shape mismatch");

    auto included = [&](size_t i) { return include.dec.empty() || include.dec[i] == 0; };
    size_t total = 0;
    for (size_t i = 0; i < updates.size(); ++i)
        if (included(i)) total += sizes[i];
    if (total == 0) throw AggregationError("fedavg: no clients left to aggregate");

    MlpModel out = updates.front();
    for (auto& w : out.weights) std::fill(w.values.begin(), w.values.end(), 0.0);
    for (auto& b : out.biases) std::fill(b.begin(), b.end(), 0.0);
    for (size_t i = 0; i < updates.size(); ++i) {
        if (!included(i)) continue;
        double wgt = static_cast<double>(sizes[i]) / static_cast<double>(total);
        for (size_t l = 0; l < out.weights.size(); ++l) {
            const auto& src = updates[i].weights[l].values;
            auto& dst = out.weights[l].values;
            for (size_t j = 0; j < dst.size(); ++j) dst[j] += wgt * src[j];
            for (size_t j = 0; j < out.biases[l].size(); ++j)
                out.biases[l][j] += wgt * updates[i].biases[l][j];
        }
    }
    return out;
}

MlpModel fedavg(const std::vector<MlpModel>& updates, const std::vector<size_t>& sizes) {
    return fedavg(updates, sizes, DecisionVector{});
}

std::vector<RoundRecord> run_rounds(const std::vector<ClientState>& clients,
                                    const RoundPlan& plan, const TrainConfig& train_cfg,
                                    const DetectorConfig& detector_cfg, const EvalSets& eval,
                                    uint64_t seed, const RunOptions& opts) {
    if (clients.size() < 2) throw ArgumentError("run_rounds: need at least 2 clients");
    if (plan.total_rounds < 1) throw ArgumentError("run_rounds: need at least one round");
    for (int r : plan.attack_rounds)
        if (r < 0 || r >= plan.total_rounds)
            throw ArgumentError("run_rounds: attack round outside the schedule");
    if (plan.mode == AttackMode::replacement && plan.attack_rounds.size() > 1)
        throw ArgumentError("run_rounds: replacement mode attacks in a single round");
    if (opts.oracle_decisions && opts.oracle_decisions->dec.size() != clients.size())
        throw ArgumentError("run_rounds: oracle decision length mismatch");

    TrainConfig cfg = train_cfg;
    cfg.seed = seed;

    std::vector<int> dims;
    dims.push_back(static_cast<int>(clients.front().data.dim()));
    for (int h : opts.hidden_dims) dims.push_back(h);
    dims.push_back(eval.clean_test.class_count);
    MlpModel global = init_mlp(dims, mix_seed(seed, kStreamInit));

    bool any_malicious = false;
    bool any_stealth = false;
    for (const auto& c : clients) {
        any_malicious = any_malicious || c.malicious;
        any_stealth = any_stealth || (c.malicious && c.stealth_lambda > 0.0);
    }
    int first_attack = std::numeric_limits<int>::max();
    if (any_malicious && !plan.attack_rounds.empty()) first_attack = *plan.attack_rounds.begin();

    std::deque<ClientDistanceMatrix> calib;
    std::vector<RoundRecord> records;
    records.reserve(plan.total_rounds);
    std::vector<MlpModel> updates(clients.size());
    std::vector<size_t> sizes(clients.size());
    for (size_t i = 0; i < clients.size(); ++i) sizes[i] = clients[i].data.size();
    MlpModel prev_benign_delta;
    bool have_prev_delta = false;

    for (int t = 0; t < plan.total_rounds; ++t) {
        const MlpModel* prev = have_prev_delta ? &prev_benign_delta : nullptr;
        std::exception_ptr err;
#ifdef FEDRDA_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
#endif
        for (size_t i = 0; i < clients.size(); ++i) {
            try {
                updates[i] = local_update(global, clients[i], cfg, t, plan, prev);
            } catch (...) {
#ifdef FEDRDA_HAVE_OPENMP
#pragma omp critical
#endif
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);

        DecisionVector dec;
        dec.dec.assign(clients.size(), 0);
        double detect_seconds = 0.0;
        if (t >= plan.defense_enabled_from) {
            if (opts.oracle_decisions) {
                dec = *opts.oracle_decisions;
            } else {
                auto t0 = std::chrono::steady_clock::now();
                try {
                    std::vector<const MlpModel*> ms(clients.size());
                    for (size_t i = 0; i < clients.size(); ++i) ms[i] = &updates[i];
                    auto obs = opts.parallel
                                   ? extract_observations(ms, eval.stimuli, opts.output_kind)
                                   : serial::extract_observations(ms, eval.stimuli,
                                                                  opts.output_kind);
                    auto dist = opts.parallel ? client_distance_matrix(obs)
                                              : serial::client_distance_matrix(obs);
                    if (t < first_attack) {
                        calib.push_back(dist);
                        while (detector_cfg.calibration_window > 0 &&
                               calib.size() > static_cast<size_t>(detector_cfg.calibration_window))
                            calib.pop_front();
                    }
                    DetectorConfig round_cfg = detector_cfg;
                    if (!calib.empty())
                        round_cfg.epsilon_d = calibrate_epsilon_d(
                            std::vector<ClientDistanceMatrix>(calib.begin(), calib.end()));
                    DetectionTrace trace;
                    dec = detect(dist, round_cfg, opts.traces ? &trace : nullptr, opts.parallel);
                    if (opts.traces) opts.traces->push_back(std::move(trace));
                } catch (const std::exception& e) {
                    std::clog << "[warn] round " << t << ": detection failed (" << e.what()
                              << "); aggregating every client\n";
                    dec.dec.assign(clients.size(), 0);
                    if (opts.traces) opts.traces->push_back(DetectionTrace{});
                }
                detect_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        }

        if (any_stealth) {
            size_t benign = 0;
            for (size_t i = 0; i < clients.size(); ++i)
                if (!clients[i].malicious) ++benign;
            if (benign > 0) {
                prev_benign_delta = global;
                for (auto& w : prev_benign_delta.weights)
                    std::fill(w.values.begin(), w.values.end(), 0.0);
                for (auto& b : prev_benign_delta.biases) std::fill(b.begin(), b.end(), 0.0);
                double inv = 1.0 / static_cast<double>(benign);
                for (size_t i = 0; i < clients.size(); ++i) {
                    if (clients[i].malicious) continue;
                    for (size_t l = 0; l < prev_benign_delta.weights.size(); ++l) {
                        auto& dw = prev_benign_delta.weights[l].values;
                        for (size_t j = 0; j < dw.size(); ++j)
                            dw[j] += inv * (updates[i].weights[l].values[j] -
                                            global.weights[l].values[j]);
                        for (size_t j = 0; j < prev_benign_delta.biases[l].size(); ++j)
                            prev_benign_delta.biases[l][j] +=
                                inv * (updates[i].biases[l][j] - global.biases[l][j]);
                    }
                }
                have_prev_delta = true;
            }
        }

        try {
            global = fedavg(updates, sizes, dec);
        } catch (const AggregationError& e) {
            std::clog << "[warn] round " << t << ": " << e.what()
                      << "; keeping the previous global model\n";
        }

        RoundRecord rec;
        rec.round = t;
        rec.global_model = global;
        rec.decisions = dec;
        rec.accuracy = accuracy(global, eval.clean_test);
        rec.asr = eval.backdoor_test.size() == 0
                      ? 0.0
                      : attack_success_rate(global, eval.backdoor_test, eval.target_label);
        rec.detect_time = detect_seconds;
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace fedrda
