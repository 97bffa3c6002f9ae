#include <chrono>
#include <cstdio>
#include <vector>

#include "fedrda/experiment.hpp"
#include "fedrda/rng.hpp"

using namespace fedrda;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        double s = seconds_since(t0);
        if (s < best) best = s;
    }
    return best;
}

void print_row(const char* name, double serial_s, double parallel_s) {
    std::printf("%-28s %10.4f ms %10.4f ms %8.2fx\n", name, serial_s * 1e3, parallel_s * 1e3,
                serial_s / parallel_s);
}

} // namespace

int main() {
    const int clients = 16;
    const int classes = 10;
    const int dim = 64;
    const int per_class = 40;
    const int reps = 5;

    LabeledDataset pool = synth_blobs(classes, per_class, dim, 0.3, 11);
    StimulusSet stim = sample_stimuli(pool, per_class, 12);

    std::vector<MlpModel> models;
    std::vector<const MlpModel*> ms;
    for (int i = 0; i < clients; ++i)
        models.push_back(init_mlp({dim, 32, classes}, mix_seed(13, static_cast<uint64_t>(i))));
    for (const auto& m : models) ms.push_back(&m);

    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    double s_ext = best_of(reps, [&] { (void)serial::extract_observations(ms, stim); });
    double p_ext = best_of(reps, [&] { (void)extract_observations(ms, stim); });
    print_row("extract_observations", s_ext, p_ext);

    auto obs = serial::extract_observations(ms, stim);
    double s_dist = best_of(reps, [&] { (void)serial::client_distance_matrix(obs); });
    double p_dist = best_of(reps, [&] { (void)client_distance_matrix(obs); });
    print_row("client_distance_matrix", s_dist, p_dist);

    auto dist = serial::client_distance_matrix(obs);
    const int lof_reps = 200;
    double s_lof = best_of(reps, [&] {
        for (int i = 0; i < lof_reps; ++i) (void)serial::lof_all(dist, clients / 2);
    });
    double p_lof = best_of(reps, [&] {
        for (int i = 0; i < lof_reps; ++i) (void)lof_all(dist, clients / 2);
    });
    print_row("lof_all (x200)", s_lof, p_lof);

    Partition part = partition_iid(pool, clients, 14);
    std::vector<ClientState> cs(clients);
    for (int i = 0; i < clients; ++i) {
        cs[i].id = i;
        cs[i].data = subset(pool, part.assignments[i]);
        cs[i].epochs = 2;
    }
    RoundPlan plan;
    plan.total_rounds = 1;
    DetectorConfig dcfg;
    EvalSets eval;
    eval.clean_test = pool;
    eval.stimuli = stim;
    TrainConfig tc;
    tc.epochs = 2;

    RunOptions serial_opts;
    serial_opts.parallel = false;
    double s_round = best_of(2, [&] { (void)run_rounds(cs, plan, tc, dcfg, eval, 15, serial_opts); });
    RunOptions par_opts;
    double p_round = best_of(2, [&] { (void)run_rounds(cs, plan, tc, dcfg, eval, 15, par_opts); });
    print_row("full round (train+detect)", s_round, p_round);

    return 0;
}
