#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedrda/experiment.hpp"

namespace {

using namespace fedrda;

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file: " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

ClientDistanceMatrix load_distance_csv(const std::string& path) {
    ClientDistanceMatrix d;
    d.mat = load_matrix_csv(path);
    if (d.mat.rows != d.mat.cols)
        throw FormatError("distance matrix must be square: " + path);
    return d;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw RuntimeFailure("cannot open for writing: " + path);
    f << text;
    if (!f) throw RuntimeFailure("write failed: " + path);
}

int run_simulate(const std::string& config_path, int64_t seed_override,
                 const std::string& out_dir, const std::string& mode_override, bool wall_times,
                 bool trace, bool serial) {
    ExperimentConfig cfg = config_from_json(read_json_file(config_path));
    if (seed_override >= 0) cfg.seeds = {static_cast<uint64_t>(seed_override)};
    if (mode_override == "basic") cfg.detector.mode = DetectMode::basic;
    else if (mode_override == "refined") cfg.detector.mode = DetectMode::refined;
    else if (!mode_override.empty()) throw ConfigError("--mode must be basic or refined");

    RunExperimentOptions opts;
    opts.parallel = !serial;
    opts.wall_times = wall_times;
    opts.traces = trace;
    opts.out_dir = out_dir;
    ExperimentReport report = run_experiment(cfg, opts);

    std::cout << "seeds " << report.per_seed.size() << "\n"
              << "mean_f1 " << format_double(report.mean_f1) << "\n"
              << "mean_fpr " << format_double(report.mean_fpr) << "\n"
              << "mean_fnr " << format_double(report.mean_fnr) << "\n"
              << "mean_final_accuracy " << format_double(report.mean_final_accuracy) << "\n"
              << "mean_final_asr " << format_double(report.mean_final_asr) << "\n";
    return 0;
}

int run_detect(const std::string& matrix_path, const DetectorConfig& cfg, bool trace,
               const std::string& out_path) {
    ClientDistanceMatrix dist = load_distance_csv(matrix_path);
    DetectionTrace tr;
    DecisionVector dec = detect(dist, cfg, trace ? &tr : nullptr);

    nlohmann::json out;
    out["decisions"] = dec.to_string();
    std::vector<size_t> flagged;
    for (size_t i = 0; i < dec.size(); ++i)
        if (dec.dec[i]) flagged.push_back(i);
    out["flagged"] = flagged;
    if (trace) out["trace"] = nlohmann::json::parse(tr.to_json());

    std::string text = out.dump(2) + "\n";
    if (out_path.empty()) std::cout << text;
    else write_text(out_path, text);
    return 0;
}

int run_calibrate(const std::vector<std::string>& matrix_paths, const std::string& out_path) {
    std::vector<ClientDistanceMatrix> history;
    history.reserve(matrix_paths.size());
    for (const auto& p : matrix_paths) history.push_back(load_distance_csv(p));
    double eps = calibrate_epsilon_d(history);

    std::cout << "epsilon_d " << format_double(eps) << "\n";
    if (!out_path.empty()) {
        nlohmann::json out;
        out["epsilon_d"] = eps;
        write_text(out_path, out.dump(2) + "\n");
    }
    return 0;
}

int run_timing(const std::vector<int>& clients, const std::vector<int>& stimuli, int classes,
               int dim, int reps, uint64_t seed, const std::string& out_path) {
    std::vector<TimingRow> rows = timing_scan(clients, stimuli, classes, dim, reps, seed);
    if (out_path.empty()) {
        write_timing_csv(rows, std::cout);
    } else {
        std::ofstream f(out_path);
        if (!f) throw RuntimeFailure("cannot open for writing: " + out_path);
        write_timing_csv(rows, f);
        if (!f) throw RuntimeFailure("write failed: " + out_path);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated backdoor detection via representational dissimilarity"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "run a full experiment from a JSON config");
    std::string config_path;
    int64_t seed_override = -1;
    std::string out_dir = "out";
    std::string mode_override;
    bool wall_times = false, trace_flag = false, serial = false;
    sim->add_option("--config", config_path, "experiment config JSON")->required();
    sim->add_option("--seed", seed_override, "run a single seed instead of the config list");
    sim->add_option("--out-dir", out_dir, "output directory");
    sim->add_option("--mode", mode_override, "detector mode override: basic|refined");
    sim->add_flag("--wall-times", wall_times, "record measured detection seconds in the CSVs");
    sim->add_flag("--trace", trace_flag, "dump per-round detection traces");
    sim->add_flag("--serial", serial, "use the single-thread reference kernels");

    auto* det = app.add_subcommand("detect", "run the detector on a distance-matrix CSV");
    std::string matrix_path, det_out;
    DetectorConfig dcfg;
    std::string det_mode = "refined";
    bool det_trace = false;
    det->add_option("--matrix", matrix_path, "square distance matrix CSV")->required();
    det->add_option("--delta", dcfg.delta, "LOF threshold");
    det->add_option("--epsilon-d", dcfg.epsilon_d, "distance bound for refinement");
    det->add_option("--mode", det_mode, "basic|refined");
    det->add_option("--min-remaining", dcfg.min_remaining, "stop when fewer clients survive");
    det->add_flag("--trace", det_trace, "include the detection trace in the output");
    det->add_option("--out", det_out, "write the JSON result here instead of stdout");

    auto* cal = app.add_subcommand("calibrate",
                                   "derive epsilon_d from honest-round distance matrices");
    std::vector<std::string> cal_paths;
    std::string cal_out;
    cal->add_option("matrices", cal_paths, "distance matrix CSVs")->required()->expected(-1);
    cal->add_option("--out", cal_out, "write {\"epsilon_d\": ...} here");

    auto* tim = app.add_subcommand("timing", "detection pipeline wall-time scan");
    std::vector<int> tim_clients = {10};
    std::vector<int> tim_stimuli = {20};
    int tim_classes = 10, tim_dim = 16, tim_reps = 5;
    uint64_t tim_seed = 7;
    std::string tim_out;
    tim->add_option("--clients", tim_clients, "client counts");
    tim->add_option("--stimuli", tim_stimuli, "stimuli per class");
    tim->add_option("--classes", tim_classes, "class count");
    tim->add_option("--dim", tim_dim, "input dimension");
    tim->add_option("--reps", tim_reps, "repetitions per grid point");
    tim->add_option("--seed", tim_seed, "model init seed");
    tim->add_option("--out", tim_out, "write the CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed())
            return run_simulate(config_path, seed_override, out_dir, mode_override, wall_times,
                                trace_flag, serial);
        if (det->parsed()) {
            if (det_mode == "basic") dcfg.mode = DetectMode::basic;
            else if (det_mode == "refined") dcfg.mode = DetectMode::refined;
            else throw ConfigError("--mode must be basic or refined");
            return run_detect(matrix_path, dcfg, det_trace, det_out);
        }
        if (cal->parsed()) return run_calibrate(cal_paths, cal_out);
        if (tim->parsed())
            return run_timing(tim_clients, tim_stimuli, tim_classes, tim_dim, tim_reps, tim_seed,
                              tim_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
