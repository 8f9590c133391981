// Command-line workflow: calibrate / predict / quantify / simulate / figures.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "conformal/io.hpp"

namespace {

using namespace conformal;

struct DataArgs {
    std::string path;
    std::string format = "csv";
    bool renormalize = false;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.path, "input dataset file")->required();
    cmd->add_option("--format", args.format, "dataset format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    cmd->add_flag("--renormalize", args.renormalize,
                  "clip negative probabilities to 0 and rescale to unit sum");
}

LabeledProbabilityDataset load(const DataArgs& args) {
    return load_dataset(args.path, dataset_format_from_string(args.format), args.renormalize);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conformal prediction sets with certified uncertainty bounds"};
    app.require_subcommand(1);

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "compute the conformal threshold q_hat");
    DataArgs cal_data;
    add_data_options(cal_cmd, cal_data);
    std::string score_name = "lac";
    double lambda = 0.0;
    int k_reg = 0;
    bool randomized = false;
    std::uint64_t seed = 0;
    double delta = 0.1;
    std::string cal_out;
    cal_cmd->add_option("--score", score_name, "nonconformity score: lac, aps, or raps")
        ->check(CLI::IsMember({"lac", "aps", "raps"}));
    cal_cmd->add_option("--lambda", lambda, "RAPS rank-penalty weight");
    cal_cmd->add_option("--kreg", k_reg, "RAPS penalty-free rank count");
    cal_cmd->add_flag("--randomized", randomized, "use randomized APS/RAPS scores");
    cal_cmd->add_option("--seed", seed, "seed for randomized scores");
    cal_cmd->add_option("--delta", delta, "coverage error level")->required();
    cal_cmd->add_option("--out", cal_out, "output calibration JSON")->required();

    // predict
    auto* pred_cmd = app.add_subcommand("predict", "build prediction sets from a calibration");
    DataArgs pred_data;
    add_data_options(pred_cmd, pred_data);
    std::string pred_calib, pred_out;
    pred_cmd->add_option("--calib", pred_calib, "calibration JSON from `calibrate`")->required();
    pred_cmd->add_option("--out", pred_out, "output prediction sets JSONL")->required();

    // quantify
    auto* uq_cmd = app.add_subcommand("quantify", "certified uncertainty bounds per set");
    std::string uq_sets, uq_calib, uq_out;
    uq_cmd->add_option("--sets", uq_sets, "prediction sets JSONL from `predict`")->required();
    uq_cmd->add_option("--calib", uq_calib, "calibration JSON")->required();
    uq_cmd->add_option("--out", uq_out, "output quantifications JSONL")->required();

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo coverage validation");
    std::string sim_config, sim_out, sim_trials_csv;
    sim_cmd->add_option("--config", sim_config, "simulation config JSON")->required();
    sim_cmd->add_option("--out", sim_out, "output report JSON")->required();
    sim_cmd->add_option("--trials-csv", sim_trials_csv, "optional per-trial coverage CSV");

    // figures
    auto* fig_cmd = app.add_subcommand("figures", "emit bound-curve data as CSV");
    std::string fig_spec, fig_out;
    fig_cmd->add_option("--spec", fig_spec, "figure spec JSON")->required();
    fig_cmd->add_option("--out", fig_out, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cal_cmd->parsed()) {
            ScoreConfig config;
            config.kind = score_kind_from_string(score_name);
            config.lambda = lambda;
            config.k_reg = k_reg;
            config.randomized = randomized;
            config.seed = seed;
            if (delta == 1.0) {
                std::cerr << "warning: delta=1 is degenerate; q_hat is the minimum score\n";
            }
            const auto calib = calibrate(load(cal_data), config, delta);
            atomic_write(cal_out, to_json(calib).dump(2) + "\n");
        } else if (pred_cmd->parsed()) {
            const auto calib = calibration_from_json(json::parse(read_file(pred_calib)));
            const auto outcomes = predict_batch(load(pred_data), calib);
            atomic_write(pred_out, prediction_sets_to_jsonl(outcomes));
        } else if (uq_cmd->parsed()) {
            const auto calib = calibration_from_json(json::parse(read_file(uq_calib)));
            const auto outcomes = prediction_sets_from_jsonl(read_file(uq_sets));
            std::vector<PredictionSet> sets;
            sets.reserve(outcomes.size());
            for (const auto& o : outcomes) sets.push_back(o.set);
            const auto qs = quantify_batch(sets, calib.delta, calib.n);
            atomic_write(uq_out, quantifications_to_jsonl(qs));
        } else if (sim_cmd->parsed()) {
            const auto cfg = synth_config_from_json(json::parse(read_file(sim_config)));
            const auto report = run_harness(cfg);
            atomic_write(sim_out, to_json(report).dump(2) + "\n");
            if (!sim_trials_csv.empty()) atomic_write(sim_trials_csv, per_trial_csv(report));
        } else if (fig_cmd->parsed()) {
            const auto spec = figure_spec_from_json(json::parse(read_file(fig_spec)));
            atomic_write(fig_out, emit_figure_data(spec));
        }
    } catch (const IoError& e) {
        std::cerr << e.to_json().dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"code", "error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
