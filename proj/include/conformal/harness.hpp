#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "conformal/calibration.hpp"
#include "conformal/rng.hpp"
#include "conformal/sets.hpp"
#include "conformal/uncertainty.hpp"

namespace conformal {

struct SynthConfig {
    int num_classes = 10;
    int n_cal = 500;
    int n_val = 500;
    int trials = 100;
    double dirichlet_alpha = 1.0;
    double temperature = 1.0;  // 1 = calibrated oracle; > 1 flattens the reported probs
    double delta = 0.1;
    ScoreConfig score_config;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (num_classes < 2) throw std::domain_error("K must be >= 2");
        if (n_cal < 1 || n_val < 1 || trials < 1) throw std::domain_error("sizes must be >= 1");
        if (!(dirichlet_alpha > 0.0)) throw std::domain_error("dirichlet_alpha must be > 0");
        if (!(temperature > 0.0)) throw std::domain_error("temperature must be > 0");
        if (delta < 0.0 || delta > 1.0) throw std::domain_error("delta must be in [0,1]");
    }
};

struct TrialResult {
    double coverage = 0.0;
    std::vector<int> set_sizes;
    std::vector<bool> covered;
    std::vector<UncertaintyQuantification> quantifications;
    double q_hat = 0.0;
};

struct HarnessReport {
    double mean_coverage = 0.0;
    std::vector<double> coverage_per_trial;
    double mean_set_size = 0.0;
    std::map<int, long> size_histogram;
    std::map<int, double> size_stratified_coverage;
    double theorem1_lower = 0.0;  // 1 - delta
    double theorem1_upper = 0.0;  // 1 - delta + 1/(n_cal+1)
    double mc_tolerance = 0.0;
    bool pass = false;
};

/// One synthetic row: p ~ Dirichlet(alpha), label ~ Categorical(p), reported
/// probs = p tempered (elementwise power 1/T, renormalized). The label draw
/// uses the untempered p, so temperature = 1 is calibrated by construction
/// and temperature != 1 miscalibrates the model output without breaking
/// exchangeability.
inline LabeledRow synth_row(int num_classes, double alpha, double temperature,
                            std::mt19937_64& eng) {
    LabeledRow row;
    row.probs.resize(num_classes);
    std::gamma_distribution<double> gamma(alpha, 1.0);
    double sum = 0.0;
    for (double& p : row.probs) {
        p = gamma(eng);
        sum += p;
    }
    for (double& p : row.probs) p /= sum;

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double draw = unif(eng);
    double cum = 0.0;
    row.label = num_classes - 1;
    for (int k = 0; k < num_classes; ++k) {
        cum += row.probs[k];
        if (draw < cum) {
            row.label = k;
            break;
        }
    }

    if (temperature != 1.0) {
        double tsum = 0.0;
        for (double& p : row.probs) {
            p = std::pow(p, 1.0 / temperature);
            tsum += p;
        }
        for (double& p : row.probs) p /= tsum;
    }
    return row;
}

/// Deterministic given (cfg.master_seed, trial_index); the temperature only
/// affects the tempering step, so runs at different temperatures on the same
/// seed are paired draw-for-draw.
inline LabeledProbabilityDataset synth_generate(const SynthConfig& cfg, int trial_index) {
    cfg.validate();
    LabeledProbabilityDataset data;
    data.num_classes = cfg.num_classes;
    auto eng = make_engine(cfg.master_seed, static_cast<std::uint64_t>(trial_index));
    const int total = cfg.n_cal + cfg.n_val;
    data.rows.reserve(total);
    for (int i = 0; i < total; ++i) {
        data.rows.push_back(synth_row(cfg.num_classes, cfg.dirichlet_alpha, cfg.temperature, eng));
    }
    return data;
}

inline TrialResult run_trial(const SynthConfig& cfg, int trial_index) {
    const auto data = synth_generate(cfg, trial_index);

    LabeledProbabilityDataset cal, val;
    cal.num_classes = val.num_classes = cfg.num_classes;
    cal.rows.assign(data.rows.begin(), data.rows.begin() + cfg.n_cal);
    val.rows.assign(data.rows.begin() + cfg.n_cal, data.rows.end());

    ScoreConfig score_config = cfg.score_config;
    score_config.seed = derive_stream(cfg.master_seed, static_cast<std::uint64_t>(trial_index) +
                                                           0x5ca1ab1eull);
    const auto calib = calibrate(cal, score_config, cfg.delta);
    const auto outcomes = predict_batch(val, calib);

    TrialResult result;
    result.q_hat = calib.q_hat;
    std::vector<PredictionSet> sets;
    sets.reserve(outcomes.size());
    long covered = 0;
    for (const auto& o : outcomes) {
        result.set_sizes.push_back(o.set.m);
        result.covered.push_back(o.covered);
        covered += o.covered ? 1 : 0;
        sets.push_back(o.set);
    }
    result.coverage = static_cast<double>(covered) / static_cast<double>(outcomes.size());
    result.quantifications = quantify_batch(sets, cfg.delta, cfg.n_cal);
    return result;
}

inline HarnessReport aggregate(const std::vector<TrialResult>& trials, const SynthConfig& cfg) {
    if (trials.empty()) throw std::domain_error("aggregate: no trials");
    HarnessReport report;
    long covered_total = 0, points_total = 0, size_total = 0;
    std::map<int, long> covered_by_size;
    for (const auto& t : trials) {
        report.coverage_per_trial.push_back(t.coverage);
        for (std::size_t i = 0; i < t.set_sizes.size(); ++i) {
            const int m = t.set_sizes[i];
            report.size_histogram[m]++;
            size_total += m;
            if (t.covered[i]) {
                covered_total++;
                covered_by_size[m]++;
            }
            points_total++;
        }
    }
    report.mean_coverage = static_cast<double>(covered_total) / static_cast<double>(points_total);
    report.mean_set_size = static_cast<double>(size_total) / static_cast<double>(points_total);
    for (const auto& [m, count] : report.size_histogram) {
        report.size_stratified_coverage[m] =
            static_cast<double>(covered_by_size[m]) / static_cast<double>(count);
    }
    report.theorem1_lower = 1.0 - cfg.delta;
    report.theorem1_upper = 1.0 - cfg.delta + 1.0 / static_cast<double>(cfg.n_cal + 1);
    report.mc_tolerance =
        3.0 * std::sqrt(cfg.delta * (1.0 - cfg.delta) / static_cast<double>(points_total));
    report.pass = report.mean_coverage >= report.theorem1_lower - report.mc_tolerance &&
                  report.mean_coverage <= report.theorem1_upper + report.mc_tolerance;
    return report;
}

inline HarnessReport run_harness(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<TrialResult> trials;
    trials.reserve(cfg.trials);
    for (int t = 0; t < cfg.trials; ++t) trials.push_back(run_trial(cfg, t));
    return aggregate(trials, cfg);
}

}  // namespace conformal
