#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "conformal/calibration.hpp"

namespace conformal {

struct PredictionSet {
    std::vector<int> labels;  // sorted ascending
    int m = 0;
    int num_classes = 0;

    bool contains(int label) const {
        return std::binary_search(labels.begin(), labels.end(), label);
    }
};

/// Labels whose deterministic nonconformity score is <= q_hat. Membership
/// always uses the deterministic score, even when calibration was randomized.
inline PredictionSet build_set_generic(const ProbabilityVector& probs,
                                       const CalibrationResult& calib) {
    if (static_cast<int>(probs.size()) != calib.num_classes) {
        throw std::domain_error("probability vector has " + std::to_string(probs.size()) +
                                " classes, calibration expects " +
                                std::to_string(calib.num_classes));
    }
    PredictionSet set;
    set.num_classes = calib.num_classes;
    ScoreConfig det = calib.score_config;
    det.randomized = false;
    for (int y = 0; y < calib.num_classes; ++y) {
        if (calib.is_sentinel() || score_one(probs, y, det) <= calib.q_hat) {
            set.labels.push_back(y);
        }
    }
    set.m = static_cast<int>(set.labels.size());
    return set;
}

/// Softmax-threshold rule: labels with probs[y] >= 1 - q_hat. Coincides with
/// build_set_generic under the LAC score at the same q_hat.
inline PredictionSet build_set_threshold(const ProbabilityVector& probs, double q_hat) {
    PredictionSet set;
    set.num_classes = static_cast<int>(probs.size());
    const double threshold = 1.0 - q_hat;
    for (int y = 0; y < set.num_classes; ++y) {
        if (std::isinf(q_hat) || probs[y] >= threshold) set.labels.push_back(y);
    }
    set.m = static_cast<int>(set.labels.size());
    return set;
}

struct PredictionOutcome {
    PredictionSet set;
    bool covered = false;
};

inline std::vector<PredictionOutcome> predict_batch(const LabeledProbabilityDataset& data,
                                                    const CalibrationResult& calib) {
    validate_dataset(data);
    if (!data.empty() && data.num_classes != calib.num_classes) {
        throw std::domain_error("dataset K does not match calibration K");
    }
    std::vector<PredictionOutcome> out;
    out.reserve(data.rows.size());
    for (const auto& row : data.rows) {
        PredictionOutcome o;
        o.set = build_set_generic(row.probs, calib);
        o.covered = o.set.contains(row.label);
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace conformal
