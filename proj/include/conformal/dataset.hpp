#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace conformal {

// Probability vectors are plain double sequences; validation is explicit so
// ingestion can report the offending row.
using ProbabilityVector = std::vector<double>;

inline constexpr double kProbSumTolerance = 1e-6;

struct LabeledRow {
    ProbabilityVector probs;
    int label = 0;
};

struct LabeledProbabilityDataset {
    std::vector<LabeledRow> rows;
    int num_classes = 0;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

/// Checks the probability-vector contract: K >= 2, entries >= 0, sum within
/// kProbSumTolerance of 1. Throws std::domain_error naming the failure.
inline void validate_probability_vector(const ProbabilityVector& probs) {
    if (probs.size() < 2) {
        throw std::domain_error("probability vector needs at least 2 classes, got " +
                                std::to_string(probs.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw std::domain_error("probability entry " + std::to_string(i) +
                                    " is negative or non-finite");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
        throw std::domain_error("probabilities sum to " + std::to_string(sum) +
                                ", outside 1 +/- 1e-6");
    }
}

/// Clips negative entries to zero and rescales to unit sum. Used only when
/// the caller opted in via --renormalize.
inline void renormalize_probability_vector(ProbabilityVector& probs) {
    double sum = 0.0;
    for (double& p : probs) {
        if (!std::isfinite(p)) throw std::domain_error("non-finite probability entry");
        if (p < 0.0) p = 0.0;
        sum += p;
    }
    if (sum <= 0.0) throw std::domain_error("probability vector has zero total mass");
    for (double& p : probs) p /= sum;
}

inline void validate_dataset(const LabeledProbabilityDataset& data) {
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& row = data.rows[i];
        if (static_cast<int>(row.probs.size()) != data.num_classes) {
            throw std::domain_error("row " + std::to_string(i) + " has " +
                                    std::to_string(row.probs.size()) + " classes, expected " +
                                    std::to_string(data.num_classes));
        }
        try {
            validate_probability_vector(row.probs);
        } catch (const std::domain_error& e) {
            throw std::domain_error("row " + std::to_string(i) + ": " + e.what());
        }
        if (row.label < 0 || row.label >= data.num_classes) {
            throw std::domain_error("row " + std::to_string(i) + ": label " +
                                    std::to_string(row.label) + " out of range");
        }
    }
}

}  // namespace conformal
