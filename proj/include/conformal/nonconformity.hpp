#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conformal/dataset.hpp"
#include "conformal/rng.hpp"

namespace conformal {

enum class ScoreKind { LAC, APS, RAPS };

inline const char* to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::LAC: return "lac";
        case ScoreKind::APS: return "aps";
        case ScoreKind::RAPS: return "raps";
    }
    return "?";
}

inline ScoreKind score_kind_from_string(const std::string& s) {
    if (s == "lac") return ScoreKind::LAC;
    if (s == "aps") return ScoreKind::APS;
    if (s == "raps") return ScoreKind::RAPS;
    throw std::invalid_argument("unknown score kind: " + s);
}

struct ScoreConfig {
    ScoreKind kind = ScoreKind::LAC;
    double lambda = 0.0;   // RAPS rank-penalty weight
    int k_reg = 0;         // RAPS penalty-free rank count
    bool randomized = false;
    std::uint64_t seed = 0;
};

namespace detail {

inline void check_label(const ProbabilityVector& probs, int label) {
    if (label < 0 || label >= static_cast<int>(probs.size())) {
        throw std::domain_error("label " + std::to_string(label) + " out of range [0," +
                                std::to_string(probs.size()) + ")");
    }
}

// Descending-probability order with ties broken by ascending label index.
// std::stable_sort over an index array gives exactly that.
inline std::vector<int> descending_order(const ProbabilityVector& probs) {
    std::vector<int> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return probs[a] > probs[b]; });
    return order;
}

}  // namespace detail

/// LAC / threshold score: one minus the probability of the candidate label.
inline double score_lac(const ProbabilityVector& probs, int label) {
    detail::check_label(probs, label);
    return 1.0 - probs[label];
}

/// Cumulative-mass score. Deterministic: mass of all labels ranked strictly
/// above `label` plus the label's own mass. Randomized: the label's own mass
/// enters scaled by u in [0,1].
inline double score_aps(const ProbabilityVector& probs, int label,
                        std::optional<double> u = std::nullopt) {
    detail::check_label(probs, label);
    const auto order = detail::descending_order(probs);
    double mass_above = 0.0;
    for (int idx : order) {
        if (idx == label) break;
        mass_above += probs[idx];
    }
    return mass_above + (u ? *u : 1.0) * probs[label];
}

/// APS plus the linear rank penalty lambda * max(0, rank(label) - k_reg),
/// rank 1-based in the descending order. lambda = 0 reduces to score_aps on
/// the same inputs, including randomized mode with the same u.
inline double score_raps(const ProbabilityVector& probs, int label, double lambda, int k_reg,
                         std::optional<double> u = std::nullopt) {
    if (lambda < 0.0) throw std::domain_error("lambda must be >= 0");
    if (k_reg < 0 || k_reg > static_cast<int>(probs.size())) {
        throw std::domain_error("k_reg out of range [0,K]");
    }
    detail::check_label(probs, label);
    const auto order = detail::descending_order(probs);
    double mass_above = 0.0;
    int rank = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == label) {
            rank = static_cast<int>(i) + 1;
            break;
        }
        mass_above += probs[order[i]];
    }
    const double aps = mass_above + (u ? *u : 1.0) * probs[label];
    return aps + lambda * std::max(0, rank - k_reg);
}

/// Score of (probs, label) under `config`. In randomized mode the uniform
/// draw comes from (config.seed, row_index), so batch evaluation is pure.
inline double score_one(const ProbabilityVector& probs, int label, const ScoreConfig& config,
                        std::uint64_t row_index = 0) {
    std::optional<double> u;
    if (config.randomized && config.kind != ScoreKind::LAC) {
        u = row_uniform(config.seed, row_index);
    }
    switch (config.kind) {
        case ScoreKind::LAC: return score_lac(probs, label);
        case ScoreKind::APS: return score_aps(probs, label, u);
        case ScoreKind::RAPS: return score_raps(probs, label, config.lambda, config.k_reg, u);
    }
    throw std::logic_error("unreachable score kind");
}

inline std::vector<double> score_batch(const LabeledProbabilityDataset& data,
                                       const ScoreConfig& config) {
    std::vector<double> scores;
    scores.reserve(data.rows.size());
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& row = data.rows[i];
        try {
            validate_probability_vector(row.probs);
            scores.push_back(score_one(row.probs, row.label, config, i));
        } catch (const std::domain_error& e) {
            throw std::domain_error("row " + std::to_string(i) + ": " + e.what());
        }
    }
    return scores;
}

}  // namespace conformal
