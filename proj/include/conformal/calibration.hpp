#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "conformal/nonconformity.hpp"

namespace conformal {

struct CalibrationResult {
    double q_hat = 0.0;  // +infinity sentinel when ceil((n+1)(1-delta)) > n
    int n = 0;
    double delta = 0.0;
    int num_classes = 0;
    ScoreConfig score_config;

    bool is_sentinel() const { return std::isinf(q_hat); }
};

/// Rank r = ceil((n+1)(1-delta)), computed with a snap-to-integer guard so
/// that e.g. 10 * (1 - 0.1) lands on 9 rather than rounding up off a few ulps.
/// delta = 1 gives r = 0, clamped to 1 (degenerate full-error level).
inline long conformal_rank(long n, double delta) {
    if (delta < 0.0 || delta > 1.0) throw std::domain_error("delta must be in [0,1]");
    const double x = static_cast<double>(n + 1) * (1.0 - delta);
    const double nearest = std::round(x);
    long r;
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) {
        r = static_cast<long>(nearest);
    } else {
        r = static_cast<long>(std::ceil(x));
    }
    return std::max<long>(r, 1);
}

/// The r-th smallest calibration score (1-based, ties kept, no interpolation),
/// or +infinity when r > n so downstream sets include every label.
inline double conformal_quantile(std::vector<double> scores, double delta) {
    if (scores.empty()) throw std::domain_error("conformal_quantile: empty score sequence");
    for (double s : scores) {
        if (!std::isfinite(s)) throw std::domain_error("conformal_quantile: non-finite score");
    }
    const long n = static_cast<long>(scores.size());
    const long r = conformal_rank(n, delta);
    if (r > n) return std::numeric_limits<double>::infinity();
    std::nth_element(scores.begin(), scores.begin() + (r - 1), scores.end());
    return scores[r - 1];
}

inline CalibrationResult calibrate(const LabeledProbabilityDataset& data,
                                   const ScoreConfig& config, double delta) {
    if (data.empty()) throw std::domain_error("calibrate: empty dataset");
    validate_dataset(data);
    CalibrationResult result;
    result.q_hat = conformal_quantile(score_batch(data, config), delta);
    result.n = static_cast<int>(data.size());
    result.delta = delta;
    result.num_classes = data.num_classes;
    result.score_config = config;
    return result;
}

}  // namespace conformal
