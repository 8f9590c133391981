#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "conformal/sets.hpp"

namespace conformal {

struct UncertaintyQuantification {
    double u_pure = 0.0;    // (m + delta - 1) / K
    double lower = 0.0;     // max(L, 0)
    double upper = 0.0;     // min(H, 1)
    double variation = 0.0; // pre-clamp |H - L| = (1 + u_pure) / (n + 1)
    int m = 0;
    int num_classes = 0;
    int n = 0;
    double delta = 0.0;
    bool lower_clamped = false;
    bool upper_clamped = false;
    bool degenerate_empty = false;  // m = 0: point value 1
};

namespace detail {

inline void check_uncertainty_domain(int m, double delta, int num_classes, int n) {
    if (num_classes < 2) throw std::domain_error("K must be >= 2");
    if (m < 0 || m > num_classes) throw std::domain_error("m must be in [0,K]");
    if (delta < 0.0 || delta > 1.0) throw std::domain_error("delta must be in [0,1]");
    if (n < 1) throw std::domain_error("n must be >= 1");
}

}  // namespace detail

/// Pure model uncertainty (m + delta - 1) / K. Defined for m >= 1 only;
/// the empty-set case routes to the degenerate branch of quantify.
inline double pure_uncertainty(int m, double delta, int num_classes) {
    detail::check_uncertainty_domain(m, delta, num_classes, 1);
    if (m == 0) throw std::domain_error("pure_uncertainty undefined for m = 0");
    return (static_cast<double>(m) + delta - 1.0) / static_cast<double>(num_classes);
}

/// Certified interval width (1 + u_pure) / (n + 1).
inline double uncertainty_variation(double u_pure, int n) {
    if (n < 1) throw std::domain_error("n must be >= 1");
    if (u_pure < 0.0 || u_pure > 1.0) throw std::domain_error("u_pure must be in [0,1]");
    return (1.0 + u_pure) / static_cast<double>(n + 1);
}

/// Conformal model uncertainty bounds for a prediction set of size m.
///   m = 0: maximum uncertainty, lower = upper = 1, variation 0.
///   m >= 1: L = u*(1-delta) + delta - 1/(n+1), H = u*(n+2)/(n+1) + delta*(1-u),
///           reported clamped to [0,1] with the raw interval width preserved
///           in `variation`.
inline UncertaintyQuantification quantify(int m, double delta, int num_classes, int n) {
    detail::check_uncertainty_domain(m, delta, num_classes, n);
    UncertaintyQuantification q;
    q.m = m;
    q.num_classes = num_classes;
    q.n = n;
    q.delta = delta;
    q.u_pure = (static_cast<double>(m) + delta - 1.0) / static_cast<double>(num_classes);
    if (m == 0) {
        q.degenerate_empty = true;
        q.lower = 1.0;
        q.upper = 1.0;
        q.variation = 0.0;
        return q;
    }
    const double np1 = static_cast<double>(n + 1);
    const double raw_lower = q.u_pure * (1.0 - delta) + delta - 1.0 / np1;
    const double raw_upper =
        q.u_pure * (static_cast<double>(n + 2) / np1) + delta * (1.0 - q.u_pure);
    q.lower_clamped = raw_lower < 0.0;
    q.upper_clamped = raw_upper > 1.0;
    q.lower = std::max(raw_lower, 0.0);
    q.upper = std::min(raw_upper, 1.0);
    // |H - L| in closed form; the direct subtraction cancels badly for large n.
    q.variation = (1.0 + q.u_pure) / np1;
    return q;
}

inline std::vector<UncertaintyQuantification> quantify_batch(
    const std::vector<PredictionSet>& sets, double delta, int n) {
    std::vector<UncertaintyQuantification> out;
    out.reserve(sets.size());
    for (const auto& set : sets) {
        out.push_back(quantify(set.m, delta, set.num_classes, n));
    }
    return out;
}

}  // namespace conformal
