#include <doctest.h>

#include <limits>
#include <random>

#include "conformal/sets.hpp"

using namespace conformal;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CalibrationResult make_calib(double q_hat, int k, ScoreKind kind = ScoreKind::LAC) {
    CalibrationResult calib;
    calib.q_hat = q_hat;
    calib.n = 100;
    calib.delta = 0.1;
    calib.num_classes = k;
    calib.score_config.kind = kind;
    return calib;
}

ProbabilityVector random_probs(std::mt19937_64& eng, int k) {
    std::gamma_distribution<double> gamma(1.0, 1.0);
    ProbabilityVector p(k);
    double sum = 0.0;
    for (double& v : p) {
        v = gamma(eng);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

TEST_CASE("build_set_generic worked examples") {
    const auto lac = build_set_generic({0.7, 0.2, 0.1}, make_calib(0.85, 3));
    CHECK(lac.labels == std::vector<int>{0, 1});
    CHECK(lac.m == 2);

    const auto full = build_set_generic({0.7, 0.2, 0.1}, make_calib(kInf, 3));
    CHECK(full.m == 3);

    const auto aps = build_set_generic({0.5, 0.3, 0.2}, make_calib(0.5, 3, ScoreKind::APS));
    CHECK(aps.labels == std::vector<int>{0});

    CHECK_THROWS_AS(build_set_generic({0.5, 0.5}, make_calib(0.5, 3)), std::domain_error);
}

TEST_CASE("build_set_threshold worked examples") {
    CHECK(build_set_threshold({0.7, 0.2, 0.05, 0.05}, 0.4).labels == std::vector<int>{0});
    CHECK(build_set_threshold({0.7, 0.2, 0.05, 0.05}, 0.85).labels == std::vector<int>{0, 1});
    CHECK(build_set_threshold({0.7, 0.2, 0.05, 0.05}, 1.0).m == 4);
}

TEST_CASE("threshold rule equals generic rule under LAC") {
    std::mt19937_64 eng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(eng() % 20);
        const auto p = random_probs(eng, k);
        const double q = unif(eng) * 1.2 - 0.1;
        CHECK(build_set_threshold(p, q).labels == build_set_generic(p, make_calib(q, k)).labels);
    }
}

TEST_CASE("nesting in q_hat") {
    std::mt19937_64 eng(19);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const ScoreKind kinds[] = {ScoreKind::LAC, ScoreKind::APS, ScoreKind::RAPS};
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(eng() % 20);
        const auto p = random_probs(eng, k);
        double q1 = unif(eng) * 1.5, q2 = unif(eng) * 1.5;
        if (q1 > q2) std::swap(q1, q2);
        auto calib1 = make_calib(q1, k, kinds[trial % 3]);
        auto calib2 = make_calib(q2, k, kinds[trial % 3]);
        calib1.score_config.lambda = calib2.score_config.lambda = 0.1;
        calib1.score_config.k_reg = calib2.score_config.k_reg = 1;
        const auto small = build_set_generic(p, calib1);
        const auto big = build_set_generic(p, calib2);
        for (int y : small.labels) CHECK(big.contains(y));
    }
}

TEST_CASE("deterministic APS sets are top-k shaped") {
    std::mt19937_64 eng(29);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int k = 2 + static_cast<int>(eng() % 15);
        const auto p = random_probs(eng, k);
        const auto set = build_set_generic(p, make_calib(unif(eng) * 1.2, k, ScoreKind::APS));
        // every excluded label has probability <= every included label
        double min_in = 2.0, max_out = -1.0;
        for (int y = 0; y < k; ++y) {
            if (set.contains(y)) {
                min_in = std::min(min_in, p[y]);
            } else {
                max_out = std::max(max_out, p[y]);
            }
        }
        if (set.m > 0 && set.m < k) CHECK(max_out <= min_in);
    }
}

TEST_CASE("membership uses the deterministic score even after randomized calibration") {
    auto calib = make_calib(0.5, 3, ScoreKind::APS);
    calib.score_config.randomized = true;
    calib.score_config.seed = 99;
    const auto set = build_set_generic({0.5, 0.3, 0.2}, calib);
    CHECK(set.labels == std::vector<int>{0});
}

TEST_CASE("predict_batch coverage flags") {
    LabeledProbabilityDataset data;
    data.num_classes = 3;
    data.rows = {{{0.7, 0.2, 0.1}, 2}, {{0.9, 0.05, 0.05}, 0}};
    const auto outcomes = predict_batch(data, make_calib(0.85, 3));
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].set.m == 2);
    CHECK_FALSE(outcomes[0].covered);
    CHECK(outcomes[1].set.m == 1);
    CHECK(outcomes[1].covered);

    const auto full = predict_batch(data, make_calib(kInf, 3));
    for (const auto& o : full) {
        CHECK(o.covered);
        CHECK(o.set.m == 3);
    }
}
