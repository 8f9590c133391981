#include <doctest.h>

#include <random>

#include "conformal/nonconformity.hpp"

using namespace conformal;

namespace {

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

TEST_CASE("LAC score values") {
    CHECK(score_lac({0.7, 0.2, 0.1}, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(score_lac({1.0, 0.0}, 0) == 0.0);
    CHECK(score_lac({0.25, 0.25, 0.25, 0.25}, 3) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(score_lac({0.5, 0.5}, 2), std::domain_error);
    CHECK_THROWS_AS(score_lac({0.5, 0.5}, -1), std::domain_error);
}

TEST_CASE("LAC complement identity") {
    std::mt19937_64 eng(7);
    for (int i = 0; i < 200; ++i) {
        const int k = 2 + static_cast<int>(eng() % 20);
        const auto p = random_probs(eng, k);
        const int label = static_cast<int>(eng() % k);
        CHECK(score_lac(p, label) + p[label] == 1.0);
    }
}

TEST_CASE("APS deterministic score values") {
    CHECK(score_aps({0.5, 0.3, 0.2}, 1) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(score_aps({0.5, 0.3, 0.2}, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(score_aps({0.5, 0.3, 0.2}, 1, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("APS randomized extremes and monotone rank") {
    std::mt19937_64 eng(11);
    for (int i = 0; i < 200; ++i) {
        const int k = 2 + static_cast<int>(eng() % 30);
        const auto p = random_probs(eng, k);
        const int label = static_cast<int>(eng() % k);
        CHECK(score_aps(p, label, 1.0) == score_aps(p, label));
        // u=0 leaves exactly the mass strictly above
        CHECK(score_aps(p, label, 0.0) ==
              doctest::Approx(score_aps(p, label) - p[label]).epsilon(1e-12));
    }
    // strictly increasing down the descending-probability ranking
    const ProbabilityVector p{0.4, 0.3, 0.2, 0.1};
    double prev = -1.0;
    for (int label = 0; label < 4; ++label) {
        const double s = score_aps(p, label);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("APS ties broken by ascending label index") {
    // equal probs: label 1 ranks after label 0
    const ProbabilityVector p{0.4, 0.4, 0.2};
    CHECK(score_aps(p, 0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(score_aps(p, 1) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("RAPS score values and rank penalty") {
    CHECK(score_raps({0.5, 0.3, 0.2}, 2, 0.1, 1) == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(score_raps({0.5, 0.3, 0.2}, 0, 5.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(score_raps({0.5, 0.5}, 0, -0.1, 0), std::domain_error);
    CHECK_THROWS_AS(score_raps({0.5, 0.5}, 0, 0.1, 3), std::domain_error);
}

TEST_CASE("RAPS with lambda=0 is bit-exact APS") {
    std::mt19937_64 eng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const int k = 2 + static_cast<int>(eng() % 49);
        const auto p = random_probs(eng, k);
        const int label = static_cast<int>(eng() % k);
        const int k_reg = static_cast<int>(eng() % (k + 1));
        const double u = unif(eng);
        CHECK(score_raps(p, label, 0.0, k_reg) == score_aps(p, label));
        CHECK(score_raps(p, label, 0.0, k_reg, u) == score_aps(p, label, u));
    }
}

TEST_CASE("RAPS score range bound") {
    std::mt19937_64 eng(31);
    for (int i = 0; i < 200; ++i) {
        const int k = 2 + static_cast<int>(eng() % 20);
        const auto p = random_probs(eng, k);
        const int label = static_cast<int>(eng() % k);
        const double lambda = 0.5;
        const int k_reg = static_cast<int>(eng() % (k + 1));
        const double s = score_raps(p, label, lambda, k_reg);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0 + lambda * (k - k_reg) + 1e-12);
        CHECK(std::isfinite(s));
    }
}

TEST_CASE("score_batch") {
    LabeledProbabilityDataset data;
    data.num_classes = 2;
    data.rows = {{{0.7, 0.3}, 0}, {{0.6, 0.4}, 1}};
    ScoreConfig config;

    const auto scores = score_batch(data, config);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(scores[1] == doctest::Approx(0.6).epsilon(1e-15));

    CHECK(score_batch({}, config).empty());

    ScoreConfig rand_aps{ScoreKind::APS, 0.0, 0, true, 42};
    data.rows.push_back({{0.1, 0.9}, 0});
    data.rows.back().probs = {0.1, 0.9};
    const auto a = score_batch(data, rand_aps);
    const auto b = score_batch(data, rand_aps);
    CHECK(a == b);

    // invalid row reported with its index
    data.rows[1].probs = {0.6, 0.6};
    CHECK_THROWS_WITH_AS(score_batch(data, config),
                         doctest::Contains("row 1"), std::domain_error);
}
