#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "chartret/errors.hpp"
#include "chartret/numerics.hpp"
#include "chartret/rng.hpp"

using namespace chartret;
using Approx = doctest::Approx;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

double ref_cosine(const std::vector<double>& u, const std::vector<double>& v) {
    big dot = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += big(u[i]) * big(v[i]);
        uu += big(u[i]) * big(u[i]);
        vv += big(v[i]) * big(v[i]);
    }
    return static_cast<double>(dot / (sqrt(uu) * sqrt(vv)));
}

} // namespace

TEST_CASE("cosine similarity examples") {
    const std::vector<double> e1{1, 0}, e2{0, 1};
    CHECK(cosine_similarity(e1, e1) == 1.0);
    CHECK(cosine_similarity(e1, e2) == 0.0);
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    // 32 / sqrt(14 * 77)
    CHECK(cosine_similarity(a, b) == Approx(0.97463184619707621).epsilon(1e-15));
    CHECK(std::abs(cosine_similarity(a, b) - ref_cosine(a, b)) < 1e-12);
}

TEST_CASE("cosine similarity errors") {
    const std::vector<double> a{1, 2}, b{1, 2, 3}, z{0, 0}, empty;
    CHECK_THROWS_AS(cosine_similarity(a, b), std::invalid_argument);
    CHECK_THROWS_AS(cosine_similarity(empty, empty), std::invalid_argument);
    CHECK_THROWS_AS(cosine_similarity(a, z), ZeroNormError);
    CHECK_THROWS_AS(cosine_similarity(z, a), ZeroNormError);
}

TEST_CASE("cosine similarity properties") {
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<double> u(n), v(n);
        for (auto& x : u) x = rng.normal();
        for (auto& x : v) x = rng.normal();
        const double c = cosine_similarity(u, v);
        CHECK(std::abs(c) <= 1.0 + 1e-9);
        CHECK(std::abs(c - cosine_similarity(v, u)) < 1e-15);
        const double s = rng.uniform(0.01, 100.0), t = rng.uniform(0.01, 100.0);
        auto su = u, tv = v;
        for (auto& x : su) x *= s;
        for (auto& x : tv) x *= t;
        CHECK(std::abs(cosine_similarity(su, tv) - c) < 1e-9);
        CHECK(std::abs(c - ref_cosine(u, v)) < 1e-9);
    }
}

TEST_CASE("affine unit-interval map") {
    CHECK(to_unit_interval(1.0) == 1.0);
    CHECK(to_unit_interval(-1.0) == 0.0);
    CHECK(to_unit_interval(0.0) == 0.5);
    CHECK(to_unit_interval(1.0 + 1e-12) == 1.0);
    CHECK(to_unit_interval(-1.0 - 1e-12) == 0.0);
    CHECK_THROWS_AS(to_unit_interval(1.1), std::out_of_range);
    CHECK_THROWS_AS(to_unit_interval(std::nan("")), std::out_of_range);
}

TEST_CASE("softmax selection examples") {
    const std::vector<double> zeros{0, 0}, two{2, 0}, single{5};
    CHECK(softmax_select(zeros, 0) == 0.5);
    // e^2 / (e^2 + 1)
    CHECK(softmax_select(two, 0) == Approx(0.88079707797788244).epsilon(1e-15));
    CHECK(softmax_select(single, 0) == 1.0);
    CHECK_THROWS_AS(softmax_select(two, 2), std::out_of_range);
    CHECK_THROWS_AS(softmax_select(std::vector<double>{}, 0), std::invalid_argument);
}

TEST_CASE("softmax selection properties") {
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        const std::size_t m = 2 + rng.below(8);
        std::vector<double> y(m);
        for (auto& x : y) x = rng.uniform(-50, 50);
        double sum = 0.0;
        for (std::size_t s = 0; s < m; ++s) sum += softmax_select(y, s);
        CHECK(std::abs(sum - 1.0) < 1e-9);
        const double shift = rng.uniform(-1000, 1000);
        auto shifted = y;
        for (auto& x : shifted) x += shift;
        const std::size_t s = rng.below(m);
        CHECK(std::abs(softmax_select(shifted, s) - softmax_select(y, s)) < 1e-9);
    }
    // large logits do not overflow
    const std::vector<double> huge{1000, 999};
    CHECK(softmax_select(huge, 0) == Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("focal loss examples") {
    CHECK(focal_loss(1.0, {}) == 0.0);
    CHECK(focal_loss(1.0, {0.9, 5.0}) == 0.0);
    // 0.25 * ln 2
    CHECK(focal_loss(0.5, {0.25, 0.0}) == Approx(0.17328679513998632).epsilon(1e-15));
    // 0.25 * 0.25 * ln 2
    CHECK(focal_loss(0.5, {0.25, 2.0}) == Approx(0.04332169878499658).epsilon(1e-15));
    CHECK_THROWS_AS(focal_loss(0.0, {}), std::out_of_range);
    CHECK_THROWS_AS(focal_loss(1.5, {}), std::out_of_range);
    CHECK_THROWS_AS(focal_loss(0.5, {0.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(focal_loss(0.5, {0.5, -1.0}), std::invalid_argument);
}

TEST_CASE("focal loss properties") {
    Rng rng(9);
    for (int i = 0; i < 300; ++i) {
        const FocalLossParams params{rng.uniform(0.01, 1.0), rng.uniform(0.0, 5.0)};
        const double p = rng.uniform(0.001, 0.998);
        const double q = p + rng.uniform(1e-4, 1.0 - p);
        CHECK(focal_loss(p, params) >= 0.0);
        CHECK(focal_loss(p, params) > focal_loss(q, params));
        const FocalLossParams ce{params.alpha, 0.0};
        CHECK(std::abs(focal_loss(p, ce) - (-params.alpha * std::log(p))) < 1e-12);
    }
}

TEST_CASE("inverse-frequency alpha") {
    const std::vector<std::size_t> counts{2, 1};
    const auto alpha = inverse_frequency_alpha(counts);
    REQUIRE(alpha.size() == 2);
    CHECK(alpha[0] == Approx(1.0 / 3.0));
    CHECK(alpha[1] == Approx(2.0 / 3.0));
    CHECK_THROWS_AS(inverse_frequency_alpha(std::vector<std::size_t>{3, 0}), std::invalid_argument);
    CHECK_THROWS_AS(inverse_frequency_alpha(std::vector<std::size_t>{}), std::invalid_argument);
}

TEST_CASE("f1 examples") {
    CHECK(f1_score({3, 1, 1, 0}) == 0.75);
    CHECK(f1_score({5, 0, 0, 0}) == 1.0);
    CHECK(f1_score({0, 5, 5, 0}) == 0.0);
    CHECK_THROWS_AS(f1_score({0, 0, 0, 7}), UndefinedF1Error);
}

TEST_CASE("f1 equals the harmonic mean of precision and recall") {
    Rng rng(13);
    for (int i = 0; i < 1000; ++i) {
        const ConfusionCounts c{1 + rng.below(100), rng.below(100), rng.below(100), 0};
        const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
        const double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
        CHECK(std::abs(f1_score(c) - 2 * p * r / (p + r)) < 1e-12);
        CHECK(f1_score(c) >= 0.0);
        CHECK(f1_score(c) <= 1.0);
    }
}
