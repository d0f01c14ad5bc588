#include "catch_amalgamated.hpp"

#include <cmath>
#include <numeric>

#include "hcomp/numtheory.hpp"
#include "test_support.hpp"

using namespace hcomp;
using Catch::Approx;

TEST_CASE("factorize canonical forms", "[numtheory]") {
    const auto f12 = factorize(12);
    REQUIRE(f12.factors.size() == 2);
    CHECK(f12.factors[0].prime == 2);
    CHECK(f12.factors[0].exponent == 2);
    CHECK(f12.factors[1].prime == 3);
    CHECK(f12.factors[1].exponent == 1);
    CHECK(factorize(1).factors.empty());
    const auto f = factorize(9973);
    REQUIRE(f.factors.size() == 1);
    CHECK(f.factors[0].prime == 9973);
    CHECK(factorize(999999999989ULL).factors.size() == 1);
    CHECK_THROWS_AS(factorize(0), DomainError);
}

TEST_CASE("omega and largest prime factor", "[numtheory]") {
    CHECK(omega(12) == 3);
    CHECK(omega(30) == 3);
    CHECK(omega(1) == 0);
    CHECK(p_plus(18) == std::optional<u64>(3));
    CHECK_FALSE(p_plus(1).has_value());
}

TEST_CASE("factorization reconstructs n and omega is completely additive", "[numtheory][property]") {
    for (u64 n = 1; n <= 100000; ++n) {
        u64 prod = 1;
        u64 last = 1;
        for (const auto& pp : factorize(n).factors) {
            REQUIRE(pp.prime > last);
            last = pp.prime;
            for (int e = 0; e < pp.exponent; ++e) prod *= pp.prime;
        }
        REQUIRE(prod == n);
    }
    oracle::Rng rng(11);
    for (int t = 0; t < 2000; ++t) {
        const u64 m = static_cast<u64>(rng.integer(1, 5000)), n = static_cast<u64>(rng.integer(1, 5000));
        REQUIRE(omega(m * n) == omega(m) + omega(n));
    }
}

TEST_CASE("exponent vectors over the union prime basis", "[numtheory]") {
    auto ev = exponent_vectors({2, 3});
    CHECK(ev.primes == std::vector<u64>{2, 3});
    CHECK(ev.rows == std::vector<std::vector<long long>>{{1, 0}, {0, 1}});
    ev = exponent_vectors({6, 10, 15});
    CHECK(ev.primes == std::vector<u64>{2, 3, 5});
    CHECK(ev.rows == std::vector<std::vector<long long>>{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}});
    ev = exponent_vectors({4, 8});
    CHECK(ev.primes == std::vector<u64>{2});
    CHECK(ev.rows == std::vector<std::vector<long long>>{{2}, {3}});
}

TEST_CASE("multiplicative independence and rational span", "[numtheory]") {
    CHECK(is_mult_independent({2, 3}));
    CHECK_FALSE(is_mult_independent({4, 8}));
    CHECK(is_mult_independent({6, 10, 15}));
    CHECK_FALSE(is_mult_independent({6, 27, 32}));  // 6^15 = 27^5 * 32^3
    CHECK(in_Q_span(6, {2, 3}));
    CHECK_FALSE(in_Q_span(5, {2, 3}));
    CHECK(in_Q_span(36, {6}));
}

TEST_CASE("common power base", "[numtheory]") {
    CHECK(common_power_base({4, 8}) == std::optional<u64>(2));
    CHECK(common_power_base({9, 27}) == std::optional<u64>(3));
    CHECK_FALSE(common_power_base({2, 3}).has_value());
    CHECK(common_power_base({16, 64}) == std::optional<u64>(2));
    CHECK(common_power_base({8}) == std::optional<u64>(2));
}

TEST_CASE("weighted partitions in deterministic order", "[numtheory]") {
    const auto w1 = weighted_partitions(1);
    REQUIRE(w1.size() == 1);
    CHECK(w1[0].i == std::vector<int>{1});
    CHECK(w1[0].gamma == std::vector<int>{1});

    const auto w2 = weighted_partitions(2);
    REQUIRE(w2.size() == 2);
    CHECK(w2[0].i == std::vector<int>{2});
    CHECK(w2[0].gamma == std::vector<int>{1});
    CHECK(w2[1].i == std::vector<int>{1});
    CHECK(w2[1].gamma == std::vector<int>{2});

    const auto w3 = weighted_partitions(3);
    REQUIRE(w3.size() == 3);
    CHECK(w3[0].i == std::vector<int>{3});
    CHECK(w3[1].i == std::vector<int>{1, 2});
    CHECK(w3[1].gamma == std::vector<int>{1, 1});
    CHECK(w3[2].i == std::vector<int>{1});
    CHECK(w3[2].gamma == std::vector<int>{3});

    CHECK_THROWS_AS(weighted_partitions(0), GuardError);
    CHECK_THROWS_AS(weighted_partitions(31), GuardError);
}

TEST_CASE("weighted partitions are exhaustive and valid", "[numtheory][property]") {
    for (int l = 1; l <= 12; ++l) {
        const auto wps = weighted_partitions(l);
        CHECK(wps.size() == oracle::partition_count(l));
        for (const auto& wp : wps) {
            int sum = 0;
            for (std::size_t k = 0; k < wp.i.size(); ++k) {
                if (k > 0) REQUIRE(wp.i[k] > wp.i[k - 1]);
                REQUIRE(wp.gamma[k] >= 1);
                sum += wp.i[k] * wp.gamma[k];
            }
            REQUIRE(sum == l);
            REQUIRE(wp.r() == static_cast<int>(wp.i.size()));
        }
    }
}

TEST_CASE("partition coefficient closed form", "[numtheory]") {
    const double l2 = std::log(2.0), l3 = std::log(3.0);
    CHECK(partition_coefficient(2, {2, {1}, {2}}) == Approx(l2 * l2 / 2).epsilon(1e-14));
    CHECK(partition_coefficient(2, {2, {1}, {2}}) == Approx(0.240227).epsilon(1e-5));
    CHECK(partition_coefficient(2, {2, {2}, {1}}) == Approx(-l2).epsilon(1e-14));
    CHECK(partition_coefficient(3, {3, {1, 2}, {1, 1}}) == Approx(l3 * l3).epsilon(1e-14));
    CHECK_THROWS_AS(partition_coefficient(4, {2, {2}, {1}}), DomainError);
}

TEST_CASE("independence agrees with a brute-force relation search on pairs", "[numtheory][property]") {
    for (u64 a = 2; a <= 50; ++a)
        for (u64 b = a + 1; b <= 50; ++b) {
            INFO(a << "," << b);
            REQUIRE(is_mult_independent({a, b}) == !oracle::relation_exists({a, b}, 20));
            REQUIRE(in_Q_span(a, {b}) == oracle::relation_exists({a, b}, 20, true));
        }
}
