#include "catch_amalgamated.hpp"

#include <cmath>

#include "hcomp/analysis.hpp"
#include "test_support.hpp"

using namespace hcomp;
using Catch::Approx;

namespace {

Symbol sym(int c0, std::initializer_list<std::pair<u64, cplx>> terms) {
    DirichletPolynomial psi;
    for (const auto& [n, c] : terms) psi.add_to(n, c);
    return Symbol(c0, psi);
}

const double kDelta = 0.1;
const Symbol phi0 = sym(1, {{1, 1.0}, {2, -1.0}});           // s + 1 - 2^{-s}
const Symbol phi1 = sym(1, {{1, 1.0}, {3, -1.0}});           // s + 1 - 3^{-s}
const Symbol cube = perturb_power(phi0, 3, kDelta);          // phi0 + delta (1 - 2^{-s})^3
const Symbol square = perturb_power(phi0, 2, kDelta);        // phi0 + delta (1 - 2^{-s})^2
const Symbol zero0 = sym(0, {{1, 1.5}, {2, -1.0}});          // 1/2 + (1 - 2^{-s})
const Symbol zero1 = sym(0, {{1, 1.5}, {3, -1.0}});          // 1/2 + (1 - 3^{-s})
const Symbol two_d = sym(1, {{1, 2.0}, {2, -1.0}, {3, -1.0}});  // s + 2 - 2^{-s} - 3^{-s}

BoundaryPoint origin(const std::vector<u64>& Q) { return make_boundary_point(std::vector<double>(Q.size(), 0.0), GeneratorSet(Q)); }

}  // namespace

TEST_CASE("boundary sets", "[analysis]") {
    const auto g = gamma_set(phi0, GeneratorSet({2}));
    REQUIRE(g.size() == 1);
    CHECK(g[0].theta[0] == 0.0);
    CHECK(std::abs(g[0].z[0] - 1.0) < 1e-12);

    CHECK(gamma_set(sym(1, {{1, 1.0}, {2, -0.5}}), GeneratorSet({2})).empty());
    CHECK(gamma_set(sym(0, {{1, 0.75}, {2, 0.125}}), GeneratorSet({2})).empty());

    const auto g2 = gamma_set(two_d, GeneratorSet({2, 3}));
    REQUIRE(g2.size() == 1);
    CHECK(g2[0].theta == std::vector<double>{0.0, 0.0});

    // 1 + 2^{-s}: the contact sits at theta = pi
    const auto gpi = gamma_set(sym(1, {{1, 1.0}, {2, 1.0}}), GeneratorSet({2}));
    REQUIRE(gpi.size() == 1);
    CHECK(std::abs(gpi[0].theta[0]) == Approx(M_PI).epsilon(1e-12));
    // 1 - 4^{-s} over Q = {2}: two lattice translates, theta = 0 and theta = pi
    const auto g4 = gamma_set(sym(1, {{1, 1.0}, {4, -1.0}}), GeneratorSet({2}));
    REQUIRE(g4.size() == 2);
    CHECK(g4[0].theta[0] == 0.0);
    CHECK(g4[1].theta[0] == Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("boundary data through order two", "[analysis]") {
    const auto z = origin({2});
    const auto b0 = boundary_data(phi0, z, 2);
    CHECK(std::abs(b0.value) < 1e-15);  // c1 included: psi = 1 - z vanishes at z = 1
    CHECK(b0.partials.at({1}) == cplx(-1.0));
    CHECK(b0.partials.at({2}) == cplx(0.0));

    const auto bc = boundary_data(cube, z, 2);
    CHECK(std::abs(bc.partials.at({1}) + 1.0) < 1e-15);
    CHECK(std::abs(bc.partials.at({2})) < 1e-15);

    const auto bs = boundary_data(square, z, 2);
    CHECK(std::abs(bs.partials.at({2}) - 2.0 * kDelta) < 1e-15);

    CHECK(boundary_data(phi0, z, 1).partials.size() == 1);
    CHECK(boundary_data(two_d, origin({2, 3}), 2).partials.size() == 5);
    CHECK_THROWS_AS(boundary_data(phi0, z, 3), DomainError);

    CHECK(same_boundary_data(phi0, cube, z, 2));
    CHECK_FALSE(same_boundary_data(phi0, square, z, 2));
    CHECK(same_boundary_data(phi0, square, z, 1));
    CHECK(same_boundary_data(square, square, z, 2));
}

TEST_CASE("contact order", "[analysis]") {
    const auto r1 = contact_order(phi0, origin({2}));
    REQUIRE(r1.order);
    CHECK(*r1.order == 2);
    REQUIRE(r1.hessian_eigenvalues.size() == 1);
    CHECK(r1.hessian_eigenvalues[0] == Approx(1.0).epsilon(1e-9));
    CHECK(r1.constant > 0.0);

    const auto r2 = contact_order(two_d, origin({2, 3}));
    REQUIRE(r2.order);
    CHECK(*r2.order == 2);
    REQUIRE(r2.hessian_eigenvalues.size() == 2);
    CHECK(r2.hessian_eigenvalues[0] == Approx(1.0).epsilon(1e-9));
    CHECK(r2.hessian_eigenvalues[1] == Approx(1.0).epsilon(1e-9));

    // J = 3/2 - 2 cos t + 1/2 cos 2t = (1 - cos t)^2: quartic touch with a vanishing Hessian
    const auto degenerate = sym(1, {{1, 1.5}, {2, -2.0}, {4, 0.5}});
    const auto r4 = contact_order(degenerate, origin({2}));
    REQUIRE(r4.order);
    CHECK(*r4.order == 4);
    CHECK(std::abs(r4.hessian_eigenvalues[0]) < 1e-9);
    CHECK_FALSE(contact_order(degenerate, origin({2}), 2).order.has_value());
}

TEST_CASE("angular derivatives", "[analysis]") {
    const auto a = angular_derivative(phi0, 0.0);
    CHECK(a.finite);
    CHECK(std::abs(a.boundary_value) < 1e-15);
    CHECK(a.value.real() == Approx(1.0 + std::log(2.0)).epsilon(1e-15));

    const auto b = angular_derivative(sym(1, {{1, 1.0}}), 0.0);
    CHECK_FALSE(b.finite);
    CHECK(b.boundary_value == cplx(1.0));

    const auto c = angular_derivative(sym(1, {}), 2.7);
    CHECK(c.finite);
    CHECK(c.value == cplx(1.0));
}

TEST_CASE("essential-norm lower bounds", "[analysis]") {
    const auto v = essential_lower_bound_difference(phi0, phi1, {2}, 0.0);
    CHECK(v.kind == VerdictKind::ObstructedComponent);
    REQUIRE(v.bound);
    CHECK(*v.bound == Approx(1.0 / std::sqrt(1.0 + std::log(2.0))).epsilon(1e-14));
    CHECK(*v.bound == Approx(0.768515523037525).epsilon(1e-13));
    // phi1 projected onto {2} is s + 1: boundary value 1 against 0
    CHECK(v.certificate.at("cause") == "boundary values differ");

    CHECK(essential_lower_bound_difference(phi0, phi0, {2}, 0.0).kind == VerdictKind::Undecided);

    const auto z = essential_lower_bound_difference(zero0, zero1, {2}, 0.0);
    CHECK(z.kind == VerdictKind::ObstructedComponent);
    CHECK_FALSE(z.bound.has_value());
    CHECK(z.certificate.at("qualitative") == true);
    CHECK(z.certificate.at("note") == "constant unspecified in source");

    CHECK_THROWS_AS(essential_lower_bound_difference(phi0, zero0, {2}, 0.0), PreconditionError);
    CHECK_THROWS_AS(essential_lower_bound_difference(zero0, zero1, {2, 3}, 0.0), PreconditionError);
    CHECK_THROWS_AS(essential_lower_bound_difference(phi0, phi1, {2}, 1.0), PreconditionError);

    const auto scan = scan_essential_lower_bound(phi0, phi1);
    CHECK(scan.kind == VerdictKind::ObstructedComponent);
    REQUIRE(scan.bound);
    CHECK(*scan.bound == Approx(0.768515523037525).epsilon(1e-12));
}

TEST_CASE("empirical essential norm", "[analysis]") {
    KernelSequencePlan plan;
    plan.family = KernelFamily::PartialQ;
    plan.primes = {2};
    plan.path = PathKind::Slanted;
    plan.M = 50.0;
    plan.k = {10, 1'000'000, 41, true};
    const auto t = empirical_essential_norm(phi0, phi1, plan);
    const double bound_sq = 1.0 / (1.0 + std::log(2.0));
    CHECK(t.rows.size() == 41);
    CHECK(t.tail_count == 11);
    CHECK(t.limit_estimate >= 0.59 * 0.95);
    CHECK(t.limit_estimate == Approx(bound_sq).epsilon(0.05));

    const auto same = empirical_essential_norm(phi0, phi0, plan);
    for (const auto& row : same.rows) CHECK(std::abs(row.value) < 1e-12);

    const auto r0 = sym(1, {{1, 2.0}, {2, -0.5}}), r1 = sym(1, {{1, 2.0}, {3, -0.5}});
    plan.path = PathKind::Radial;
    const auto rr = empirical_essential_norm(r0, r1, plan);
    CHECK(rr.limit_estimate < 1e-4);
    CHECK(rr.rows.back().value < rr.rows.front().value);

    plan.family = KernelFamily::SinglePrime;
    plan.q = 2;
    CHECK_THROWS_AS(empirical_essential_norm(phi0, phi1, plan), UnsupportedError);
}

TEST_CASE("linear-combination obstructions", "[analysis]") {
    const auto z = origin({2});
    const auto a = lincomb_obstruction({phi0, square}, {1.0, -1.0}, z);
    CHECK(a.J == std::vector<std::size_t>{0});
    CHECK(a.sum == cplx(1.0));
    CHECK(a.obstructed);

    const auto b = lincomb_obstruction({phi0, cube}, {1.0, -1.0}, z);
    CHECK(b.J == std::vector<std::size_t>{0, 1});
    CHECK(std::abs(b.sum) < 1e-15);
    CHECK_FALSE(b.obstructed);

    const auto c = lincomb_obstruction({phi0}, {1.0}, z);
    CHECK(c.J == std::vector<std::size_t>{0});
    CHECK(c.obstructed);

    CHECK_THROWS_AS(lincomb_obstruction({zero0}, {1.0}, z), PreconditionError);
    CHECK_THROWS_AS(lincomb_obstruction({phi0}, {1.0}, make_boundary_point({1.0}, GeneratorSet({2}))), PreconditionError);
}

TEST_CASE("compactness verdicts", "[analysis]") {
    CHECK(compactness_verdict(sym(0, {{1, 0.75}, {2, 0.125}})).kind == VerdictKind::Compact);
    CHECK(compactness_verdict(sym(0, {{1, 2.5}, {2, -1.0}, {3, -1.0}})).kind == VerdictKind::Compact);
    CHECK(compactness_verdict(phi0).kind == VerdictKind::NotCompact);
    CHECK(compactness_verdict(zero0).kind == VerdictKind::NotCompact);
    CHECK(compactness_verdict(sym(1, {{1, 1.0}})).kind == VerdictKind::Compact);
    CHECK(compactness_verdict(cube).kind == VerdictKind::NotCompact);
    // zero characteristic, degree two, complex dimension two
    CHECK(complex_dimension(sym(0, {{1, 2.0}, {2, -0.5}, {6, -0.5}})) == 2);
    // zero characteristic, one prime, degree two: 1/2 + (1 - 2^{-s}) + delta (1 - 2^{-s})^2
    const auto q = perturb_power(zero0, 2, kDelta);
    CHECK(one_prime_quadratic_form(q));
    CHECK(compactness_verdict(q).kind == VerdictKind::NotCompact);
    CHECK_THROWS_AS(compactness_verdict(sym(0, {{1, 1.0}, {2, -1.0}})), MembershipError);
}

TEST_CASE("verdicts for linear combinations", "[analysis]") {
    const auto r0 = sym(0, {{1, 0.75}, {2, 0.125}}), r1 = sym(0, {{1, 0.75}, {3, 0.125}});
    CHECK(lincomb_verdict({r0, r1}, {1.0, 1.0}).kind == VerdictKind::Compact);
    CHECK(lincomb_verdict({phi0, phi1}, {1.0, -1.0}).kind == VerdictKind::NotCompact);
    const auto z6 = sym(0, {{1, 1.5}, {6, -1.0}});
    CHECK(lincomb_verdict({zero0, z6}, {2.0, 3.0}).kind == VerdictKind::NotCompact);
    CHECK_THROWS_AS(lincomb_verdict({phi0, phi0}, {1.0, 2.0}), DuplicateError);
    CHECK_THROWS_AS(lincomb_verdict({phi0, phi1}, {1.0, 0.0}), DomainError);
}

TEST_CASE("same-component sufficient condition", "[analysis]") {
    const auto v = same_component_check(phi0, square);
    CHECK(v.kind == VerdictKind::SameComponentSufficient);
    REQUIRE(v.constant);
    CHECK(std::isfinite(*v.constant));
    CHECK(same_component_check(phi0, phi1).kind == VerdictKind::Undecided);
    CHECK(same_component_check(phi0, phi0).kind == VerdictKind::SameComponentSufficient);
    CHECK_THROWS_AS(same_component_check(phi0, zero0), PreconditionError);
}

TEST_CASE("compact-difference check", "[analysis]") {
    CHECK(compact_difference_check(phi0, cube).kind == VerdictKind::CompactDifference);
    CHECK(compact_difference_check(phi0, square).kind == VerdictKind::NotCompactDifference);
    CHECK(compact_difference_check(phi0, phi0).kind == VerdictKind::CompactDifference);
    CHECK(compact_difference_check(phi0, phi1).kind == VerdictKind::NotCompactDifference);
}

TEST_CASE("separation across characteristics", "[analysis]") {
    CHECK(characteristic_separation(sym(0, {{1, 0.75}, {2, 0.125}}), sym(1, {{1, 1.0}})) == Approx(0.5946035575013605).epsilon(1e-14));
    CHECK(characteristic_separation(sym(0, {{1, 0.5 + 1e-12}}), phi0) == Approx(std::sqrt(0.5)).epsilon(1e-10));
    CHECK(characteristic_separation(sym(0, {{1, 1.0}}), sym(1, {})) == 0.5);
    CHECK_THROWS_AS(characteristic_separation(phi0, phi1), PreconditionError);
}

TEST_CASE("verdict JSON layout", "[analysis]") {
    const nlohmann::json j = compactness_verdict(phi0);
    CHECK(j.at("verdict") == "NotCompact");
    CHECK(j.contains("certificate"));
    CHECK(j.contains("tolerances"));
    CHECK(j.at("criterion").is_string());
}

TEST_CASE("the two difference procedures never contradict", "[analysis][property]") {
    const std::vector<std::pair<Symbol, Symbol>> pairs{{phi0, cube}, {phi0, square}, {phi0, phi1}, {phi0, phi0},
                                                       {zero0, zero1}, {two_d, perturb_power(two_d, 3, 0.05)}};
    for (const auto& [a, b] : pairs) {
        const auto cd = compact_difference_check(a, b);
        const auto lb = scan_essential_lower_bound(a, b);
        if (cd.kind == VerdictKind::CompactDifference) CHECK(lb.kind != VerdictKind::ObstructedComponent);
        if (lb.kind == VerdictKind::ObstructedComponent) CHECK(cd.kind != VerdictKind::CompactDifference);
    }
}

TEST_CASE("finite angular derivatives have real part at least c0", "[analysis][property]") {
    const std::vector<Symbol> phis{phi0, cube, square, two_d, zero0, sym(2, {{2, -0.3}, {1, 0.3}}), sym(1, {{1, 1.0}, {2, 1.0}})};
    for (const auto& phi : phis) {
        const auto Q = prime_basis(phi);
        for (const auto& pt : gamma_set(phi, Q)) {
            if (Q.dim() != 1) continue;
            const double alpha = -pt.theta[0] / std::log(double(Q[0]));
            const auto ad = angular_derivative(phi, alpha);
            REQUIRE(ad.finite);
            CHECK(ad.value.real() >= phi.c0 - 1e-9);
        }
    }
}

TEST_CASE("the Gram sum sweep detects nonzero coefficients", "[analysis][property]") {
    oracle::Rng rng(61);
    for (int t = 0; t < 100; ++t) {
        const int n = rng.integer(1, 4);
        std::vector<cplx> lam, mu;
        for (int j = 0; j < n; ++j) {
            cplx l;
            do l = rng.in_disc(2.0); while (std::abs(l) < 1e-3);
            lam.push_back(l);
            mu.push_back(cplx(rng.uniform(0.01, 1.0), rng.uniform(-3.0, 3.0)));
        }
        const int d = rng.integer(1, 3);
        bool nonzero = false;
        for (int m = 1; m <= 20 && !nonzero; ++m) nonzero = std::abs(gram_sum(lam, mu, 0.5, d, m)) > 1e-12;
        REQUIRE(nonzero);
    }
}

TEST_CASE("a random beta separates distinct quadratic forms", "[analysis][property]") {
    oracle::Rng rng(67);
    const auto z = origin({2, 3});
    int separated = 0;
    for (int t = 0; t < 100; ++t) {
        auto make = [&]() {
            DirichletPolynomial psi;
            psi.add_to(1, 3.0);
            for (u64 n : {2, 3, 4, 6, 9}) psi.add_to(n, rng.in_disc(0.3));
            return Symbol(1, psi);
        };
        const auto a = make(), b = make();
        const auto beta = separating_beta({quadratic_forms(a, z), quadratic_forms(b, z)}, static_cast<std::uint64_t>(t));
        if (beta) ++separated;
    }
    CHECK(separated == 100);
}
