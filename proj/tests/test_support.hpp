#pragma once

// Independent oracles and fixtures shared by the unit, property and acceptance suites.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "hcomp/dirichlet.hpp"
#include "hcomp/numtheory.hpp"
#include "hcomp/symbols.hpp"

namespace oracle {

using hcomp::cplx;
using hcomp::u64;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    int integer(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
    cplx in_disc(double r) {
        const double rho = r * std::sqrt(uniform());
        return std::polar(rho, uniform(0.0, 2.0 * M_PI));
    }

private:
    std::mt19937_64 eng_;
};

// Prime exponents of n over the primes below 64, by plain division.
inline std::array<int, 18> small_exponents(u64 n) {
    static constexpr std::array<u64, 18> ps = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61};
    std::array<int, 18> e{};
    for (std::size_t j = 0; j < ps.size(); ++j)
        while (n % ps[j] == 0) {
            n /= ps[j];
            ++e[j];
        }
    return e;
}

// Search q_1^{a_1} ... q_k^{a_k} = 1 with |a_i| <= bound, not all zero (k <= 3).
// If require_first is set, a_1 must be nonzero (membership of q_1 in the rational span of the rest).
inline bool relation_exists(const std::vector<u64>& q, int bound, bool require_first = false) {
    std::vector<std::array<int, 18>> v;
    for (u64 n : q) v.push_back(small_exponents(n));
    const std::size_t k = q.size();
    auto zero_combo = [&](int a, int b, int c) {
        for (std::size_t j = 0; j < 18; ++j) {
            long s = static_cast<long>(a) * v[0][j];
            if (k > 1) s += static_cast<long>(b) * v[1][j];
            if (k > 2) s += static_cast<long>(c) * v[2][j];
            if (s != 0) return false;
        }
        return true;
    };
    for (int a = -bound; a <= bound; ++a) {
        if (require_first && a == 0) continue;
        for (int b = (k > 1 ? -bound : 0); b <= (k > 1 ? bound : 0); ++b)
            for (int c = (k > 2 ? -bound : 0); c <= (k > 2 ? bound : 0); ++c) {
                if (a == 0 && b == 0 && c == 0) continue;
                if (zero_combo(a, b, c)) return true;
            }
    }
    return false;
}

// All multisets gamma with sum gamma_i * i = l: the number of integer partitions of l.
inline std::size_t partition_count(int l) {
    std::vector<std::size_t> p(static_cast<std::size_t>(l) + 1, 0);
    p[0] = 1;
    for (int part = 1; part <= l; ++part)
        for (int n = part; n <= l; ++n) p[static_cast<std::size_t>(n)] += p[static_cast<std::size_t>(n - part)];
    return p[static_cast<std::size_t>(l)];
}

// zeta(s) by a 10^6-term Kahan-compensated sum, the integral tail N^{1-s}/(s-1) and the -N^{-s}/2 endpoint term.
// The first neglected correction is s N^{-s-1}/12, below 1e-12 for Re s > 1.
inline cplx zeta_by_summation(cplx s, u64 N = 1'000'000) {
    cplx sum{}, comp{};
    for (u64 n = N; n >= 1; --n) {  // small terms first
        const cplx term = std::exp(-s * std::log(static_cast<double>(n)));
        const cplx y = term - comp;
        const cplx t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    const double lN = std::log(static_cast<double>(N));
    const cplx tail = std::exp((1.0 - s) * lN) / (s - 1.0);
    const cplx endpoint = -0.5 * std::exp(-s * lN);
    return sum + tail + endpoint;
}

// C_phi f truncated at N: each n^{-s} in f becomes n^{-c1} n^{-c0 s} prod_p (p^{-(psi - c1)})^e.
inline hcomp::DirichletPolynomial truncated_composition(const hcomp::DirichletPolynomial& f, const hcomp::Symbol& phi, u64 N) {
    using hcomp::DirichletPolynomial;
    DirichletPolynomial rest = hcomp::nonconstant_part(phi.psi).truncated(N);
    DirichletPolynomial out(N);
    for (const auto& [n, a] : f.coeffs()) {
        const double ln = std::log(static_cast<double>(n));
        DirichletPolynomial term = DirichletPolynomial::constant(a * std::exp(-phi.c1() * ln), N);
        u64 shift = 1;
        bool fits = true;
        for (int k = 0; k < phi.c0; ++k) {
            if (shift > N / n) fits = false;
            else shift *= n;
        }
        if (!fits) continue;
        term = hcomp::multiply(term, DirichletPolynomial::monomial(shift, 1.0, N));
        for (const auto& pp : hcomp::factorize(n).factors) {
            const auto e = hcomp::exp_base(pp.prime, rest, N);
            for (int j = 0; j < pp.exponent; ++j) term = hcomp::multiply(term, e);
        }
        out = hcomp::add(out, term);
    }
    return out;
}

inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace oracle
