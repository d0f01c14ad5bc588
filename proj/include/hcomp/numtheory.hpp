#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hcomp/error.hpp"

namespace hcomp {

using u64 = std::uint64_t;
using Rational = boost::multiprecision::cpp_rational;

struct PrimePower {
    u64 prime;
    int exponent;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct FactoredInteger {
    u64 n = 1;
    std::vector<PrimePower> factors;  // primes strictly increasing
};

inline constexpr u64 kMaxFactorInput = (u64{1} << 63) - 1;

inline FactoredInteger factorize(u64 n) {
    if (n == 0) throw DomainError("factorize: n must be positive");
    if (n > kMaxFactorInput) throw DomainError("factorize: n exceeds 2^63-1");
    FactoredInteger out{n, {}};
    u64 m = n;
    auto strip = [&](u64 p) {
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        if (e > 0) out.factors.push_back({p, e});
    };
    strip(2);
    strip(3);
    // 6k +- 1 wheel
    for (u64 p = 5; p <= m / p; p += 6) {
        strip(p);
        strip(p + 2);
    }
    if (m > 1) out.factors.push_back({m, 1});
    return out;
}

inline bool is_prime(u64 n) {
    if (n < 2) return false;
    auto f = factorize(n);
    return f.factors.size() == 1 && f.factors[0].exponent == 1;
}

inline int omega(u64 n) {
    int total = 0;
    for (const auto& pp : factorize(n).factors) total += pp.exponent;
    return total;
}

inline std::optional<u64> p_plus(u64 n) {
    auto f = factorize(n);
    if (f.factors.empty()) return std::nullopt;
    return f.factors.back().prime;
}

// The first d primes, 2, 3, 5, ...
inline std::vector<u64> first_primes(std::size_t d) {
    std::vector<u64> out;
    for (u64 c = 2; out.size() < d; ++c)
        if (is_prime(c)) out.push_back(c);
    return out;
}

// Prime-exponent rows of each q over the union of the primes that occur.
struct ExponentMatrix {
    std::vector<u64> primes;                  // ascending
    std::vector<std::vector<long long>> rows;  // rows[j][k] = exponent of primes[k] in q_j
};

inline ExponentMatrix exponent_vectors(const std::vector<u64>& q_list) {
    std::vector<FactoredInteger> fs;
    std::vector<u64> primes;
    for (u64 q : q_list) {
        if (q < 2) throw DomainError("exponent_vectors: entries must be >= 2");
        fs.push_back(factorize(q));
        for (const auto& pp : fs.back().factors) primes.push_back(pp.prime);
    }
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    ExponentMatrix m{primes, {}};
    for (const auto& f : fs) {
        std::vector<long long> row(primes.size(), 0);
        for (const auto& pp : f.factors) {
            auto it = std::lower_bound(primes.begin(), primes.end(), pp.prime);
            row[static_cast<std::size_t>(it - primes.begin())] = pp.exponent;
        }
        m.rows.push_back(std::move(row));
    }
    return m;
}

namespace detail {

// Row-reduces in place and returns the rank.
inline std::size_t row_reduce(std::vector<std::vector<Rational>>& a) {
    std::size_t rank = 0;
    const std::size_t cols = a.empty() ? 0 : a[0].size();
    for (std::size_t c = 0; c < cols && rank < a.size(); ++c) {
        std::size_t pivot = rank;
        while (pivot < a.size() && a[pivot][c] == 0) ++pivot;
        if (pivot == a.size()) continue;
        std::swap(a[rank], a[pivot]);
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (r == rank || a[r][c] == 0) continue;
            Rational f = a[r][c] / a[rank][c];
            for (std::size_t k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
        }
        ++rank;
    }
    return rank;
}

inline std::vector<std::vector<Rational>> to_rational(const std::vector<std::vector<long long>>& rows) {
    std::vector<std::vector<Rational>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.emplace_back(r.begin(), r.end());
    return out;
}

}  // namespace detail

inline std::size_t rational_rank(const std::vector<std::vector<long long>>& rows) {
    auto a = detail::to_rational(rows);
    return detail::row_reduce(a);
}

inline bool is_mult_independent(const std::vector<u64>& q_list) {
    if (q_list.empty()) return true;
    auto m = exponent_vectors(q_list);
    return rational_rank(m.rows) == q_list.size();
}

inline bool in_Q_span(u64 q, const std::vector<u64>& q_list) {
    std::vector<u64> all = q_list;
    all.push_back(q);
    auto m = exponent_vectors(all);
    std::vector<std::vector<long long>> base(m.rows.begin(), m.rows.end() - 1);
    return rational_rank(base) == rational_rank(m.rows);
}

// Rational alpha with n = prod generators_j^alpha_j, if one exists.
// For independent generators the solution is unique.
inline std::optional<std::vector<Rational>> solve_exponents(u64 n, const std::vector<u64>& generators) {
    std::vector<u64> all = generators;
    all.push_back(n);
    auto m = exponent_vectors(all);
    const std::size_t d = generators.size();
    // Augmented system: one row per prime, columns = generators, last column = n.
    std::vector<std::vector<Rational>> a(m.primes.size(), std::vector<Rational>(d + 1));
    for (std::size_t k = 0; k < m.primes.size(); ++k)
        for (std::size_t j = 0; j <= d; ++j) a[k][j] = m.rows[j][k];
    std::size_t rank = 0;
    std::vector<std::size_t> pivot_col;
    for (std::size_t c = 0; c < d && rank < a.size(); ++c) {
        std::size_t p = rank;
        while (p < a.size() && a[p][c] == 0) ++p;
        if (p == a.size()) continue;
        std::swap(a[rank], a[p]);
        Rational inv = 1 / a[rank][c];
        for (auto& x : a[rank]) x *= inv;
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (r == rank || a[r][c] == 0) continue;
            Rational f = a[r][c];
            for (std::size_t k = 0; k <= d; ++k) a[r][k] -= f * a[rank][k];
        }
        pivot_col.push_back(c);
        ++rank;
    }
    for (std::size_t r = rank; r < a.size(); ++r)
        if (a[r][d] != 0) return std::nullopt;
    std::vector<Rational> alpha(d, 0);
    for (std::size_t r = 0; r < rank; ++r) alpha[pivot_col[r]] = a[r][d];
    return alpha;
}

// Smallest q such that every entry is an integer power of q; nullopt when no such q exists.
inline std::optional<u64> common_power_base(const std::vector<u64>& q_list) {
    if (q_list.empty()) return std::nullopt;
    auto m = exponent_vectors(q_list);
    if (rational_rank(m.rows) > 1) return std::nullopt;
    const auto& first = m.rows[0];
    long long g = 0;
    for (long long e : first) g = std::gcd(g, e);
    u64 q = 1;
    for (std::size_t k = 0; k < m.primes.size(); ++k)
        for (long long e = 0; e < first[k] / g; ++e) q *= m.primes[k];
    return q;
}

struct WeightedPartition {
    int l = 0;
    std::vector<int> i;      // strictly increasing parts
    std::vector<int> gamma;  // multiplicities, same length as i
    int r() const { return static_cast<int>(i.size()); }
    friend bool operator==(const WeightedPartition&, const WeightedPartition&) = default;
};

inline constexpr int kMaxPartitionL = 30;

// Weighted partitions of l, in one-to-one correspondence with integer partitions of l.
// Order: the underlying integer partitions in reverse lexicographic order, so l=3 gives
// (3), (2,1), (1,1,1).
inline std::vector<WeightedPartition> weighted_partitions(int l) {
    if (l < 1 || l > kMaxPartitionL)
        throw GuardError("weighted_partitions: l must lie in [1, 30], got " + std::to_string(l));
    std::vector<WeightedPartition> out;
    std::vector<int> parts;
    auto emit = [&] {
        WeightedPartition wp;
        wp.l = l;
        // parts are nonincreasing; walk backwards for increasing i
        for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
            if (!wp.i.empty() && wp.i.back() == *it)
                ++wp.gamma.back();
            else {
                wp.i.push_back(*it);
                wp.gamma.push_back(1);
            }
        }
        out.push_back(std::move(wp));
    };
    auto rec = [&](auto&& self, int remaining, int max_part) -> void {
        if (remaining == 0) {
            emit();
            return;
        }
        for (int part = std::min(remaining, max_part); part >= 1; --part) {
            parts.push_back(part);
            self(self, remaining - part, part);
            parts.pop_back();
        }
    };
    rec(rec, l, l);
    return out;
}

// u(p, l, r, i, gamma) = (-1)^{|gamma|} / prod gamma_k! * (log p)^{|gamma|}
inline double partition_coefficient(u64 p, const WeightedPartition& wp) {
    if (!is_prime(p)) throw DomainError("partition_coefficient: p must be prime");
    int total = 0;
    double fact = 1.0;
    for (int g : wp.gamma) {
        total += g;
        for (int k = 2; k <= g; ++k) fact *= k;
    }
    const double sign = (total % 2 == 0) ? 1.0 : -1.0;
    return sign / fact * std::pow(std::log(static_cast<double>(p)), total);
}

}  // namespace hcomp
