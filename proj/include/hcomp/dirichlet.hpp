#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcomp/error.hpp"
#include "hcomp/numtheory.hpp"

namespace hcomp {

using cplx = std::complex<double>;

// Default truncation: every key that factorize() accepts.
inline constexpr u64 kDefaultTruncation = kMaxFactorInput;
inline constexpr u64 kMaxExpTruncation = 1'000'000;
inline constexpr int kMaxPower = 16;

// f(s) = sum a_n n^{-s}, sparse, with an explicit truncation N (keys > N are discarded).
class DirichletPolynomial {
public:
    DirichletPolynomial() = default;
    explicit DirichletPolynomial(u64 truncation) : truncation_(truncation) {
        if (truncation == 0) throw DomainError("truncation must be positive");
    }

    static DirichletPolynomial constant(cplx c, u64 truncation = kDefaultTruncation) {
        return monomial(1, c, truncation);
    }
    static DirichletPolynomial monomial(u64 n, cplx c, u64 truncation = kDefaultTruncation) {
        DirichletPolynomial f(truncation);
        f.add_to(n, c);
        return f;
    }

    u64 truncation() const { return truncation_; }
    const std::map<u64, cplx>& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }
    std::size_t size() const { return coeffs_.size(); }

    cplx coeff(u64 n) const {
        auto it = coeffs_.find(n);
        return it == coeffs_.end() ? cplx{} : it->second;
    }

    // Accumulates c into the n-coefficient. Keys above the truncation are dropped.
    void add_to(u64 n, cplx c) {
        if (n == 0) throw DomainError("Dirichlet polynomial keys must be positive");
        if (n > truncation_ || c == cplx{}) return;
        auto [it, inserted] = coeffs_.try_emplace(n, c);
        if (!inserted) {
            it->second += c;
            if (it->second == cplx{}) coeffs_.erase(it);
        }
    }

    void set(u64 n, cplx c) {
        if (n == 0) throw DomainError("Dirichlet polynomial keys must be positive");
        coeffs_.erase(n);
        add_to(n, c);
    }

    DirichletPolynomial truncated(u64 n) const {
        DirichletPolynomial out(std::min(n, truncation_));
        for (const auto& [k, c] : coeffs_) out.add_to(k, c);
        return out;
    }

    friend bool operator==(const DirichletPolynomial&, const DirichletPolynomial&) = default;

private:
    std::map<u64, cplx> coeffs_;
    u64 truncation_ = kDefaultTruncation;
};

inline DirichletPolynomial add(const DirichletPolynomial& f, const DirichletPolynomial& g) {
    DirichletPolynomial out(std::min(f.truncation(), g.truncation()));
    for (const auto& [n, c] : f.coeffs()) out.add_to(n, c);
    for (const auto& [n, c] : g.coeffs()) out.add_to(n, c);
    return out;
}

inline DirichletPolynomial scale(const DirichletPolynomial& f, cplx a) {
    DirichletPolynomial out(f.truncation());
    for (const auto& [n, c] : f.coeffs()) out.add_to(n, a * c);
    return out;
}

inline DirichletPolynomial sub(const DirichletPolynomial& f, const DirichletPolynomial& g) {
    DirichletPolynomial out(std::min(f.truncation(), g.truncation()));
    for (const auto& [n, c] : f.coeffs()) out.add_to(n, c);
    for (const auto& [n, c] : g.coeffs()) out.add_to(n, -c);
    return out;
}

// Dirichlet convolution.
inline DirichletPolynomial multiply(const DirichletPolynomial& f, const DirichletPolynomial& g) {
    const u64 N = std::min(f.truncation(), g.truncation());
    DirichletPolynomial out(N);
    for (const auto& [m, a] : f.coeffs()) {
        if (m > N) break;
        for (const auto& [n, b] : g.coeffs()) {
            u64 key;
            if (__builtin_mul_overflow(m, n, &key) || key > N) break;
            out.add_to(key, a * b);
        }
    }
    return out;
}

inline DirichletPolynomial operator+(const DirichletPolynomial& f, const DirichletPolynomial& g) { return add(f, g); }
inline DirichletPolynomial operator-(const DirichletPolynomial& f, const DirichletPolynomial& g) { return sub(f, g); }
inline DirichletPolynomial operator*(const DirichletPolynomial& f, const DirichletPolynomial& g) { return multiply(f, g); }
inline DirichletPolynomial operator*(cplx a, const DirichletPolynomial& f) { return scale(f, a); }

inline DirichletPolynomial power(const DirichletPolynomial& f, int k) {
    if (k < 0 || k > kMaxPower) throw GuardError("power: exponent must lie in [0, 16], got " + std::to_string(k));
    DirichletPolynomial out = DirichletPolynomial::constant(1.0, f.truncation());
    for (int j = 0; j < k; ++j) out = multiply(out, f);
    return out;
}

inline cplx evaluate(const DirichletPolynomial& f, cplx s) {
    cplx total{};
    for (const auto& [n, c] : f.coeffs())
        total += (n == 1) ? c : c * std::exp(-s * std::log(static_cast<double>(n)));
    return total;
}

inline DirichletPolynomial derivative(const DirichletPolynomial& f) {
    DirichletPolynomial out(f.truncation());
    for (const auto& [n, c] : f.coeffs()) out.add_to(n, -c * std::log(static_cast<double>(n)));
    return out;
}

// Completely multiplicative unimodular character given by its values on finitely many primes.
class TwistCharacter {
public:
    TwistCharacter() = default;
    explicit TwistCharacter(std::map<u64, cplx> phases) : phases_(std::move(phases)) {
        for (const auto& [p, z] : phases_) {
            if (!is_prime(p)) throw DomainError("twist character keys must be primes");
            if (std::abs(std::abs(z) - 1.0) > 1e-12) throw DomainError("twist character phases must be unimodular");
        }
    }
    const std::map<u64, cplx>& phases() const { return phases_; }

    cplx operator()(u64 n) const {
        cplx v = 1.0;
        for (const auto& pp : factorize(n).factors) {
            auto it = phases_.find(pp.prime);
            if (it == phases_.end()) continue;
            for (int e = 0; e < pp.exponent; ++e) v *= it->second;
        }
        return v;
    }

private:
    std::map<u64, cplx> phases_;
};

inline DirichletPolynomial twist(const DirichletPolynomial& f, const TwistCharacter& chi) {
    DirichletPolynomial out(f.truncation());
    for (const auto& [n, c] : f.coeffs()) out.add_to(n, c * chi(n));
    return out;
}

inline DirichletPolynomial vertical_translate(const DirichletPolynomial& f, double tau) {
    DirichletPolynomial out(f.truncation());
    for (const auto& [n, c] : f.coeffs())
        out.add_to(n, c * std::polar(1.0, -tau * std::log(static_cast<double>(n))));
    return out;
}

inline DirichletPolynomial horizontal_shift(const DirichletPolynomial& f, double sigma) {
    if (!(sigma >= 0.0)) throw DomainError("horizontal_shift: sigma must be nonnegative");
    DirichletPolynomial out(f.truncation());
    for (const auto& [n, c] : f.coeffs())
        out.add_to(n, c * std::exp(-sigma * std::log(static_cast<double>(n))));
    return out;
}

inline double hardy_norm(const DirichletPolynomial& f) {
    double s = 0.0;
    for (const auto& [n, c] : f.coeffs()) s += std::norm(c);
    return std::sqrt(s);
}

// w_n = int_0^1 sigma n^{-2 sigma} d sigma
inline double bergman_weight(u64 n) {
    if (n == 0) throw DomainError("bergman_weight: n must be positive");
    if (n == 1) return 0.5;
    const double a = 2.0 * std::log(static_cast<double>(n));
    // 1 - e^{-a}(1+a) loses digits only for a near 0, which n >= 2 excludes.
    return (1.0 - std::exp(-a) * (1.0 + a)) / (a * a);
}

inline double bergman_norm(const DirichletPolynomial& f) {
    double s = 0.0;
    for (const auto& [n, c] : f.coeffs()) s += std::norm(c) * bergman_weight(n);
    return std::sqrt(s);
}

// Coefficients of p^{-psi(s)} up to N, psi without constant term.
// Built as prod_k sum_j (-c_k log p)^j / j! (k^j)^{-s}, k increasing.
inline DirichletPolynomial exp_base(u64 p, const DirichletPolynomial& psi, u64 N) {
    if (!is_prime(p)) throw DomainError("exp_base: p must be prime");
    if (N == 0 || N > kMaxExpTruncation) throw GuardError("exp_base: truncation must lie in [1, 10^6]");
    if (psi.coeff(1) != cplx{}) throw DomainError("exp_base: psi must have zero constant coefficient");
    const double lp = std::log(static_cast<double>(p));
    DirichletPolynomial result = DirichletPolynomial::constant(1.0, N);
    for (const auto& [k, c] : psi.coeffs()) {
        if (k > N) break;
        DirichletPolynomial factor = DirichletPolynomial::constant(1.0, N);
        const cplx x = -c * lp;
        cplx term = 1.0;
        u64 key = 1;
        for (int j = 1;; ++j) {
            u64 next;
            if (__builtin_mul_overflow(key, k, &next) || next > N) break;
            key = next;
            term *= x / static_cast<double>(j);
            factor.add_to(key, term);
        }
        result = multiply(result, factor);
    }
    return result;
}

// The q^l coefficient of p^{-psi} from the weighted-partition formula:
// sum over weighted partitions (r, i, gamma) of l of u(p, l, r, i, gamma) prod c_{q^{i_k}}^{gamma_k}.
inline cplx exp_base_prime_power_coefficient(u64 p, const DirichletPolynomial& psi, u64 q, int l) {
    if (!is_prime(q)) throw DomainError("closed form requires a prime q");
    if (l == 0) return 1.0;
    std::vector<cplx> cq(static_cast<std::size_t>(l) + 1);
    u64 qi = 1;
    for (int i = 1; i <= l; ++i) {
        if (__builtin_mul_overflow(qi, q, &qi)) throw GuardError("closed form: q^l overflows");
        cq[static_cast<std::size_t>(i)] = psi.coeff(qi);
    }
    cplx total{};
    for (const auto& wp : weighted_partitions(l)) {
        cplx prod = partition_coefficient(p, wp);
        for (int k = 0; k < wp.r(); ++k)
            for (int g = 0; g < wp.gamma[static_cast<std::size_t>(k)]; ++g)
                prod *= cq[static_cast<std::size_t>(wp.i[static_cast<std::size_t>(k)])];
        total += prod;
    }
    return total;
}

// Primes dividing at least one key of f (ascending).
inline std::vector<u64> support_primes(const DirichletPolynomial& f) {
    std::vector<u64> ps;
    for (const auto& [n, c] : f.coeffs())
        for (const auto& pp : factorize(n).factors) ps.push_back(pp.prime);
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    return ps;
}

// max Omega(n) over the support; 0 for constants and zero.
inline int dirichlet_degree(const DirichletPolynomial& f) {
    int d = 0;
    for (const auto& [n, c] : f.coeffs()) d = std::max(d, omega(n));
    return d;
}

inline void to_json(nlohmann::json& j, const DirichletPolynomial& f) {
    nlohmann::json coeffs = nlohmann::json::object();
    // + 0.0 maps a negative zero to 0 so reports do not show "-0.0"
    for (const auto& [n, c] : f.coeffs()) coeffs[std::to_string(n)] = {c.real() + 0.0, c.imag() + 0.0};
    j = {{"truncation", f.truncation()}, {"coeffs", coeffs}};
}

inline void from_json(const nlohmann::json& j, DirichletPolynomial& f) {
    DirichletPolynomial out(j.at("truncation").get<u64>());
    for (const auto& [key, val] : j.at("coeffs").items()) {
        std::size_t used = 0;
        const u64 n = std::stoull(key, &used);
        if (used != key.size()) throw DomainError("coefficient key is not an integer: " + key);
        out.add_to(n, cplx(val.at(0).get<double>(), val.at(1).get<double>()));
    }
    f = std::move(out);
}

}  // namespace hcomp
