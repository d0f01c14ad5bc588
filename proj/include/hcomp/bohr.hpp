#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "hcomp/dirichlet.hpp"
#include "hcomp/error.hpp"
#include "hcomp/numtheory.hpp"

namespace hcomp {

// Multiplicatively independent integers q_1, ..., q_d.
class GeneratorSet {
public:
    GeneratorSet() = default;
    explicit GeneratorSet(std::vector<u64> generators) : gens_(std::move(generators)) {
        for (u64 q : gens_)
            if (q < 2) throw DomainError("generators must be >= 2");
        if (!is_mult_independent(gens_)) throw DomainError("generators must be multiplicatively independent");
        all_prime_ = std::all_of(gens_.begin(), gens_.end(), [](u64 q) { return is_prime(q); });
    }
    static GeneratorSet first_primes(std::size_t d) { return GeneratorSet(hcomp::first_primes(d)); }

    const std::vector<u64>& generators() const { return gens_; }
    std::size_t dim() const { return gens_.size(); }
    bool all_prime() const { return all_prime_; }
    u64 operator[](std::size_t j) const { return gens_[j]; }

    friend bool operator==(const GeneratorSet& a, const GeneratorSet& b) { return a.gens_ == b.gens_; }

private:
    std::vector<u64> gens_;
    bool all_prime_ = true;
};

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& a) {
    int s = 0;
    for (int x : a) s += x;
    return s;
}

class MultivariatePolynomial {
public:
    MultivariatePolynomial() = default;
    explicit MultivariatePolynomial(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    const std::map<MultiIndex, cplx>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    cplx coeff(const MultiIndex& a) const {
        auto it = terms_.find(a);
        return it == terms_.end() ? cplx{} : it->second;
    }

    void add_to(const MultiIndex& a, cplx c) {
        if (a.size() != dim_) throw DomainError("multi-index length does not match dimension");
        for (int x : a)
            if (x < 0) throw DomainError("multi-index entries must be nonnegative");
        if (c == cplx{}) return;
        auto [it, inserted] = terms_.try_emplace(a, c);
        if (!inserted) {
            it->second += c;
            if (it->second == cplx{}) terms_.erase(it);
        }
    }

    friend bool operator==(const MultivariatePolynomial&, const MultivariatePolynomial&) = default;

private:
    std::size_t dim_ = 0;
    std::map<MultiIndex, cplx> terms_;
};

// Exponent vector alpha with n = Q^alpha, or an IncompatibleError.
inline MultiIndex generator_exponents(u64 n, const GeneratorSet& Q) {
    MultiIndex alpha(Q.dim(), 0);
    if (n == 1) return alpha;
    auto fail = [&]() -> IncompatibleError {
        return IncompatibleError("generator set is not compatible with n = " + std::to_string(n), n);
    };
    if (Q.all_prime()) {
        for (const auto& pp : factorize(n).factors) {
            auto it = std::find(Q.generators().begin(), Q.generators().end(), pp.prime);
            if (it == Q.generators().end()) throw fail();
            alpha[static_cast<std::size_t>(it - Q.generators().begin())] = pp.exponent;
        }
        return alpha;
    }
    auto sol = solve_exponents(n, Q.generators());
    if (!sol) throw fail();
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        const Rational& r = (*sol)[j];
        if (denominator(r) != 1 || r < 0) throw fail();
        alpha[j] = static_cast<int>(numerator(r));
    }
    return alpha;
}

inline MultivariatePolynomial bohr_lift(const DirichletPolynomial& f, const GeneratorSet& Q) {
    MultivariatePolynomial P(Q.dim());
    for (const auto& [n, c] : f.coeffs()) P.add_to(generator_exponents(n, Q), c);
    return P;
}

inline int degree(const MultivariatePolynomial& P) {
    int d = 0;
    for (const auto& [a, c] : P.terms()) d = std::max(d, total_degree(a));
    return d;
}

inline cplx eval_polydisc(const MultivariatePolynomial& P, const std::vector<cplx>& z) {
    if (z.size() != P.dim()) throw DomainError("eval_polydisc: dimension mismatch");
    cplx total{};
    for (const auto& [a, c] : P.terms()) {
        cplx term = c;
        for (std::size_t l = 0; l < a.size(); ++l)
            for (int e = 0; e < a[l]; ++e) term *= z[l];
        total += term;
    }
    return total;
}

inline std::vector<cplx> torus_point(const std::vector<double>& theta) {
    std::vector<cplx> z;
    z.reserve(theta.size());
    for (double t : theta) z.push_back(std::polar(1.0, t));
    return z;
}

inline cplx eval_torus(const MultivariatePolynomial& P, const std::vector<double>& theta) {
    if (theta.size() != P.dim()) throw DomainError("eval_torus: dimension mismatch");
    cplx total{};
    for (const auto& [a, c] : P.terms()) {
        double phase = 0.0;
        for (std::size_t l = 0; l < a.size(); ++l) phase += a[l] * theta[l];
        total += c * std::polar(1.0, phase);
    }
    return total;
}

inline constexpr int kMaxPartialOrder = 4;

inline MultivariatePolynomial partial_derivative(const MultivariatePolynomial& P, const MultiIndex& alpha) {
    if (alpha.size() != P.dim()) throw DomainError("partial_derivative: dimension mismatch");
    if (total_degree(alpha) > kMaxPartialOrder)
        throw GuardError("partial_derivative: order above 4 is not supported");
    MultivariatePolynomial out(P.dim());
    for (const auto& [a, c] : P.terms()) {
        MultiIndex b = a;
        cplx coef = c;
        bool vanishes = false;
        for (std::size_t l = 0; l < a.size() && !vanishes; ++l) {
            if (alpha[l] > a[l]) {
                vanishes = true;
                break;
            }
            for (int k = 0; k < alpha[l]; ++k) coef *= static_cast<double>(a[l] - k);
            b[l] = a[l] - alpha[l];
        }
        if (!vanishes) out.add_to(b, coef);
    }
    return out;
}

// P evaluated at (q_1^{-s}, ..., q_d^{-s}).
inline cplx kronecker_restriction(const MultivariatePolynomial& P, const GeneratorSet& Q, cplx s) {
    if (Q.dim() != P.dim()) throw DomainError("kronecker_restriction: dimension mismatch");
    std::vector<cplx> z;
    for (u64 q : Q.generators()) z.push_back(std::exp(-s * std::log(static_cast<double>(q))));
    return eval_polydisc(P, z);
}

// d^beta / d theta^beta of P(e^{i theta}): sum c_alpha prod (i alpha_l)^{beta_l} e^{i alpha.theta}.
inline cplx torus_derivative(const MultivariatePolynomial& P, const std::vector<double>& theta, const MultiIndex& beta) {
    if (theta.size() != P.dim() || beta.size() != P.dim()) throw DomainError("torus_derivative: dimension mismatch");
    const cplx I(0.0, 1.0);
    cplx total{};
    for (const auto& [a, c] : P.terms()) {
        cplx term = c;
        double phase = 0.0;
        for (std::size_t l = 0; l < a.size(); ++l) {
            phase += a[l] * theta[l];
            for (int k = 0; k < beta[l]; ++k) term *= I * static_cast<double>(a[l]);
        }
        total += term * std::polar(1.0, phase);
    }
    return total;
}

}  // namespace hcomp
