#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcomp/bohr.hpp"
#include "hcomp/config.hpp"
#include "hcomp/dirichlet.hpp"
#include "hcomp/error.hpp"
#include "hcomp/torus.hpp"

namespace hcomp {

// phi(s) = c0 s + psi(s); c1 is the n = 1 coefficient of psi.
struct Symbol {
    int c0 = 0;
    DirichletPolynomial psi;

    Symbol() = default;
    Symbol(int characteristic, DirichletPolynomial p) : c0(characteristic), psi(std::move(p)) {
        if (c0 < 0) throw DomainError("characteristic must be a nonnegative integer");
    }

    cplx c1() const { return psi.coeff(1); }
    friend bool operator==(const Symbol&, const Symbol&) = default;
};

inline int characteristic(const Symbol& phi) { return phi.c0; }

// Real-part level that phi(C_0) must stay above: 1/2 for c0 = 0, else 0.
inline double threshold(const Symbol& phi) { return phi.c0 == 0 ? 0.5 : 0.0; }

inline cplx evaluate(const Symbol& phi, cplx s) { return static_cast<double>(phi.c0) * s + evaluate(phi.psi, s); }

inline cplx evaluate_derivative(const Symbol& phi, cplx s) {
    return static_cast<double>(phi.c0) + evaluate(derivative(phi.psi), s);
}

inline DirichletPolynomial nonconstant_part(const DirichletPolynomial& psi) {
    DirichletPolynomial out(psi.truncation());
    for (const auto& [n, c] : psi.coeffs())
        if (n != 1) out.add_to(n, c);
    return out;
}

inline bool is_constant(const Symbol& phi) { return nonconstant_part(phi.psi).is_zero(); }

enum class SymbolClassKind { Linear, PolynomialDegreeLE2, GeneralPolynomial };

inline const char* to_string(SymbolClassKind k) {
    switch (k) {
        case SymbolClassKind::Linear: return "Linear";
        case SymbolClassKind::PolynomialDegreeLE2: return "PolynomialDegreeLE2";
        case SymbolClassKind::GeneralPolynomial: return "GeneralPolynomial";
    }
    return "?";
}

struct SymbolClass {
    SymbolClassKind kind = SymbolClassKind::Linear;
    std::vector<u64> generators;     // Linear only
    std::vector<cplx> coefficients;  // Linear only, aligned with generators
    int degree = 0;                  // max Omega over the support
};

inline SymbolClass classify(const Symbol& phi) {
    SymbolClass cls;
    cls.degree = dirichlet_degree(phi.psi);
    const auto rest = nonconstant_part(phi.psi);
    std::vector<u64> keys;
    for (const auto& [n, c] : rest.coeffs()) keys.push_back(n);
    if (is_mult_independent(keys)) {
        cls.kind = SymbolClassKind::Linear;
        cls.generators = keys;
        for (u64 n : keys) cls.coefficients.push_back(rest.coeff(n));
    } else if (cls.degree <= 2) {
        cls.kind = SymbolClassKind::PolynomialDegreeLE2;
    } else {
        cls.kind = SymbolClassKind::GeneralPolynomial;
    }
    return cls;
}

// Prime basis for the Bohr lift of a family of symbols: the primes dividing their supports.
inline GeneratorSet prime_basis(const std::vector<const Symbol*>& symbols) {
    std::vector<u64> ps;
    for (const Symbol* s : symbols) {
        auto q = support_primes(s->psi);
        ps.insert(ps.end(), q.begin(), q.end());
    }
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    return GeneratorSet(ps);
}

inline GeneratorSet prime_basis(const Symbol& phi) { return prime_basis(std::vector<const Symbol*>{&phi}); }

struct RangeReport {
    double infimum = 0.0;  // min over the torus of Re B psi
    std::vector<double> witness_theta;
    bool restricted = false;
    bool marginal = false;
    double threshold = 0.0;
    int resolution = 0;  // 0 when no grid was needed
    std::vector<u64> basis;
    std::optional<double> closed_form;  // Linear symbols: Re c1 - sum |c_q|
};

inline RangeReport range_infimum(const Symbol& phi, int resolution = 0, double refine_tol = 1e-9,
                                 double membership_tol = 1e-7) {
    RangeReport r;
    r.threshold = threshold(phi);
    if (is_constant(phi)) {
        r.infimum = phi.c1().real();
    } else {
        const auto Q = prime_basis(phi);
        r.basis = Q.generators();
        const TorusObjective J(bohr_lift(phi.psi, Q), 0.0);
        const auto found = torus_search(J, resolution, refine_tol);
        r.infimum = found.best.value;
        r.witness_theta = found.best.theta;
        r.resolution = found.resolution;
        const auto cls = classify(phi);
        if (cls.kind == SymbolClassKind::Linear) {
            double cf = phi.c1().real();
            for (cplx c : cls.coefficients) cf -= std::abs(c);
            r.closed_form = cf;
        }
    }
    r.restricted = r.infimum > r.threshold + membership_tol;
    r.marginal = std::abs(r.infimum - r.threshold) < membership_tol;
    return r;
}

struct Membership {
    bool member = false;
    std::string reason;
    RangeReport range;
};

inline Membership gh_membership(const Symbol& phi, const AnalysisConfig& cfg = {}) {
    Membership m;
    m.range = range_infimum(phi, cfg.resolution, cfg.tol.refine, cfg.tol.membership);
    const double re_c1 = phi.c1().real();
    if (is_constant(phi)) {
        if (phi.c0 >= 1) {
            m.member = re_c1 >= 0.0;
            m.reason = m.member ? "constant psi with Re c1 >= 0" : "constant psi with Re c1 < 0";
        } else {
            // phi is the constant c1 and must lie in the open half-plane Re > 1/2.
            m.member = re_c1 > 0.5;
            m.reason = m.member ? "constant symbol inside Re > 1/2" : "constant symbol outside Re > 1/2";
        }
        return m;
    }
    m.member = m.range.infimum >= m.range.threshold - cfg.tol.membership;
    if (phi.c0 == 0)
        m.reason = m.member ? "psi maps C_0 into the half-plane Re > 1/2" : "Re psi drops below 1/2 on the torus";
    else
        m.reason = m.member ? "psi maps C_0 into C_0" : "Re psi drops below 0 on the torus";
    return m;
}

inline void require_membership(const Symbol& phi, const AnalysisConfig& cfg = {}) {
    const auto m = gh_membership(phi, cfg);
    if (!m.member) throw MembershipError("symbol is not in the Gordon-Hedenmalm class: " + m.reason, m.range.infimum);
}

// Keeps c0, c1 and the coefficients whose prime factors all lie in Q.
inline Symbol project_Q(const Symbol& phi, const std::vector<u64>& Q) {
    for (u64 p : Q)
        if (!is_prime(p)) throw DomainError("project_Q: Q must consist of primes");
    DirichletPolynomial out(phi.psi.truncation());
    for (const auto& [n, c] : phi.psi.coeffs()) {
        bool keep = true;
        for (const auto& pp : factorize(n).factors)
            if (std::find(Q.begin(), Q.end(), pp.prime) == Q.end()) keep = false;
        if (keep) out.add_to(n, c);
    }
    return Symbol(phi.c0, out);
}

inline Symbol shift_sigma(const Symbol& phi, double sigma) {
    auto psi = horizontal_shift(phi.psi, sigma);
    psi.add_to(1, static_cast<double>(phi.c0) * sigma);
    return Symbol(phi.c0, psi);
}

inline Symbol convex_combination(const Symbol& phi0, const Symbol& phi1, double lambda) {
    if (phi0.c0 != phi1.c0) throw DomainError("convex_combination: characteristics differ");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("convex_combination: lambda must lie in [0, 1]");
    if (lambda == 0.0) return phi0;
    if (lambda == 1.0) return phi1;
    return Symbol(phi0.c0, add(scale(phi0.psi, 1.0 - lambda), scale(phi1.psi, lambda)));
}

// c0 s + psi + delta * base^k, re-verified to lie in the class.
inline Symbol perturb_power(const Symbol& phi, const DirichletPolynomial& base, int k, double delta,
                            const AnalysisConfig& cfg = {}) {
    if (k < 2) throw DomainError("perturb_power: k must be at least 2");
    Symbol out(phi.c0, add(phi.psi, scale(power(base, k), delta)));
    const auto m = gh_membership(out, cfg);
    if (!m.member)
        throw MembershipError("perturbed symbol leaves the class (infimum " + std::to_string(m.range.infimum) + ")",
                              m.range.infimum);
    return out;
}

// Default base: psi for c0 >= 1, phi - 1/2 for c0 = 0.
inline Symbol perturb_power(const Symbol& phi, int k, double delta, const AnalysisConfig& cfg = {}) {
    DirichletPolynomial base = phi.psi;
    if (phi.c0 == 0) base.add_to(1, -0.5);
    return perturb_power(phi, base, k, delta, cfg);
}

inline Symbol twist(const Symbol& phi, const TwistCharacter& chi) { return Symbol(phi.c0, twist(phi.psi, chi)); }

inline Symbol vertical_translate(const Symbol& phi, double tau) {
    auto psi = vertical_translate(phi.psi, tau);
    psi.add_to(1, cplx(0.0, static_cast<double>(phi.c0) * tau));
    return Symbol(phi.c0, psi);
}

inline void to_json(nlohmann::json& j, const Symbol& phi) { j = {{"c0", phi.c0}, {"psi", phi.psi}}; }

inline void from_json(const nlohmann::json& j, Symbol& phi) {
    phi = Symbol(j.at("c0").get<int>(), j.at("psi").get<DirichletPolynomial>());
}

inline void to_json(nlohmann::json& j, const RangeReport& r) {
    j = {{"infimum", r.infimum},     {"witness_theta", r.witness_theta}, {"restricted", r.restricted},
         {"marginal", r.marginal},   {"threshold", r.threshold},         {"resolution", r.resolution},
         {"basis", r.basis},         {"closed_form", nullptr}};
    if (r.closed_form) j["closed_form"] = *r.closed_form;
}

}  // namespace hcomp
