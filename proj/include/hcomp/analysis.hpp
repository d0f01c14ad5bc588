#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "hcomp/bohr.hpp"
#include "hcomp/config.hpp"
#include "hcomp/dirichlet.hpp"
#include "hcomp/error.hpp"
#include "hcomp/kernels.hpp"
#include "hcomp/symbols.hpp"
#include "hcomp/torus.hpp"

namespace hcomp {

namespace detail {

// Portable uniform/normal draws on top of mt19937_64 (the std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double normal() {
        const double u1 = 1.0 - uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 eng_;
};

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> out;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
        out.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
    }
    return out;
}

inline bool close(cplx a, cplx b, double rel_tol) {
    return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// All multi-indices of length d with lo <= |alpha| <= hi, graded then lexicographic.
inline std::vector<MultiIndex> multi_indices(std::size_t d, int lo, int hi) {
    std::vector<MultiIndex> out;
    for (int total = lo; total <= hi; ++total) {
        MultiIndex a(d, 0);
        auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
            if (pos + 1 == d) {
                a[pos] = left;
                out.push_back(a);
                return;
            }
            for (int v = left; v >= 0; --v) {
                a[pos] = v;
                self(self, pos + 1, left - v);
            }
        };
        if (d == 0) {
            if (total == 0) out.push_back(a);
            continue;
        }
        rec(rec, 0, total);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Boundary points, boundary data, contact order

struct BoundaryPoint {
    std::vector<double> theta;
    std::vector<cplx> z;
    GeneratorSet generators;
};

inline BoundaryPoint make_boundary_point(std::vector<double> theta, const GeneratorSet& Q) {
    if (theta.size() != Q.dim()) throw DomainError("boundary point: dimension mismatch");
    BoundaryPoint p{std::move(theta), {}, Q};
    p.z = torus_point(p.theta);
    return p;
}

// J_phi(theta) = Re B_Q psi(e^{i theta}) - threshold(phi)
inline TorusObjective boundary_objective(const Symbol& phi, const GeneratorSet& Q) {
    return TorusObjective(bohr_lift(phi.psi, Q), threshold(phi));
}

inline constexpr std::size_t kMaxGammaPoints = 32;

inline std::vector<BoundaryPoint> gamma_set(const Symbol& phi, const GeneratorSet& Q, int resolution = 0,
                                            double gamma_tol = 1e-8, double refine_tol = 1e-9) {
    const auto J = boundary_objective(phi, Q);
    const std::size_t d = Q.dim();
    if (d == 0) {
        if (J({}) < gamma_tol) return {make_boundary_point({}, Q)};
        return {};
    }
    const auto found = torus_search(J, resolution, refine_tol, 64);
    if (found.best.value < -1e-7) throw PreconditionError("gamma_set: symbol is not in the class (J < 0)");
    std::vector<TorusPoint> cands;
    const std::vector<double> origin(d, 0.0);
    const double at_origin = J(origin);
    if (at_origin < gamma_tol) cands.push_back({at_origin, origin});
    for (const auto& m : found.minima)
        if (m.value < gamma_tol) cands.push_back(m);
    std::sort(cands.begin(), cands.end(), torus_point_less);
    std::vector<TorusPoint> kept;
    for (const auto& c : cands) {
        bool dup = false;
        for (const auto& k : kept)
            if (torus_distance(c.theta, k.theta) < 1e-6) dup = true;
        if (!dup) kept.push_back(c);
    }
    // Flat minima are only located to about sqrt(eps); move onto a nearby rational angle 2 pi k / N when J allows.
    for (auto& k : kept) {
        auto snapped = k.theta;
        for (double& t : snapped)
            for (int N : {1, 2, 3, 4, 6, 8, 12}) {
                const double step = 2.0 * std::numbers::pi / N;
                const double r = wrap_angle(std::round(t / step) * step);
                if (std::abs(wrap_angle(t - r)) < 1e-5) {
                    t = (r == -std::numbers::pi ? std::numbers::pi : r) + 0.0;  // + 0.0 clears a negative zero
                    break;
                }
            }
        const double v = J(snapped);
        if (snapped != k.theta && v <= std::max(k.value, 0.0) + 1e-14 && v < gamma_tol) k = {v, snapped};
    }
    std::sort(kept.begin(), kept.end(), [](const TorusPoint& a, const TorusPoint& b) { return a.theta < b.theta; });
    kept.erase(std::unique(kept.begin(), kept.end(),
                           [](const TorusPoint& a, const TorusPoint& b) { return torus_distance(a.theta, b.theta) < 1e-6; }),
               kept.end());
    if (kept.size() > kMaxGammaPoints) kept.resize(kMaxGammaPoints);
    std::vector<BoundaryPoint> out;
    for (auto& k : kept) out.push_back(make_boundary_point(k.theta, Q));
    return out;
}

struct BoundaryData {
    cplx value;
    std::map<MultiIndex, cplx> partials;  // 1 <= |alpha| <= order
    int order = 2;
};

inline BoundaryData boundary_data(const Symbol& phi, const BoundaryPoint& point, int order) {
    if (order < 1 || order > 2) throw DomainError("boundary_data: order must be 1 or 2");
    const auto P = bohr_lift(phi.psi, point.generators);
    BoundaryData bd;
    bd.order = order;
    bd.value = eval_polydisc(P, point.z);
    for (const auto& a : multi_indices(P.dim(), 1, order)) bd.partials[a] = eval_polydisc(partial_derivative(P, a), point.z);
    return bd;
}

inline bool same_boundary_data(const Symbol& phi0, const Symbol& phi1, const BoundaryPoint& point, int order,
                               double eq_tol = 1e-9) {
    const auto a = boundary_data(phi0, point, order), b = boundary_data(phi1, point, order);
    if (!detail::close(a.value, b.value, eq_tol)) return false;
    for (const auto& [alpha, v] : a.partials)
        if (!detail::close(v, b.partials.at(alpha), eq_tol)) return false;
    return true;
}

struct ShellCheck {
    double radius = 0.0;
    double min_ratio = 0.0;  // min over sampled directions of J / r^{2n}
};

struct ContactReport {
    BoundaryPoint point;
    std::optional<int> order;  // nullopt: higher than checked
    double constant = 0.0;
    double neighborhood_radius = 0.0;
    std::vector<double> hessian_eigenvalues;
    std::vector<ShellCheck> shells;
};

namespace detail {

// Taylor polynomial of J about theta0 with coefficients below the rounding floor set to zero,
// so that J can be evaluated far below double precision of the direct sum.
class TaylorJet {
public:
    TaylorJet(const TorusObjective& J, const std::vector<double>& theta0, int degree) {
        const auto& P = J.polynomial();
        const std::size_t d = J.dim();
        for (const auto& beta : multi_indices(d, 0, degree)) {
            double fact = 1.0;
            for (int b : beta)
                for (int k = 2; k <= b; ++k) fact *= k;
            double value = torus_derivative(P, theta0, beta).real();
            if (total_degree(beta) == 0) value -= J.offset();
            double scale = total_degree(beta) == 0 ? std::abs(J.offset()) : 0.0;
            for (const auto& [a, c] : P.terms()) {
                double m = std::abs(c);
                for (std::size_t l = 0; l < d; ++l)
                    for (int k = 0; k < beta[l]; ++k) m *= std::abs(a[l]);
                scale += m;
            }
            if (std::abs(value) <= 1e-10 * scale) continue;
            terms_.push_back({beta, value / fact});
        }
    }

    double operator()(const std::vector<double>& delta) const {
        double s = 0.0;
        for (const auto& [beta, c] : terms_) {
            double t = c;
            for (std::size_t l = 0; l < beta.size(); ++l)
                for (int k = 0; k < beta[l]; ++k) t *= delta[l];
            s += t;
        }
        return s;
    }

private:
    std::vector<std::pair<MultiIndex, double>> terms_;
};

inline std::vector<std::vector<double>> shell_directions(std::size_t d, const Eigen::MatrixXd& eigvecs, std::uint64_t seed) {
    std::vector<std::vector<double>> dirs;
    auto push_pm = [&](std::vector<double> u) {
        double n = 0.0;
        for (double x : u) n += x * x;
        n = std::sqrt(n);
        if (n == 0.0) return;
        for (double& x : u) x /= n;
        dirs.push_back(u);
        for (double& x : u) x = -x;
        dirs.push_back(u);
    };
    for (std::size_t l = 0; l < d; ++l) {
        std::vector<double> u(d, 0.0);
        u[l] = 1.0;
        push_pm(u);
    }
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t m = l + 1; m < d; ++m)
            for (double sgn : {1.0, -1.0}) {
                std::vector<double> u(d, 0.0);
                u[l] = 1.0;
                u[m] = sgn;
                push_pm(u);
            }
    for (Eigen::Index c = 0; c < eigvecs.cols(); ++c) {
        std::vector<double> u(d);
        for (std::size_t l = 0; l < d; ++l) u[l] = eigvecs(static_cast<Eigen::Index>(l), c);
        push_pm(u);
    }
    if (d >= 2) {
        Rng rng(seed);
        for (int k = 0; k < 64; ++k) {
            std::vector<double> u(d);
            for (double& x : u) x = rng.normal();
            push_pm(u);
        }
    }
    return dirs;
}

}  // namespace detail

inline ContactReport contact_order(const Symbol& phi, const BoundaryPoint& point, int max_order = 8,
                                   const AnalysisConfig& cfg = {}) {
    const auto J = boundary_objective(phi, point.generators);
    const std::size_t d = J.dim();
    if (!(J(point.theta) < cfg.tol.gamma)) throw PreconditionError("contact_order: point is not in Gamma");
    ContactReport rep;
    rep.point = point;
    if (d == 0) return rep;  // a single point torus: nothing to measure

    const Eigen::MatrixXd H = J.hessian(point.theta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) rep.hessian_eigenvalues.push_back(es.eigenvalues()(k));
    const bool hessian_pd = es.eigenvalues().minCoeff() > 1e-9 * std::max(1.0, H.norm());

    const detail::TaylorJet jet(J, point.theta, std::max(max_order, 2) + 2);
    const auto dirs = detail::shell_directions(d, es.eigenvectors(), cfg.seed);
    auto sample = [&](const std::vector<double>& delta) {
        auto th = point.theta;
        for (std::size_t l = 0; l < d; ++l) th[l] += delta[l];
        const double direct = J(th);
        return direct > 1e-8 ? direct : jet(delta);
    };
    const std::vector<double> radii = {1e-1, 1e-2, 1e-3};
    auto shells_for = [&](int two_n) {
        std::vector<ShellCheck> out;
        for (double r : radii) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& u : dirs) {
                std::vector<double> delta(d);
                for (std::size_t l = 0; l < d; ++l) delta[l] = r * u[l];
                m = std::min(m, sample(delta) / std::pow(r, two_n));
            }
            out.push_back({r, m});
        }
        return out;
    };
    // Constant and radius from the shells that hold, working outwards from the finest.
    auto settle = [&](const std::vector<ShellCheck>& shells, int two_n) {
        rep.order = two_n;
        rep.shells = shells;
        rep.constant = std::numeric_limits<double>::infinity();
        for (std::size_t k = shells.size(); k-- > 0;) {
            if (!(shells[k].min_ratio > 0.0)) break;
            rep.constant = std::min(rep.constant, shells[k].min_ratio);
            rep.neighborhood_radius = shells[k].radius;
        }
        if (!std::isfinite(rep.constant)) rep.constant = 0.0;
    };

    if (hessian_pd) {
        settle(shells_for(2), 2);
        return rep;
    }
    for (int two_n = 4; two_n <= max_order; two_n += 2) {
        const auto sh = shells_for(two_n);
        rep.shells = sh;
        const double mid = sh[1].min_ratio, fine = sh[2].min_ratio;
        if (mid > 0.0 && fine > 0.0 && fine >= 0.25 * mid) {
            settle(sh, two_n);
            return rep;
        }
    }
    rep.order.reset();
    return rep;
}

// ---------------------------------------------------------------------------
// Angular derivatives and verdicts

struct AngularDerivative {
    cplx value;
    bool finite = false;
    cplx boundary_value;
};

inline AngularDerivative angular_derivative(const Symbol& phiQ, double alpha, double nt_tol = 1e-8) {
    AngularDerivative ad;
    const cplx s(0.0, alpha);
    ad.boundary_value = evaluate(phiQ, s);
    ad.finite = ad.boundary_value.real() - threshold(phiQ) <= nt_tol;
    if (ad.finite) ad.value = evaluate_derivative(phiQ, s);
    return ad;
}

enum class VerdictKind {
    Compact,
    NotCompact,
    CompactDifference,
    NotCompactDifference,
    SameComponentSufficient,
    ObstructedComponent,
    Undecided
};

inline const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Compact: return "Compact";
        case VerdictKind::NotCompact: return "NotCompact";
        case VerdictKind::CompactDifference: return "CompactDifference";
        case VerdictKind::NotCompactDifference: return "NotCompactDifference";
        case VerdictKind::SameComponentSufficient: return "SameComponentSufficient";
        case VerdictKind::ObstructedComponent: return "ObstructedComponent";
        case VerdictKind::Undecided: return "Undecided";
    }
    return "?";
}

struct Verdict {
    VerdictKind kind = VerdictKind::Undecided;
    std::string criterion;  // the result the verdict rests on, in words
    nlohmann::json certificate = nlohmann::json::object();
    Tolerances tolerances;
    std::optional<double> bound;     // ObstructedComponent
    std::optional<double> constant;  // SameComponentSufficient
};

inline void to_json(nlohmann::json& j, const Verdict& v) {
    j = {{"verdict", to_string(v.kind)},
         {"certificate", v.certificate},
         {"tolerances", v.tolerances},
         {"criterion", v.criterion}};
}

inline nlohmann::json cplx_json(cplx c) { return nlohmann::json::array({c.real() + 0.0, c.imag() + 0.0}); }

inline void to_json(nlohmann::json& j, const BoundaryPoint& p) {
    nlohmann::json z = nlohmann::json::array();
    for (cplx c : p.z) z.push_back(cplx_json(c));
    j = {{"theta", p.theta}, {"z", z}, {"generators", p.generators.generators()}};
}

inline void to_json(nlohmann::json& j, const ContactReport& r) {
    nlohmann::json shells = nlohmann::json::array();
    for (const auto& s : r.shells) shells.push_back({{"radius", s.radius}, {"min_ratio", s.min_ratio}});
    j = {{"point", r.point},
         {"order", r.order ? nlohmann::json(*r.order) : nlohmann::json("higher-than-checked")},
         {"constant", r.constant},
         {"neighborhood_radius", r.neighborhood_radius},
         {"hessian_eigenvalues", r.hessian_eigenvalues},
         {"shells", shells}};
}

inline nlohmann::json to_json_data(const BoundaryData& bd) {
    nlohmann::json partials = nlohmann::json::array();
    for (const auto& [a, v] : bd.partials) partials.push_back({{"alpha", a}, {"value", cplx_json(v)}});
    return {{"value", cplx_json(bd.value)}, {"partials", partials}, {"order", bd.order}};
}

// Generic rank of the Jacobian of the Bohr lift over its support primes.
inline int complex_dimension(const Symbol& phi, std::uint64_t seed = 7) {
    const auto Q = prime_basis(phi);
    const auto P = bohr_lift(phi.psi, Q);
    const std::size_t d = Q.dim();
    if (d == 0) return 0;
    detail::Rng rng(seed);
    const std::size_t rows = d + 3;
    Eigen::MatrixXcd G(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    std::vector<MultivariatePolynomial> grads;
    for (std::size_t l = 0; l < d; ++l) {
        MultiIndex e(d, 0);
        e[l] = 1;
        grads.push_back(partial_derivative(P, e));
    }
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<cplx> z(d);
        for (auto& x : z) x = std::polar(0.2 + 0.7 * rng.uniform(), 2.0 * std::numbers::pi * rng.uniform());
        for (std::size_t l = 0; l < d; ++l)
            G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) = eval_polydisc(grads[l], z);
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(G);
    lu.setThreshold(1e-8);
    return static_cast<int>(lu.rank());
}

// psi - c1 supported on {q, q^2} for a single prime q.
inline bool one_prime_quadratic_form(const Symbol& phi) {
    const auto rest = nonconstant_part(phi.psi);
    const auto ps = support_primes(rest);
    if (ps.size() != 1) return false;
    for (const auto& [n, c] : rest.coeffs())
        if (n != ps[0] && n != ps[0] * ps[0]) return false;
    return true;
}

inline Verdict compactness_verdict(const Symbol& phi, const AnalysisConfig& cfg = {}) {
    const auto m = gh_membership(phi, cfg);
    if (!m.member) throw MembershipError("compactness_verdict: " + m.reason, m.range.infimum);
    Verdict v;
    v.tolerances = cfg.tol;
    v.certificate["range"] = m.range;
    v.certificate["characteristic"] = phi.c0;
    const auto cls = classify(phi);
    v.certificate["class"] = to_string(cls.kind);
    v.certificate["degree"] = cls.degree;

    if (phi.c0 == 0 && is_constant(phi)) {
        v.kind = VerdictKind::Compact;
        v.criterion = "constant symbol: C_phi has rank one";
        return v;
    }
    if (m.range.restricted) {
        v.kind = VerdictKind::Compact;
        v.criterion = "restricted range implies compactness";
        return v;
    }
    if (phi.c0 >= 1) {
        v.kind = VerdictKind::NotCompact;
        v.criterion = "polynomial symbol with positive characteristic: compact iff restricted range";
        return v;
    }
    if (cls.kind == SymbolClassKind::Linear) {
        const auto d = cls.generators.size();
        v.certificate["generators"] = cls.generators;
        if (d >= 2) {
            v.kind = VerdictKind::Compact;
            v.criterion = "linear symbol with zero characteristic: compact iff restricted range or d >= 2";
        } else {
            v.kind = VerdictKind::NotCompact;
            v.criterion = "linear symbol with zero characteristic: compact iff restricted range or d >= 2 (here d = 1)";
        }
        return v;
    }
    if (cls.kind == SymbolClassKind::PolynomialDegreeLE2) {
        const int dim = complex_dimension(phi, cfg.seed);
        v.certificate["complex_dimension"] = dim;
        if (dim >= 2) {
            v.kind = VerdictKind::Compact;
            v.criterion = "zero characteristic, degree at most 2, complex dimension at least 2";
            return v;
        }
        if (one_prime_quadratic_form(phi)) {
            v.kind = VerdictKind::NotCompact;
            v.criterion = "zero characteristic, one-variable form c1 + e q^{-s} + f q^{-2s} with unrestricted range";
            return v;
        }
        v.certificate["why"] = "degree at most 2 with complex dimension 1 outside the one-prime form";
        return v;
    }
    v.certificate["why"] = "zero-characteristic polynomial of degree above 2 with unrestricted range is not settled";
    return v;
}

// ---------------------------------------------------------------------------
// Essential-norm lower bounds for differences

inline Verdict essential_lower_bound_difference(const Symbol& phi0, const Symbol& phi1, const std::vector<u64>& Q,
                                                double alpha, const AnalysisConfig& cfg = {}) {
    if (phi0.c0 != phi1.c0) throw PreconditionError("essential_lower_bound_difference: characteristics differ");
    if (Q.empty()) throw PreconditionError("essential_lower_bound_difference: Q must be nonempty");
    if (phi0.c0 == 0 && Q.size() != 1)
        throw PreconditionError("essential_lower_bound_difference: zero characteristic requires |Q| = 1");
    const Symbol a = project_Q(phi0, Q), b = project_Q(phi1, Q);
    const auto ad0 = angular_derivative(a, alpha, cfg.tol.nt);
    if (!ad0.finite)
        throw PreconditionError("essential_lower_bound_difference: phi0_Q has no finite angular derivative at i alpha");
    const auto ad1 = angular_derivative(b, alpha, cfg.tol.nt);

    Verdict v;
    v.tolerances = cfg.tol;
    v.certificate = {{"Q", Q},
                     {"alpha", alpha},
                     {"boundary_value_0", cplx_json(ad0.boundary_value)},
                     {"boundary_value_1", cplx_json(ad1.boundary_value)},
                     {"angular_derivative_0", cplx_json(ad0.value)},
                     {"phi1_finite", ad1.finite}};
    if (ad1.finite) v.certificate["angular_derivative_1"] = cplx_json(ad1.value);

    std::string cause;
    if (!detail::close(ad0.boundary_value, ad1.boundary_value, cfg.tol.eq))
        cause = "boundary values differ";
    else if (!ad1.finite)
        cause = "phi1_Q has no finite angular derivative at i alpha";
    else if (!detail::close(ad0.value, ad1.value, cfg.tol.eq))
        cause = "angular derivatives differ";
    if (cause.empty()) {
        v.kind = VerdictKind::Undecided;
        v.certificate["why"] = "identical boundary value and angular derivative at i alpha";
        return v;
    }
    v.kind = VerdictKind::ObstructedComponent;
    v.certificate["cause"] = cause;
    const double dre = ad0.value.real();
    if (phi0.c0 >= 1) {
        v.criterion = "essential norm of the difference is at least phi0_Q'(i alpha)^{-d/2}";
        v.bound = std::pow(dre, -0.5 * static_cast<double>(Q.size()));
        v.certificate["bound"] = *v.bound;
    } else {
        v.criterion = "zero characteristic: essential norm of the difference is at least C_Q phi0_Q'(i alpha)^{-1/2}";
        v.certificate["qualitative"] = true;
        v.certificate["relative_scale"] = std::pow(dre, -0.5);
        v.certificate["note"] = "constant unspecified in source";
    }
    return v;
}

// Scans Q in {single primes} (plus the full prime set when c0 >= 1) and the points of Gamma, in both
// orders, and returns the strongest obstruction found.
inline Verdict scan_essential_lower_bound(const Symbol& phi0, const Symbol& phi1, const AnalysisConfig& cfg = {}) {
    if (phi0.c0 != phi1.c0) throw PreconditionError("scan_essential_lower_bound: characteristics differ");
    const auto all = prime_basis(std::vector<const Symbol*>{&phi0, &phi1}).generators();
    std::vector<std::vector<u64>> Qs;
    for (u64 p : all) Qs.push_back({p});
    if (phi0.c0 >= 1 && all.size() >= 2) Qs.push_back(all);
    Verdict best;
    best.tolerances = cfg.tol;
    int scanned = 0;
    bool found = false;
    for (int order = 0; order < 2; ++order) {
        const Symbol& a = order == 0 ? phi0 : phi1;
        const Symbol& b = order == 0 ? phi1 : phi0;
        for (const auto& Q : Qs) {
            const Symbol aQ = project_Q(a, Q);
            const GeneratorSet G(Q);
            for (const auto& pt : gamma_set(aQ, G, cfg.resolution, cfg.tol.gamma, cfg.tol.refine)) {
                double alpha;
                if (Q.size() == 1)
                    alpha = 0.0 - pt.theta[0] / std::log(static_cast<double>(Q[0]));
                else if (std::all_of(pt.theta.begin(), pt.theta.end(), [](double t) { return std::abs(t) < 1e-9; }))
                    alpha = 0.0;
                else
                    continue;
                if (!angular_derivative(aQ, alpha, cfg.tol.nt).finite) continue;
                ++scanned;
                auto v = essential_lower_bound_difference(a, b, Q, alpha, cfg);
                if (v.kind != VerdictKind::ObstructedComponent) continue;
                v.certificate["swapped"] = order == 1;
                const double key = v.bound.value_or(0.0);
                if (!found || key > best.bound.value_or(0.0)) {
                    best = v;
                    found = true;
                }
            }
        }
    }
    if (!found) {
        best.kind = VerdictKind::Undecided;
        best.certificate = {{"why", "no boundary point with differing first-order data found"},
                            {"points_scanned", scanned}};
    }
    return best;
}

inline double characteristic_separation(const Symbol& phi0, const Symbol& phi1, u64 p = 2) {
    if (phi0.c0 != 0 || phi1.c0 < 1)
        throw PreconditionError("characteristic_separation: needs char(phi0) = 0 and char(phi1) >= 1");
    if (!is_prime(p)) throw DomainError("characteristic_separation: p must be prime");
    return std::pow(static_cast<double>(p), -phi0.c1().real());
}

struct EmpiricalRow {
    u64 k = 0;
    double re_s = 0.0;
    double source_norm_sq = 0.0;
    double value = 0.0;
};

struct EmpiricalTable {
    std::vector<EmpiricalRow> rows;
    double limit_estimate = 0.0;
    std::size_t tail_count = 0;
};

// ||C*_{phi0} k_s - C*_{phi1} k_s||^2 along the plan's path, k_s the normalized source kernel.
inline double estimator_value(const Symbol& phi0, const Symbol& phi1, const KernelSpec& source, double source_norm_sq) {
    const auto img0 = adjoint_image(phi0, source);
    const auto img1 = adjoint_image(phi1, source);
    const double n0 = kernel_norm_sq(img0), n1 = kernel_norm_sq(img1);
    const double cross = kernel_inner(img0, img1).real();
    return (n0 + n1 - 2.0 * cross) / source_norm_sq;
}

inline EmpiricalTable empirical_essential_norm(const Symbol& phi0, const Symbol& phi1, const KernelSequencePlan& plan) {
    EmpiricalTable t;
    for (const auto& s : kernel_sequence(plan)) {
        const cplx w = std::visit([](const auto& k) { return k.w; }, s.spec);
        t.rows.push_back({s.k, w.real(), s.norm_sq, estimator_value(phi0, phi1, s.spec, s.norm_sq)});
    }
    if (!t.rows.empty()) {
        t.tail_count = (t.rows.size() + 3) / 4;
        double sum = 0.0;
        for (std::size_t j = t.rows.size() - t.tail_count; j < t.rows.size(); ++j) sum += t.rows[j].value;
        t.limit_estimate = sum / static_cast<double>(t.tail_count);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Linear combinations

struct LincombObstruction {
    std::vector<std::size_t> J;  // indices sharing second-order data with symbol 0 at the point
    cplx sum;
    bool obstructed = false;
};

inline LincombObstruction lincomb_obstruction(const std::vector<Symbol>& symbols, const std::vector<cplx>& lambda,
                                              const BoundaryPoint& point, const AnalysisConfig& cfg = {}) {
    if (symbols.empty() || symbols.size() != lambda.size())
        throw PreconditionError("lincomb_obstruction: symbols and coefficients must have equal nonzero length");
    if (symbols[0].c0 <= 0) throw PreconditionError("lincomb_obstruction: the reference symbol needs c0 > 0");
    const auto J0 = boundary_objective(symbols[0], point.generators);
    if (!(J0(point.theta) < cfg.tol.gamma)) throw PreconditionError("lincomb_obstruction: z is not in Gamma");
    LincombObstruction out;
    for (std::size_t j = 0; j < symbols.size(); ++j) {
        // Indices with another characteristic never join the reference class.
        if (symbols[j].c0 != symbols[0].c0) continue;
        if (!same_boundary_data(symbols[0], symbols[j], point, 2, cfg.tol.eq)) continue;
        out.J.push_back(j);
        out.sum += lambda[j];
    }
    out.obstructed = std::abs(out.sum) > cfg.tol.eq;
    return out;
}

inline Verdict lincomb_verdict(const std::vector<Symbol>& symbols, const std::vector<cplx>& lambda,
                               const AnalysisConfig& cfg = {}) {
    if (symbols.empty() || symbols.size() != lambda.size())
        throw DomainError("lincomb_verdict: symbols and coefficients must have equal nonzero length");
    for (cplx l : lambda)
        if (l == cplx{}) throw DomainError("lincomb_verdict: zero coefficient");
    for (std::size_t i = 0; i < symbols.size(); ++i)
        for (std::size_t j = i + 1; j < symbols.size(); ++j)
            if (symbols[i] == symbols[j])
                throw DuplicateError("lincomb_verdict: symbols " + std::to_string(i) + " and " + std::to_string(j) +
                                     " coincide");
    Verdict v;
    v.tolerances = cfg.tol;
    bool all_deg2 = true, all_linear = true, any_positive = false, all_compact = true, any_undecided = false;
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t j = 0; j < symbols.size(); ++j) {
        const auto cls = classify(symbols[j]);
        all_deg2 = all_deg2 && cls.degree <= 2;
        all_linear = all_linear && cls.kind == SymbolClassKind::Linear;
        any_positive = any_positive || symbols[j].c0 > 0;
        const auto cv = compactness_verdict(symbols[j], cfg);
        all_compact = all_compact && cv.kind == VerdictKind::Compact;
        any_undecided = any_undecided || cv.kind == VerdictKind::Undecided;
        per.push_back({{"index", j}, {"verdict", to_string(cv.kind)}, {"criterion", cv.criterion}});
    }
    v.certificate["symbols"] = per;
    if (all_compact) {
        v.kind = VerdictKind::Compact;
        v.criterion = "a linear combination of compact operators is compact";
        return v;
    }
    std::string rule;
    if (all_deg2)
        rule = "distinct polynomial symbols of degree at most 2: the combination is compact iff each operator is";
    else if (all_linear && any_positive)
        rule = "distinct linear symbols, one with positive characteristic: compact iff each operator is";
    else if (all_linear)
        rule = "distinct linear symbols with zero characteristic: compact iff each operator is";
    if (rule.empty()) {
        v.certificate["why"] = "the symbols fall outside the settled classes (degree <= 2, or all linear)";
        return v;
    }
    v.criterion = rule;
    if (any_undecided) {
        v.certificate["why"] = "compactness of some individual operator is not settled";
        return v;
    }
    v.kind = VerdictKind::NotCompact;
    return v;
}

// ---------------------------------------------------------------------------
// Sufficient conditions: same component, compact difference

namespace detail {

struct PairSamples {
    std::vector<double> sigma;   // per sample
    std::vector<double> ratio;   // |phi0 - phi1| / min(den0, den1)
    std::vector<double> mden;    // min(den0, den1)
    std::vector<double> psi;     // max(|psi0|, |psi1|)
    std::vector<double> dderiv;  // |phi0' - phi1'|
};

inline int pair_grid_resolution(std::size_t d) {
    if (d <= 1) return 256;
    if (d == 2) return 48;
    if (d == 3) return 12;
    return 6;
}

// Evaluates the pair on {(q_l^{-sigma} e^{i theta_l})}: a torus grid plus radial probes around Gamma points.
inline PairSamples sample_pair(const Symbol& phi0, const Symbol& phi1, const GeneratorSet& Q,
                               const std::vector<BoundaryPoint>& anchors, const std::vector<double>& sigmas) {
    const std::size_t d = Q.dim();
    if (d > kMaxTorusDim) throw GuardError("pair sampling: dimension exceeds 6");
    const auto P0 = bohr_lift(phi0.psi, Q), P1 = bohr_lift(phi1.psi, Q);
    const auto D0 = bohr_lift(derivative(phi0.psi), Q), D1 = bohr_lift(derivative(phi1.psi), Q);
    std::vector<std::vector<double>> thetas;
    if (d == 0) {
        thetas.push_back({});
    } else {
        const int res = pair_grid_resolution(d);
        std::size_t total = 1;
        for (std::size_t l = 0; l < d; ++l) total *= static_cast<std::size_t>(res);
        for (std::size_t f = 0; f < total; ++f) thetas.push_back(grid_angles(f, d, res));
        const auto radii = logspace(1e-4, 0.3, 15);
        const auto dirs = shell_directions(d, Eigen::MatrixXd(static_cast<Eigen::Index>(d), 0), 11);
        for (const auto& a : anchors)
            for (const auto& u : dirs)
                for (double r : radii) {
                    auto th = a.theta;
                    for (std::size_t l = 0; l < d; ++l) th[l] += r * u[l];
                    thetas.push_back(th);
                }
    }
    std::vector<double> logq;
    for (u64 q : Q.generators()) logq.push_back(std::log(static_cast<double>(q)));
    PairSamples out;
    const bool zero_char = phi0.c0 == 0;
    for (double sigma : sigmas) {
        for (const auto& th : thetas) {
            std::vector<cplx> z(d);
            for (std::size_t l = 0; l < d; ++l) z[l] = std::polar(std::exp(-sigma * logq[l]), th[l]);
            const cplx v0 = eval_polydisc(P0, z), v1 = eval_polydisc(P1, z);
            auto den = [&](cplx v) {
                if (zero_char) return (v.real() - 0.5) / std::norm(1.0 + v);
                return static_cast<double>(phi0.c0) * sigma + v.real();
            };
            const double m = std::min(den(v0), den(v1));
            const double diff = std::abs(v0 - v1);
            double ratio;
            if (diff == 0.0)
                ratio = 0.0;
            else if (m <= 0.0)
                ratio = std::numeric_limits<double>::infinity();
            else
                ratio = diff / m;
            out.sigma.push_back(sigma);
            out.ratio.push_back(ratio);
            out.mden.push_back(m);
            out.psi.push_back(std::max(std::abs(v0), std::abs(v1)));
            out.dderiv.push_back(std::abs(eval_polydisc(D0, z) - eval_polydisc(D1, z)));
        }
    }
    return out;
}

inline std::vector<BoundaryPoint> pair_anchors(const Symbol& phi0, const Symbol& phi1, const GeneratorSet& Q,
                                               const AnalysisConfig& cfg) {
    auto g0 = gamma_set(phi0, Q, cfg.resolution, cfg.tol.gamma, cfg.tol.refine);
    auto g1 = gamma_set(phi1, Q, cfg.resolution, cfg.tol.gamma, cfg.tol.refine);
    if (g0.size() > 8) g0.resize(8);
    if (g1.size() > 8) g1.resize(8);
    g0.insert(g0.end(), g1.begin(), g1.end());
    return g0;
}

}  // namespace detail

inline Verdict same_component_check(const Symbol& phi0, const Symbol& phi1, const AnalysisConfig& cfg = {}) {
    if (phi0.c0 != phi1.c0) throw PreconditionError("same_component_check: characteristics differ");
    require_membership(phi0, cfg);
    require_membership(phi1, cfg);
    const auto Q = prime_basis(std::vector<const Symbol*>{&phi0, &phi1});
    const auto sigmas = detail::logspace(1e-6, 1.0, 13);
    const auto smp = detail::sample_pair(phi0, phi1, Q, detail::pair_anchors(phi0, phi1, Q, cfg), sigmas);

    // Per-sigma maxima; boundedness means no growth over the last decade towards sigma -> 0.
    auto per_level = [&](const std::vector<double>& q) {
        std::vector<double> m(sigmas.size(), 0.0);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const auto k = static_cast<std::size_t>(std::find(sigmas.begin(), sigmas.end(), smp.sigma[i]) - sigmas.begin());
            m[k] = std::max(m[k], q[i]);
        }
        return m;
    };
    auto bounded = [](const std::vector<double>& m) {
        return std::isfinite(m[0]) && m[0] <= 2.0 * m[2] + 1e-12;
    };
    const auto r = per_level(smp.ratio), p = per_level(smp.psi), dd = per_level(smp.dderiv);
    const double rsup = *std::max_element(r.begin(), r.end());
    const double psup = *std::max_element(p.begin(), p.end());
    const double dsup = *std::max_element(dd.begin(), dd.end());

    Verdict v;
    v.tolerances = cfg.tol;
    v.certificate = {{"sigma_levels", sigmas},
                     {"difference_ratio_per_level", r},
                     {"difference_ratio_sup", rsup},
                     {"basis", Q.generators()},
                     {"samples", smp.sigma.size()}};
    const bool zero_char = phi0.c0 == 0;
    if (!zero_char) {
        v.certificate["psi_sup"] = psup;
        v.certificate["derivative_difference_sup"] = dsup;
        v.certificate["derivative_difference_per_level"] = dd;
    }
    std::vector<std::string> growing;
    if (!bounded(r)) growing.push_back("difference ratio");
    if (!zero_char && !bounded(p)) growing.push_back("psi");
    if (!zero_char && !bounded(dd)) growing.push_back("derivative difference");
    if (!growing.empty()) {
        v.kind = VerdictKind::Undecided;
        v.certificate["why"] = "sampled supremum grows as sigma -> 0";
        v.certificate["growing"] = growing;
        return v;
    }
    v.kind = VerdictKind::SameComponentSufficient;
    v.constant = zero_char ? rsup : std::max({rsup, psup, dsup});
    v.certificate["C"] = *v.constant;
    v.criterion = zero_char
                      ? "|phi0 - phi1| <= C min((Re phi_j - 1/2)/|1 + phi_j|^2) puts both operators in one component"
                      : "|phi0 - phi1| <= C min Re phi_j, |psi_j| <= C, |phi0' - phi1'| <= C put both operators in one "
                        "component";
    return v;
}

inline bool same_point_sets(const std::vector<BoundaryPoint>& a, const std::vector<BoundaryPoint>& b) {
    auto covered = [](const std::vector<BoundaryPoint>& x, const std::vector<BoundaryPoint>& y) {
        for (const auto& p : x) {
            bool hit = false;
            for (const auto& q : y) hit = hit || torus_distance(p.theta, q.theta) < 1e-6;
            if (!hit) return false;
        }
        return true;
    };
    return covered(a, b) && covered(b, a);
}

inline Verdict compact_difference_check(const Symbol& phi0, const Symbol& phi1, const AnalysisConfig& cfg = {}) {
    if (phi0.c0 != phi1.c0) throw PreconditionError("compact_difference_check: characteristics differ");
    require_membership(phi0, cfg);
    require_membership(phi1, cfg);
    Verdict v;
    v.tolerances = cfg.tol;
    if (phi0 == phi1) {
        v.kind = VerdictKind::CompactDifference;
        v.criterion = "identical symbols: the difference is the zero operator";
        return v;
    }
    const auto Q = prime_basis(std::vector<const Symbol*>{&phi0, &phi1});
    const bool positive = phi0.c0 >= 1;
    std::vector<BoundaryPoint> g0, g1;
    if (positive) {
        g0 = gamma_set(phi0, Q, cfg.resolution, cfg.tol.gamma, cfg.tol.refine);
        g1 = gamma_set(phi1, Q, cfg.resolution, cfg.tol.gamma, cfg.tol.refine);
        // Obstruction with lambda = (1, -1), each symbol taking its turn as reference.
        for (int order = 0; order < 2; ++order) {
            const std::vector<Symbol> syms = order == 0 ? std::vector<Symbol>{phi0, phi1} : std::vector<Symbol>{phi1, phi0};
            const std::vector<cplx> lam = order == 0 ? std::vector<cplx>{1.0, -1.0} : std::vector<cplx>{-1.0, 1.0};
            for (const auto& pt : (order == 0 ? g0 : g1)) {
                const auto ob = lincomb_obstruction(syms, lam, pt, cfg);
                if (!ob.obstructed) continue;
                v.kind = VerdictKind::NotCompactDifference;
                v.criterion = "compactness forces the coefficients over equal second-order boundary data to sum to 0";
                v.certificate = {{"point", pt},
                                 {"reference", order},
                                 {"J", ob.J},
                                 {"sum", cplx_json(ob.sum)},
                                 {"data_reference", to_json_data(boundary_data(syms[0], pt, 2))},
                                 {"data_other", to_json_data(boundary_data(syms[1], pt, 2))}};
                return v;
            }
        }
    }
    {
        const auto lv = lincomb_verdict({phi0, phi1}, {1.0, -1.0}, cfg);
        if (lv.kind == VerdictKind::NotCompact || lv.kind == VerdictKind::Compact) {
            v.kind = lv.kind == VerdictKind::Compact ? VerdictKind::CompactDifference : VerdictKind::NotCompactDifference;
            v.criterion = lv.criterion;
            v.certificate = {{"lincomb", lv.certificate}};
            return v;
        }
    }

    // Sufficient condition: |phi0 - phi1| = o(min) (and phi0' - phi1' -> 0 when c0 >= 1) on nested sublevels.
    std::vector<BoundaryPoint> anchors = g0;
    anchors.insert(anchors.end(), g1.begin(), g1.end());
    if (!positive) anchors = detail::pair_anchors(phi0, phi1, Q, cfg);
    const auto sigmas = detail::logspace(1e-9, 1.0, 19);
    const auto smp = detail::sample_pair(phi0, phi1, Q, anchors, sigmas);
    std::vector<double> level_ratio(5, 0.0), level_deriv(5, 0.0);
    std::vector<std::size_t> level_count(5, 0);
    for (std::size_t i = 0; i < smp.ratio.size(); ++i)
        for (int j = 1; j <= 5; ++j)
            if (smp.mden[i] <= std::pow(10.0, -j)) {
                const auto k = static_cast<std::size_t>(j - 1);
                level_ratio[k] = std::max(level_ratio[k], smp.ratio[i]);
                level_deriv[k] = std::max(level_deriv[k], smp.dderiv[i]);
                ++level_count[k];
            }
    const bool vacuous = level_count[4] == 0;
    const bool o_ok = vacuous || (level_ratio[4] < cfg.tol.o && (!positive || level_deriv[4] < cfg.tol.o));
    v.certificate = {{"sublevels", {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}},
                     {"ratio_per_level", level_ratio},
                     {"samples_per_level", level_count},
                     {"basis", Q.generators()}};
    if (positive) v.certificate["derivative_difference_per_level"] = level_deriv;

    // Final equivalence criterion, applicable when every Gamma point has contact order 2.
    bool criterion_applicable = positive;
    bool criterion_holds = true;
    if (positive) {
        nlohmann::json contacts = nlohmann::json::array();
        for (const auto* pair : {&g0, &g1}) {
            const Symbol& s = pair == &g0 ? phi0 : phi1;
            for (const auto& pt : *pair) {
                const auto c = contact_order(s, pt, 8, cfg);
                contacts.push_back(c);
                if (!c.order || *c.order != 2) criterion_applicable = false;
            }
        }
        v.certificate["contact"] = contacts;
        if (criterion_applicable) {
            criterion_holds = same_point_sets(g0, g1);
            for (const auto& pt : g0) criterion_holds = criterion_holds && same_boundary_data(phi0, phi1, pt, 2, cfg.tol.eq);
        }
        v.certificate["contact_order_2_everywhere"] = criterion_applicable;
        v.certificate["gamma_and_data_agree"] = criterion_holds;
    }
    if (o_ok && (!criterion_applicable || criterion_holds)) {
        v.kind = VerdictKind::CompactDifference;
        v.criterion = positive ? "|phi0 - phi1| = o(min Re phi_j) and phi0' - phi1' -> 0 give a compact difference"
                               : "|phi0 - phi1| = o(min((Re phi_j - 1/2)/|1 + phi_j|^2)) gives a compact difference";
        v.certificate["vacuous"] = vacuous;
        return v;
    }
    v.kind = VerdictKind::Undecided;
    v.certificate["why"] = o_ok ? "boundary sets or second-order data differ although the little-o test passed"
                                : "little-o ratio does not fall below o_tol at the finest sublevel";
    return v;
}

// ---------------------------------------------------------------------------
// Quadratic boundary forms and the algebra used by the obstruction argument

// Second-order expansion of B psi around a boundary point z0 (rotated to e):
// L(x) = sum B_l log q_l x_l,  Q(x) = 1/2 sum B_l log^2 q_l x_l^2 + sum_{l<=m} C_lm log q_l log q_m x_l x_m.
struct QuadraticBoundaryForms {
    std::vector<cplx> L;                // coefficient of x_l
    std::vector<std::vector<cplx>> Q;  // Q[l][m], l <= m, coefficient of x_l x_m
};

inline QuadraticBoundaryForms quadratic_forms(const Symbol& phi, const BoundaryPoint& point) {
    const auto bd = boundary_data(phi, point, 2);
    const std::size_t d = point.generators.dim();
    QuadraticBoundaryForms f;
    f.L.assign(d, 0.0);
    f.Q.assign(d, std::vector<cplx>(d, 0.0));
    std::vector<double> lq(d);
    for (std::size_t l = 0; l < d; ++l) lq[l] = std::log(static_cast<double>(point.generators[l]));
    auto partial = [&](std::size_t l, std::size_t m) {
        MultiIndex a(d, 0);
        ++a[l];
        if (m < d) ++a[m];
        return bd.partials.at(a);
    };
    for (std::size_t l = 0; l < d; ++l) {
        const cplx B = point.z[l] * partial(l, d);
        f.L[l] = B * lq[l];
        f.Q[l][l] += 0.5 * B * lq[l] * lq[l];
        for (std::size_t m = l; m < d; ++m) {
            const cplx C = (l == m) ? 0.5 * point.z[l] * point.z[l] * partial(l, l) : point.z[l] * point.z[m] * partial(l, m);
            f.Q[l][m] += C * lq[l] * lq[m];
        }
    }
    return f;
}

inline cplx eval_linear_form(const QuadraticBoundaryForms& f, const std::vector<double>& x) {
    cplx s{};
    for (std::size_t l = 0; l < f.L.size(); ++l) s += f.L[l] * x[l];
    return s;
}

inline cplx eval_quadratic_form(const QuadraticBoundaryForms& f, const std::vector<double>& x) {
    cplx s{};
    for (std::size_t l = 0; l < f.Q.size(); ++l)
        for (std::size_t m = l; m < f.Q.size(); ++m) s += f.Q[l][m] * x[l] * x[m];
    return s;
}

inline bool same_linear_form(const QuadraticBoundaryForms& a, const QuadraticBoundaryForms& b, double tol) {
    for (std::size_t l = 0; l < a.L.size(); ++l)
        if (!detail::close(a.L[l], b.L[l], tol)) return false;
    return true;
}

inline bool same_quadratic_form(const QuadraticBoundaryForms& a, const QuadraticBoundaryForms& b, double tol) {
    for (std::size_t l = 0; l < a.Q.size(); ++l)
        for (std::size_t m = l; m < a.Q.size(); ++m)
            if (!detail::close(a.Q[l][m], b.Q[l][m], tol)) return false;
    return true;
}

// A beta in [0,1]^d at which every pair of distinct forms takes distinct values
// (linear forms compared first, quadratic forms when the linear parts agree).
inline std::optional<std::vector<double>> separating_beta(const std::vector<QuadraticBoundaryForms>& forms,
                                                          std::uint64_t seed, int retries = 3, double tol = 1e-9) {
    if (forms.empty()) return std::vector<double>{};
    const std::size_t d = forms[0].L.size();
    detail::Rng rng(seed);
    for (int attempt = 0; attempt <= retries; ++attempt) {
        std::vector<double> beta(d);
        for (double& b : beta) b = rng.uniform();
        bool ok = true;
        for (std::size_t i = 0; i < forms.size() && ok; ++i)
            for (std::size_t j = i + 1; j < forms.size() && ok; ++j) {
                if (!same_linear_form(forms[i], forms[j], tol))
                    ok = !detail::close(eval_linear_form(forms[i], beta), eval_linear_form(forms[j], beta), tol);
                else if (!same_quadratic_form(forms[i], forms[j], tol))
                    ok = !detail::close(eval_quadratic_form(forms[i], beta), eval_quadratic_form(forms[j], beta), tol);
            }
        if (ok) return beta;
    }
    return std::nullopt;
}

// sum_{j,j'} lambda_j conj(lambda_j') / (M alpha + mu_j + conj(mu_j'))^d
inline cplx gram_sum(const std::vector<cplx>& lambda, const std::vector<cplx>& mu, double alpha, int d, double M) {
    cplx s{};
    for (std::size_t j = 0; j < lambda.size(); ++j)
        for (std::size_t k = 0; k < lambda.size(); ++k)
            s += lambda[j] * std::conj(lambda[k]) / std::pow(M * alpha + mu[j] + std::conj(mu[k]), d);
    return s;
}

}  // namespace hcomp
