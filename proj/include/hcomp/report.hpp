#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcomp/analysis.hpp"
#include "hcomp/dsl.hpp"
#include "hcomp/kernels.hpp"
#include "hcomp/symbols.hpp"

// JSON report builders shared by the command-line tool and the tests.
namespace hcomp::report {

using nlohmann::json;

inline json symbol_entry(const Symbol& phi) { return {{"text", format_symbol(phi)}, {"json", phi}}; }

inline json class_entry(const Symbol& phi) {
    const auto cls = classify(phi);
    json j = {{"kind", to_string(cls.kind)}, {"degree", cls.degree}, {"generators", cls.generators}};
    json coeffs = json::array();
    for (cplx c : cls.coefficients) coeffs.push_back(cplx_json(c));
    j["coefficients"] = coeffs;
    return j;
}

// Throws MembershipError when phi is not in the class.
inline json analyze(const Symbol& phi, const AnalysisConfig& cfg) {
    const auto m = gh_membership(phi, cfg);
    if (!m.member) throw MembershipError("symbol is not in the Gordon-Hedenmalm class: " + m.reason, m.range.infimum);
    json r = {{"command", "analyze"},
              {"symbol", symbol_entry(phi)},
              {"class", class_entry(phi)},
              {"gh", m.member},
              {"membership_reason", m.reason},
              {"range", m.range},
              {"compactness", compactness_verdict(phi, cfg)},
              {"config", cfg}};
    json gamma = json::array();
    if (!is_constant(phi)) {
        const auto Q = prime_basis(phi);
        for (const auto& pt : gamma_set(phi, Q, cfg.resolution, cfg.tol.gamma, cfg.tol.refine))
            gamma.push_back(contact_order(phi, pt, 8, cfg));
    }
    r["gamma"] = gamma;
    return r;
}

inline json empirical_entry(const EmpiricalTable& t, const KernelSequencePlan& plan) {
    json rows = json::array();
    for (const auto& row : t.rows)
        rows.push_back({{"k", row.k}, {"re_s", row.re_s}, {"norm_sq", row.source_norm_sq}, {"estimator", row.value}});
    return {{"path", to_string(plan.path)},
            {"rows", rows},
            {"limit_estimate", t.limit_estimate},
            {"tail_count", t.tail_count}};
}

inline json compare(const Symbol& phi0, const Symbol& phi1, const AnalysisConfig& cfg) {
    require_membership(phi0, cfg);
    require_membership(phi1, cfg);
    json r = {{"command", "compare"},
              {"symbols", json::array({symbol_entry(phi0), symbol_entry(phi1)})},
              {"characteristics_equal", phi0.c0 == phi1.c0},
              {"config", cfg},
              {"essential_lower_bound", nullptr},
              {"same_component", nullptr},
              {"compact_difference", nullptr},
              {"empirical", nullptr},
              {"characteristic_separation", nullptr}};
    if (phi0.c0 != phi1.c0) {
        json note = {{"note", "different characteristics: the operators lie in different components"}};
        const Symbol* zero = phi0.c0 == 0 ? &phi0 : (phi1.c0 == 0 ? &phi1 : nullptr);
        const Symbol* pos = zero == &phi0 ? &phi1 : &phi0;
        if (zero) {
            note["bound"] = characteristic_separation(*zero, *pos, 2);
            note["p"] = 2;
            note["zero_characteristic_index"] = zero == &phi0 ? 0 : 1;
        }
        r["characteristic_separation"] = note;
        return r;
    }
    const auto lb = scan_essential_lower_bound(phi0, phi1, cfg);
    r["essential_lower_bound"] = lb;
    r["same_component"] = same_component_check(phi0, phi1, cfg);
    r["compact_difference"] = compact_difference_check(phi0, phi1, cfg);

    if (lb.kind == VerdictKind::ObstructedComponent) {
        const auto Q = lb.certificate.at("Q").get<std::vector<u64>>();
        const double alpha = lb.certificate.at("alpha").get<double>();
        const bool swapped = lb.certificate.at("swapped").get<bool>();
        if (alpha != 0.0) {
            r["empirical"] = {{"skipped", "kernel paths approach s = 0 only"}};
        } else {
            KernelSequencePlan plan;
            if (phi0.c0 >= 1) {
                plan.family = KernelFamily::PartialQ;
                plan.primes = Q;
                plan.k = {10, 1'000'000, 41, true};
            } else {
                plan.family = KernelFamily::SinglePrime;
                plan.q = Q.front();
                plan.k = {10, 100'000, 41, true};
            }
            plan.path = PathKind::Radial;
            try {
                const auto t = swapped ? empirical_essential_norm(phi1, phi0, plan) : empirical_essential_norm(phi0, phi1, plan);
                r["empirical"] = empirical_entry(t, plan);
                if (lb.bound) r["empirical"]["bound_squared"] = *lb.bound * *lb.bound;
            } catch (const UnsupportedError& e) {
                r["empirical"] = {{"skipped", e.what()}};
            }
        }
    }
    return r;
}

struct LincombTerm {
    cplx lambda;
    Symbol symbol;
};

inline json lincomb(const std::vector<LincombTerm>& terms, const AnalysisConfig& cfg) {
    std::vector<Symbol> syms;
    std::vector<cplx> lam;
    for (const auto& t : terms) {
        syms.push_back(t.symbol);
        lam.push_back(t.lambda);
    }
    const auto v = lincomb_verdict(syms, lam, cfg);
    json jt = json::array();
    for (const auto& t : terms) jt.push_back({{"lambda", cplx_json(t.lambda)}, {"symbol", symbol_entry(t.symbol)}});

    // Obstruction table: every Gamma point of every positive-characteristic symbol, that symbol as reference.
    std::vector<const Symbol*> ptrs;
    for (const auto& s : syms) ptrs.push_back(&s);
    const auto Q = prime_basis(ptrs);
    json table = json::array();
    for (std::size_t j = 0; j < syms.size(); ++j) {
        if (syms[j].c0 == 0 || Q.dim() > kMaxTorusDim) continue;
        std::vector<Symbol> order{syms[j]};
        std::vector<cplx> lorder{lam[j]};
        std::vector<std::size_t> index{j};
        for (std::size_t k = 0; k < syms.size(); ++k)
            if (k != j) {
                order.push_back(syms[k]);
                lorder.push_back(lam[k]);
                index.push_back(k);
            }
        for (const auto& pt : gamma_set(syms[j], Q, cfg.resolution, cfg.tol.gamma, cfg.tol.refine)) {
            const auto ob = lincomb_obstruction(order, lorder, pt, cfg);
            std::vector<std::size_t> members;
            for (std::size_t k : ob.J) members.push_back(index[k]);
            std::sort(members.begin(), members.end());
            table.push_back({{"reference", j},
                             {"point", pt},
                             {"J", members},
                             {"lambda_sum", cplx_json(ob.sum)},
                             {"obstructed", ob.obstructed}});
        }
    }
    return {{"command", "lincomb"}, {"terms", jt}, {"verdict", v}, {"obstruction_table", table}, {"config", cfg}};
}

struct KernelRow {
    u64 k;
    double re_s, norm_sq, scaled_norm_sq;
    std::optional<double> estimator;
};

inline std::vector<KernelRow> kernel_rows(const KernelSequencePlan& plan, const Symbol* phi0, const Symbol* phi1) {
    std::vector<KernelRow> rows;
    const int d = plan_dimension(plan);
    for (const auto& s : kernel_sequence(plan)) {
        const cplx w = std::visit([](const auto& k) { return k.w; }, s.spec);
        KernelRow row{s.k, w.real(), s.norm_sq, s.norm_sq * std::pow(w.real(), d), std::nullopt};
        if (phi0 && phi1) row.estimator = estimator_value(*phi0, *phi1, s.spec, s.norm_sq);
        rows.push_back(row);
    }
    return rows;
}

inline std::string format_sig10(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline std::string kernels_csv(const std::vector<KernelRow>& rows) {
    std::string out = "k,re_s,norm_sq,scaled_norm_sq,estimator\n";
    for (const auto& r : rows) {
        out += std::to_string(r.k) + "," + format_sig10(r.re_s) + "," + format_sig10(r.norm_sq) + "," +
               format_sig10(r.scaled_norm_sq) + "," + (r.estimator ? format_sig10(*r.estimator) : "") + "\n";
    }
    return out;
}

inline json kernels_json(const KernelSequencePlan& plan, const std::vector<KernelRow>& rows) {
    json jr = json::array();
    for (const auto& r : rows) {
        jr.push_back({{"k", r.k},
                      {"re_s", r.re_s},
                      {"norm_sq", r.norm_sq},
                      {"scaled_norm_sq", r.scaled_norm_sq},
                      {"estimator", r.estimator ? json(*r.estimator) : json(nullptr)}});
    }
    return {{"command", "kernels"},
            {"path", to_string(plan.path)},
            {"dimension", plan_dimension(plan)},
            {"M", plan.M},
            {"rows", jr}};
}

}  // namespace hcomp::report
