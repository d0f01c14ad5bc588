// hcomp: command-line front end for the composition-operator analyses.
//
// Exit codes: 0 ok, 1 other error, 2 symbol parse error, 3 symbol not in the class,
// 4 guard violation, 5 duplicate symbols, 6 unsupported kernel pairing.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hcomp/analysis.hpp"
#include "hcomp/dsl.hpp"
#include "hcomp/kernels.hpp"
#include "hcomp/report.hpp"

namespace {

using namespace hcomp;

struct Common {
    AnalysisConfig cfg;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--grid", c.cfg.resolution, "torus grid resolution per axis (0 = default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", c.cfg.seed, "seed for sampled directions");
    sub->add_option("--membership-tol", c.cfg.tol.membership);
    sub->add_option("--refine-tol", c.cfg.tol.refine);
    sub->add_option("--gamma-tol", c.cfg.tol.gamma);
    sub->add_option("--eq-tol", c.cfg.tol.eq);
    sub->add_option("--o-tol", c.cfg.tol.o);
    sub->add_option("--nt-tol", c.cfg.tol.nt);
    sub->add_option("--out", c.out, "write the report here instead of stdout");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw Error("cannot open " + c.out + " for writing");
    f << text;
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void require_json(const Common& c) {
    if (c.format != "json") throw Error("csv output is only available for the kernels command");
}

// "lambda : symbol", lambda a constant expression of the symbol grammar (e.g. "-1", "(1 + 2*i)", "1/3").
report::LincombTerm parse_term(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'lambda : symbol'", 1, 1);
    const Symbol lam = parse_symbol(text.substr(0, colon));
    if (lam.c0 != 0 || !is_constant(lam)) throw ParseError("coefficient must be a constant", 1, 1);
    return {lam.c1(), parse_symbol(text.substr(colon + 1))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analyze composition operators with Dirichlet-polynomial symbols"};
    app.require_subcommand(1);

    Common analyze_opts, compare_opts, lincomb_opts, kernel_opts;

    std::string analyze_text;
    auto* analyze = app.add_subcommand("analyze", "class membership, range, compactness and boundary contact of one symbol");
    analyze->add_option("symbol", analyze_text, "symbol expression, e.g. \"s + 1 - 2^(-s)\"")->required();
    add_common(analyze, analyze_opts);

    std::string cmp0, cmp1;
    auto* compare = app.add_subcommand("compare", "component and compact-difference analysis of a pair");
    compare->add_option("phi0", cmp0)->required();
    compare->add_option("phi1", cmp1)->required();
    add_common(compare, compare_opts);

    std::vector<std::string> term_texts;
    auto* lincomb = app.add_subcommand("lincomb", "compactness of a linear combination of composition operators");
    lincomb->add_option("--term", term_texts, "\"lambda : symbol\", repeatable")->required();
    add_common(lincomb, lincomb_opts);

    std::string family = "partial_d", path = "radial";
    int kd = 1;
    std::vector<u64> kprimes;
    u64 kq = 2;
    double M = 1.0;
    KRange kr{1, 1000, 20, true};
    bool linear_k = false;
    std::string pair0, pair1;
    auto* kernels = app.add_subcommand("kernels", "normalized reproducing-kernel sequences and the essential-norm estimator");
    kernels->add_option("--family", family)->check(CLI::IsMember({"partial_d", "partial_q", "single_prime"}));
    kernels->add_option("--d", kd, "number of leading primes (partial_d)")->check(CLI::PositiveNumber);
    kernels->add_option("--primes", kprimes, "prime set (partial_q)")->delimiter(',');
    kernels->add_option("--q", kq, "prime (single_prime)");
    kernels->add_option("--path", path)->check(CLI::IsMember({"radial", "slanted", "sqrt_slanted", "prime_power"}));
    kernels->add_option("--M", M, "path parameter");
    kernels->add_option("--k-first", kr.first);
    kernels->add_option("--k-last", kr.last);
    kernels->add_option("--k-count", kr.count);
    kernels->add_flag("--linear", linear_k, "linearly spaced k instead of log spaced");
    kernels->add_option("--phi0", pair0, "first symbol of the pair for the estimator column");
    kernels->add_option("--phi1", pair1, "second symbol of the pair");
    add_common(kernels, kernel_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*analyze) {
            require_json(analyze_opts);
            emit(analyze_opts, json_text(report::analyze(parse_symbol(analyze_text), analyze_opts.cfg)));
        } else if (*compare) {
            require_json(compare_opts);
            emit(compare_opts, json_text(report::compare(parse_symbol(cmp0), parse_symbol(cmp1), compare_opts.cfg)));
        } else if (*lincomb) {
            require_json(lincomb_opts);
            std::vector<report::LincombTerm> terms;
            for (const auto& t : term_texts) terms.push_back(parse_term(t));
            emit(lincomb_opts, json_text(report::lincomb(terms, lincomb_opts.cfg)));
        } else if (*kernels) {
            KernelSequencePlan plan;
            plan.family = family == "partial_d" ? KernelFamily::PartialD
                          : family == "partial_q" ? KernelFamily::PartialQ
                                                  : KernelFamily::SinglePrime;
            plan.d = kd;
            plan.primes = kprimes;
            plan.q = kq;
            plan.path = path == "radial"        ? PathKind::Radial
                        : path == "slanted"     ? PathKind::Slanted
                        : path == "sqrt_slanted" ? PathKind::SqrtSlanted
                                                 : PathKind::PrimePower;
            plan.M = M;
            kr.log_spaced = !linear_k;
            plan.k = kr;
            if (pair0.empty() != pair1.empty()) throw Error("--phi0 and --phi1 must be given together");
            std::optional<Symbol> s0, s1;
            if (!pair0.empty()) {
                s0 = parse_symbol(pair0);
                s1 = parse_symbol(pair1);
                require_membership(*s0, kernel_opts.cfg);
                require_membership(*s1, kernel_opts.cfg);
            }
            const auto rows = report::kernel_rows(plan, s0 ? &*s0 : nullptr, s1 ? &*s1 : nullptr);
            emit(kernel_opts, kernel_opts.format == "csv" ? report::kernels_csv(rows)
                                                          : json_text(report::kernels_json(plan, rows)));
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const MembershipError& e) {
        std::cerr << "not in the class: " << e.what() << " (infimum " << e.infimum() << ")\n";
        return 3;
    } catch (const GuardError& e) {
        std::cerr << "guard violation: " << e.what() << "\n";
        return 4;
    } catch (const DuplicateError& e) {
        std::cerr << "duplicate symbols: " << e.what() << "\n";
        return 5;
    } catch (const UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
