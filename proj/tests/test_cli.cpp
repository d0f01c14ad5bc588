#include "catch_amalgamated.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hcomp/report.hpp"
#include "cli_runner.hpp"

using namespace hcomp;
using nlohmann::json;
using oracle::run_cli;
using Catch::Approx;

TEST_CASE("analyze report for s + 1 - 2^(-s)", "[cli]") {
    const auto r = report::analyze(parse_symbol("s + 1 - 2^(-s)"), {});
    CHECK(r.at("command") == "analyze");
    CHECK(r.at("gh") == true);
    CHECK(r.at("class").at("kind") == "Linear");
    CHECK(r.at("range").at("restricted") == false);
    CHECK(r.at("compactness").at("verdict") == "NotCompact");
    REQUIRE(r.at("gamma").size() == 1);
    CHECK(r.at("gamma")[0].at("order") == 2);
    CHECK(r.at("gamma")[0].at("point").at("theta") == json::array({0.0}));
    CHECK(r.at("symbol").at("text") == "s + 1 - 2^(-s)");
    CHECK(r.at("config").at("seed") == AnalysisConfig{}.seed);

    const auto c = report::analyze(parse_symbol("3/4 + 1/8*2^(-s)"), {});
    CHECK(c.at("compactness").at("verdict") == "Compact");
    CHECK(c.at("gamma").empty());

    CHECK_THROWS_AS(report::analyze(parse_symbol("1 - 2^(-s)"), {}), MembershipError);
}

TEST_CASE("compare reports", "[cli]") {
    const auto r = report::compare(parse_symbol("s + 1 - 2^(-s)"), parse_symbol("s + 1 - 3^(-s)"), {});
    const auto& lb = r.at("essential_lower_bound");
    CHECK(lb.at("verdict") == "ObstructedComponent");
    CHECK(lb.at("certificate").at("bound").get<double>() == Approx(0.768515523037525).epsilon(1e-12));
    CHECK(r.at("empirical").at("limit_estimate").get<double>() == Approx(1.0 / (1.0 + std::log(2.0))).epsilon(0.05));
    CHECK(r.at("compact_difference").at("verdict") == "NotCompactDifference");

    const auto cube = report::compare(parse_symbol("s + 1 - 2^(-s)"), parse_symbol("s + 1 - 2^(-s) + 0.1*(1 - 2^(-s))^3"), {});
    CHECK(cube.at("compact_difference").at("verdict") == "CompactDifference");
    CHECK(cube.at("essential_lower_bound").at("verdict") != "ObstructedComponent");

    const auto mixed = report::compare(parse_symbol("s + 1"), parse_symbol("1"), {});
    CHECK(mixed.at("characteristics_equal") == false);
    CHECK(mixed.at("characteristic_separation").at("bound") == 0.5);
    CHECK(mixed.at("characteristic_separation").at("zero_characteristic_index") == 1);
}

TEST_CASE("lincomb reports", "[cli]") {
    const auto a = report::lincomb({{1.0, parse_symbol("s + 1 - 2^(-s)")}, {-1.0, parse_symbol("s + 1 - 3^(-s)")}}, {});
    CHECK(a.at("verdict").at("verdict") == "NotCompact");

    const auto b = report::lincomb({{1.0, parse_symbol("3/4 + 1/8*2^(-s)")}, {1.0, parse_symbol("3/4 + 1/8*3^(-s)")}}, {});
    CHECK(b.at("verdict").at("verdict") == "Compact");

    const auto c = report::lincomb(
        {{1.0, parse_symbol("s + 1 - 2^(-s)")}, {-1.0, parse_symbol("s + 1 - 2^(-s) + 0.1*(1 - 2^(-s))^3")}}, {});
    REQUIRE_FALSE(c.at("obstruction_table").empty());
    for (const auto& row : c.at("obstruction_table")) {
        CHECK(row.at("J") == json::array({0, 1}));
        CHECK(std::abs(row.at("lambda_sum")[0].get<double>()) < 1e-12);
        CHECK(row.at("obstructed") == false);
    }
}

TEST_CASE("kernel CSV rows", "[cli]") {
    KernelSequencePlan plan;
    plan.family = KernelFamily::PartialD;
    plan.d = 1;
    plan.path = PathKind::Radial;
    plan.k = {1'000'000, 1'000'000, 1, true};
    const auto rows = report::kernel_rows(plan, nullptr, nullptr);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].scaled_norm_sq == Approx(1.0 / (2.0 * std::log(2.0))).epsilon(1e-5));
    const auto csv = report::kernels_csv(rows);
    CHECK(csv.rfind("k,re_s,norm_sq,scaled_norm_sq,estimator\n1000000,1e-06,", 0) == 0);
    CHECK(csv.back() == '\n');

    plan.k = {10, 1, 5, true};
    CHECK(report::kernels_csv(report::kernel_rows(plan, nullptr, nullptr)) == "k,re_s,norm_sq,scaled_norm_sq,estimator\n");
    CHECK(report::format_sig10(1.0 / 3.0) == "0.3333333333");
}

TEST_CASE("executable exit codes", "[cli]") {
    CHECK(run_cli({"analyze", "s + 1 - 2^(-s)"}).status == 0);
    CHECK(run_cli({"analyze", "s + 1 - 2^(-s) $"}).status == 2);
    CHECK(run_cli({"analyze", "1 - 2^(-s)"}).status == 3);
    CHECK(run_cli({"analyze", "(1 - 2^(-s))^17"}).status == 2);
    CHECK(run_cli({"lincomb", "--term", "1 : s + 1 - 2^(-s)", "--term", "2 : s + 1 - 2^(-s)"}).status == 5);
    CHECK(run_cli({"kernels", "--family", "single_prime", "--q", "2", "--path", "radial", "--k-first", "10", "--k-last",
                   "100", "--k-count", "3", "--phi0", "s + 1 - 2^(-s)", "--phi1", "s + 1 - 3^(-s)"})
              .status == 6);
    CHECK(run_cli({"analyze", "s", "--format", "csv"}).status != 0);
    CHECK(run_cli({"nonsense"}).status != 0);
}

TEST_CASE("executable output matches the report builders", "[cli]") {
    const auto r = run_cli({"analyze", "s + 1 - 2^(-s)"});
    REQUIRE(r.status == 0);
    CHECK(r.out == report::analyze(parse_symbol("s + 1 - 2^(-s)"), {}).dump(2) + "\n");

    const auto k = run_cli({"kernels", "--family", "partial_d", "--d", "1", "--path", "radial", "--k-first", "5",
                            "--k-last", "1", "--k-count", "3", "--format", "csv"});
    CHECK(k.status == 0);
    CHECK(k.out == "k,re_s,norm_sq,scaled_norm_sq,estimator\n");
}

TEST_CASE("--out writes the report to a file", "[cli]") {
    const std::string path = "hcomp_cli_out_test.json";
    const auto r = run_cli({"analyze", "3/4 + 1/8*2^(-s)", "--out", path});
    REQUIRE(r.status == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(json::parse(ss.str()).at("compactness").at("verdict") == "Compact");
    std::remove(path.c_str());
}

TEST_CASE("configuration flags are echoed", "[cli]") {
    const auto r = run_cli({"analyze", "s + 1 - 2^(-s)", "--grid", "128", "--seed", "5", "--gamma-tol", "1e-7"});
    REQUIRE(r.status == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("config").at("grid") == 128);
    CHECK(j.at("config").at("seed") == 5);
    CHECK(j.at("config").at("tolerances").at("gamma_tol") == 1e-7);
}

TEST_CASE("repeated invocations are byte-identical", "[cli][property]") {
    for (const auto& args : oracle::golden_invocations()) {
        const auto a = run_cli(args), b = run_cli(args);
        REQUIRE(a.status == 0);
        CHECK(a.out == b.out);
        CHECK_FALSE(a.out.empty());
    }
}
