#include "slhjb/config.hpp"

#include "slhjb/surface_io.hpp"
#include "slhjb/version.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

using namespace slhjb;

namespace {

std::string temp_path(const char* name) {
    return std::string("/tmp/slhjb_test_") + name;
}

}  // namespace

TEST_CASE("parse_config reads the shipped Table 3 study") {
    StudyConfig cfg = load_config(std::string(SLHJB_CONFIG_DIR) + "/call_table3.cfg");
    CHECK(cfg.model.name == "bergman");
    CHECK(cfg.model.r_l == 0.1);
    CHECK(cfg.model.r_b == 0.15);
    CHECK(cfg.model.sigma == 0.4);
    CHECK(cfg.model.T == 1.0);
    REQUIRE(std::holds_alternative<CallPayoff>(cfg.model.payoff));
    CHECK(std::get<CallPayoff>(cfg.model.payoff).strike == 100.0);
    CHECK(cfg.scheme.gh_order == 4);
    CHECK(cfg.scheme.interp == InterpKind::linear);
    CHECK(cfg.scheme.stepper == StepperKind::euler);
    CHECK(cfg.scheme.n_rule.eval(1) == 32);
    CHECK(cfg.scheme.j_rule.eval(1, 32) == 256);
    CHECK(cfg.scheme.k_min == 1);
    CHECK(cfg.scheme.k_max == 6);
    REQUIRE(cfg.measurement.intervals.size() == 1);
    CHECK(cfg.measurement.intervals[0].lo == 70.0);
    CHECK(cfg.measurement.intervals[0].hi == 90.0);
    CHECK(cfg.measurement.reference == ReferenceKind::exact);
    CHECK(cfg.output == "call_table3.csv");
}

TEST_CASE("parse_config reads the shipped butterfly studies") {
    StudyConfig t4 =
        load_config(std::string(SLHJB_CONFIG_DIR) + "/butterfly_table4.cfg");
    REQUIRE(std::holds_alternative<ButterflyPayoff>(t4.model.payoff));
    CHECK(std::get<ButterflyPayoff>(t4.model.payoff).k1 == 100.0);
    CHECK(std::get<ButterflyPayoff>(t4.model.payoff).k2 == 300.0);
    CHECK(t4.measurement.reference == ReferenceKind::self_difference);
    CHECK(t4.measurement.intervals.size() == 2);
    CHECK(t4.scheme.n_rule.eval(1) == 16);
    CHECK(t4.scheme.j_rule.eval(1, 16) == 32);

    StudyConfig t5 =
        load_config(std::string(SLHJB_CONFIG_DIR) + "/butterfly_table5.cfg");
    CHECK(t5.scheme.interp == InterpKind::pchip);
    CHECK(t5.scheme.j_rule.eval(1, 16) == 32);  // J = 2N
}

TEST_CASE("parse_config defaults and diagnostics") {
    SUBCASE("empty scheme block fills the documented defaults") {
        StudyConfig cfg = parse_config(R"({
            "model": {"name": "bergman", "r_l": 0.1, "r_b": 0.15, "sigma": 0.4,
                      "T": 1.0, "payoff": {"type": "call", "K": 100.0}}
        })");
        CHECK(cfg.scheme.gh_order == 2);
        CHECK(cfg.scheme.interp == InterpKind::linear);
        CHECK(cfg.scheme.stepper == StepperKind::euler);
        CHECK(!cfg.scheme.domain.has_value());
    }

    SUBCASE("gh-order below 2 is a range error naming the field") {
        const std::string text = R"({
            "model": {"name": "bergman", "r_l": 0.1, "r_b": 0.15, "sigma": 0.4,
                      "T": 1.0, "payoff": {"type": "call", "K": 100.0}},
            "scheme": {"gh-order": 1}
        })";
        CHECK_THROWS_AS(parse_config(text), Error);
        try {
            parse_config(text);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::invalid_config);
            CHECK(std::string(e.what()).find("gh-order") != std::string::npos);
        }
    }

    SUBCASE("unknown keys are rejected with their path") {
        const std::string text = R"({
            "model": {"name": "bergman", "r_l": 0.1, "r_b": 0.15, "sigma": 0.4,
                      "T": 1.0, "payoff": {"type": "call", "K": 100.0}},
            "scheme": {"interpolation": "linear"}
        })";
        try {
            parse_config(text);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("scheme.interpolation") !=
                  std::string::npos);
        }
    }

    SUBCASE("malformed JSON reports a parse error") {
        CHECK_THROWS_AS(parse_config("{ not json"), Error);
    }

    SUBCASE("malformed rule formulas are rejected") {
        const std::string text = R"({
            "model": {"name": "bergman", "r_l": 0.1, "r_b": 0.15, "sigma": 0.4,
                      "T": 1.0, "payoff": {"type": "call", "K": 100.0}},
            "scheme": {"N_rule": "2**k"}
        })";
        CHECK_THROWS_AS(parse_config(text), Error);
    }

    SUBCASE("unordered intervals are rejected") {
        const std::string text = R"({
            "model": {"name": "bergman", "r_l": 0.1, "r_b": 0.15, "sigma": 0.4,
                      "T": 1.0, "payoff": {"type": "call", "K": 100.0}},
            "measurement": {"intervals": [[130.0, 170.0], [30.0, 70.0]]}
        })";
        CHECK_THROWS_AS(parse_config(text), Error);
    }
}

TEST_CASE("default_domain matches the documented concrete values") {
    ModelConfig call{"bergman", 0.1, 0.15, 0.4, 1.0, CallPayoff{100.0}};
    auto d = default_domain(call);
    CHECK(d.first == doctest::Approx(0.0));
    CHECK(d.second == doctest::Approx(std::log(1200.0)));

    ModelConfig butt{"bergman", 0.1, 0.15, 0.4, 1.0, ButterflyPayoff{100.0, 300.0}};
    d = default_domain(butt);
    CHECK(d.first == doctest::Approx(0.0));
    CHECK(d.second == doctest::Approx(std::log(1200.0)));
}

TEST_CASE("report CSV layout") {
    ConvergenceReport report;
    report.intervals = {{70.0, 90.0}};

    SUBCASE("empty report is header-only") {
        CHECK(report_csv(report) == "k,N,J,error_1,order_1,cpu_s\n");
    }

    SUBCASE("rows carry scientific errors and '-' for undefined orders") {
        StudyRow r1;
        r1.k = 1;
        r1.N = 32;
        r1.J = 256;
        r1.errors = {1.234e-2};
        r1.orders = {std::nan("")};
        r1.cpu_seconds = 0.125;
        StudyRow r2 = r1;
        r2.k = 2;
        r2.N = 64;
        r2.J = 1024;
        r2.errors = {5.9e-3};
        r2.orders = {1.06};
        report.rows = {r1, r2};
        const std::string csv = report_csv(report);
        CHECK(csv.find("k,N,J,error_1,order_1,cpu_s\n") == 0);
        CHECK(csv.find("1,32,256,1.234000e-02,-,0.12") != std::string::npos);
        CHECK(csv.find("2,64,1024,5.900000e-03,1.06,0.12") != std::string::npos);
    }

    SUBCASE("two intervals produce one error/order pair per interval") {
        report.intervals = {{30.0, 70.0}, {130.0, 170.0}};
        CHECK(report_csv(report) == "k,N,J,error_1,order_1,error_2,order_2,cpu_s\n");
    }
}

TEST_CASE("surface CSV dump") {
    auto p = bergman_problem(0.1, 0.15, 0.4, CallPayoff{100.0}, 1.0);
    Grid grid = Grid::uniform_1d(0.0, 7.0, 16, Extrapolation::payoff_asymptotic);
    TimeMesh mesh(4, 1.0);
    auto surf = backward_solve(p, grid, mesh, hermite_rule(2), InterpKind::linear, {});
    const std::string csv = surface_csv(surf);
    CHECK(csv.find("x,s,V,policy\n") == 0);
    // 17 node rows + header
    int lines = 0;
    for (char c : csv)
        lines += c == '\n';
    CHECK(lines == 18);
}

TEST_CASE("surface save/load round trip is bit-exact") {
    auto p = bergman_problem(0.1, 0.15, 0.4, ButterflyPayoff{100.0, 300.0}, 1.0);
    Grid grid = Grid::uniform_1d(0.0, 7.0, 48, Extrapolation::payoff_asymptotic);
    TimeMesh mesh(8, 1.0);
    SolverOptions opts;
    opts.record_all_values = true;
    opts.record_all_policies = true;
    auto surf = backward_solve(p, grid, mesh, hermite_rule(3), InterpKind::linear, {},
                               opts);

    SurfaceHeader hdr{p.name, p.fingerprint, 3, InterpKind::linear, StepperKind::euler,
                      kToolVersion};
    const std::string path = temp_path("roundtrip.surf");
    save_surface(path, surf, hdr);
    auto loaded = load_surface(path);

    CHECK(loaded.header.model_name == p.name);
    CHECK(loaded.header.fingerprint == p.fingerprint);
    CHECK(loaded.header.gh_order == 3);
    CHECK(loaded.surface.mesh.steps == 8);
    CHECK(loaded.surface.grid.axis(0).intervals == 48);
    CHECK(loaded.surface.grid.extrapolation() == Extrapolation::payoff_asymptotic);

    for (int n = 0; n <= 8; ++n) {
        REQUIRE(loaded.surface.has_values(n));
        REQUIRE(loaded.surface.values[n].size() == surf.values[n].size());
        CHECK(std::memcmp(loaded.surface.values[n].data(), surf.values[n].data(),
                          surf.values[n].size() * sizeof(double)) == 0);
    }
    for (int n = 0; n < 8; ++n) {
        REQUIRE(loaded.surface.has_policy(n));
        CHECK(loaded.surface.policy[n] == surf.policy[n]);
    }
    REQUIRE(loaded.surface.slice_lipschitz.size() == surf.slice_lipschitz.size());
    CHECK(std::memcmp(loaded.surface.slice_lipschitz.data(),
                      surf.slice_lipschitz.data(),
                      surf.slice_lipschitz.size() * sizeof(double)) == 0);
    std::remove(path.c_str());
}

TEST_CASE("load_surface rejects foreign files") {
    const std::string path = temp_path("bogus.surf");
    {
        std::ofstream out(path);
        out << "something else\n";
    }
    CHECK_THROWS_AS(load_surface(path), Error);
    CHECK_THROWS_AS(load_surface("/nonexistent/nowhere.surf"), Error);
    std::remove(path.c_str());
}
