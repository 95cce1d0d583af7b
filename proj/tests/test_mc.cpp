#include "slhjb/mc.hpp"

#include "slhjb/analytics.hpp"
#include "slhjb/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace slhjb;

namespace {

ControlProblem drift_only(double mu) {
    ControlProblem p;
    p.horizon = 1.0;
    p.controls = {{0.0}};
    p.drift = [mu](double, std::span<const double>, std::span<const double>,
                   std::span<double> out) { out[0] = mu; };
    p.diffusion = [](double, std::span<const double>, std::span<const double>,
                     std::span<double> out) { out[0] = 0.0; };
    p.terminal_payoff = [](std::span<const double> x) { return x[0]; };
    p.x_independent_coeffs = true;
    return p;
}

}  // namespace

TEST_CASE("normal_inv_cdf sanity") {
    CHECK(normal_inv_cdf(0.5) == 0.0);
    CHECK(std::abs(normal_inv_cdf(0.975) - 1.959963984540054) < 1e-12);
    CHECK(std::abs(normal_inv_cdf(0.0013498980316300946) + 3.0) < 1e-10);
    // inverse of the forward CDF round-trips
    for (double z : {-3.5, -1.0, -0.1, 0.0, 0.7, 2.5})
        CHECK(std::abs(normal_inv_cdf(norm_cdf(z)) - z) < 1e-9);
}

TEST_CASE("simulate_em deterministic drift: all paths end at x0 + mu T") {
    auto p = drift_only(1.0);
    SimConfig cfg;
    cfg.n_paths = 64;
    cfg.steps = 16;
    double x0 = 0.0;
    auto samples = simulate_em(p, FixedControl{{{0.0}}}, {&x0, 1}, cfg);
    for (double s : samples.states)
        CHECK(s == 1.0);  // 16 exact additions of h = 1/16
}

TEST_CASE("simulate_em GBM log-state moments match within 4 standard errors") {
    // constant mu, sigma in log coordinates: Euler is exact, X_T Gaussian
    ControlProblem p;
    p.horizon = 1.0;
    p.controls = {{0.0}};
    const double mu = 0.05, sigma = 0.4, x0 = std::log(100.0);
    p.drift = [mu](double, std::span<const double>, std::span<const double>,
                   std::span<double> out) { out[0] = mu; };
    p.diffusion = [sigma](double, std::span<const double>, std::span<const double>,
                          std::span<double> out) { out[0] = sigma; };
    p.terminal_payoff = [](std::span<const double> x) { return x[0]; };

    SimConfig cfg;
    cfg.n_paths = 200000;
    cfg.seed = 71;
    cfg.steps = 8;
    auto samples = simulate_em(p, FixedControl{{{0.0}}}, {&x0, 1}, cfg);

    double mean = pairwise_sum(samples.states) / cfg.n_paths;
    std::vector<double> sq(samples.states.size());
    for (std::size_t i = 0; i < sq.size(); ++i)
        sq[i] = (samples.states[i] - mean) * (samples.states[i] - mean);
    double var = pairwise_sum(sq) / (cfg.n_paths - 1);

    const double se_mean = sigma / std::sqrt(static_cast<double>(cfg.n_paths));
    CHECK(std::abs(mean - (x0 + mu)) < 4.0 * se_mean);
    const double se_var =
        sigma * sigma * std::sqrt(2.0 / static_cast<double>(cfg.n_paths - 1));
    CHECK(std::abs(var - sigma * sigma) < 4.0 * se_var);
}

TEST_CASE("mc_value") {
    SUBCASE("constant payoff with constant rate discounts exactly") {
        auto p = bergman_problem(0.1, 0.15, 0.4, CallPayoff{100.0}, 1.0);
        p.terminal_payoff = [](std::span<const double>) { return 5.0; };
        SimConfig cfg;
        cfg.n_paths = 500;
        cfg.steps = 16;
        double x0 = std::log(100.0);
        // fixed control q = r_l on every step
        auto est = mc_value(p, FixedControl{{{0.1}}}, {&x0, 1}, cfg);
        const double h = 1.0 / 16.0;
        double disc = 1.0;
        for (int i = 0; i < 16; ++i)
            disc *= std::exp(-0.1 * h);
        CHECK(est.value == doctest::Approx(5.0 * disc).epsilon(1e-14));
        CHECK(est.std_error == doctest::Approx(0.0));
    }

    SUBCASE("same seed gives bit-identical estimates; seeds differ within 6 SE") {
        auto p = bergman_problem(0.1, 0.15, 0.4, CallPayoff{100.0}, 1.0);
        SimConfig cfg;
        cfg.n_paths = 20000;
        cfg.seed = 2024;
        cfg.steps = 16;
        double x0 = std::log(100.0);
        auto a = mc_value(p, FixedControl{{{0.15}}}, {&x0, 1}, cfg);
        auto b = mc_value(p, FixedControl{{{0.15}}}, {&x0, 1}, cfg);
        CHECK(a.value == b.value);
        CHECK(a.std_error == b.std_error);

        cfg.seed = 77;
        auto c = mc_value(p, FixedControl{{{0.15}}}, {&x0, 1}, cfg);
        CHECK(std::abs(a.value - c.value) < 6.0 * std::max(a.std_error, c.std_error));
    }

    SUBCASE("Bergman call under q = r_b matches Black-Scholes within 3 SE") {
        auto p = bergman_problem(0.1, 0.15, 0.4, CallPayoff{100.0}, 1.0);
        SimConfig cfg;
        cfg.n_paths = 200000;
        cfg.seed = 3;
        cfg.steps = 32;
        double x0 = std::log(100.0);
        auto est = mc_value(p, FixedControl{{{0.15}}}, {&x0, 1}, cfg);
        const double ref = bs_call(100.0, 100.0, 0.15, 0.4, 1.0);
        CHECK(std::abs(est.value - ref) < 3.0 * est.std_error);
    }

    SUBCASE("antithetic variates at least halve the variance of the call") {
        auto p = bergman_problem(0.1, 0.15, 0.4, CallPayoff{100.0}, 1.0);
        SimConfig plain;
        plain.n_paths = 40000;
        plain.seed = 5;
        plain.steps = 16;
        SimConfig anti = plain;
        anti.antithetic = true;
        double x0 = std::log(100.0);
        auto e1 = mc_value(p, FixedControl{{{0.15}}}, {&x0, 1}, plain);
        auto e2 = mc_value(p, FixedControl{{{0.15}}}, {&x0, 1}, anti);
        // monotone payoff: pair averages have nonpositive covariance, so the
        // per-sample variance drops by at least half
        const double var_plain = e1.std_error * e1.std_error * e1.n_samples;
        const double var_pair = e2.std_error * e2.std_error * e2.n_samples;
        CHECK(var_pair < 0.5 * var_plain * 1.05);
    }

    SUBCASE("antithetic with odd path count is rejected") {
        auto p = drift_only(0.0);
        SimConfig cfg;
        cfg.n_paths = 7;
        cfg.antithetic = true;
        double x0 = 0.0;
        CHECK_THROWS_AS(
            mc_value(p, FixedControl{{{0.0}}}, std::span<const double>(&x0, 1), cfg),
            Error);
    }
}

TEST_CASE("feedback policies") {
    auto p = bergman_problem(0.1, 0.15, 0.4, ButterflyPayoff{100.0, 300.0}, 1.0);
    Grid grid = Grid::uniform_1d(0.0, 7.1, 1024, Extrapolation::payoff_asymptotic);
    TimeMesh mesh(64, 1.0);
    SolverOptions opts;
    opts.record_all_policies = true;
    auto surf =
        backward_solve(p, grid, mesh, hermite_rule(4), InterpKind::linear, {}, opts);

    SUBCASE("policy-driven value is a lower bound on V(0, x0)") {
        SimConfig cfg;
        cfg.n_paths = 100000;
        cfg.seed = 11;
        cfg.steps = 64;
        double x0 = std::log(100.0);
        auto est = mc_value(p, FeedbackPolicy{&surf}, {&x0, 1}, cfg);
        std::span<const double> xs(&x0, 1);
        const double v0 = interp_multilinear(grid, surf.values[0], xs);
        // any fixed admissible policy underestimates; allow discretization slack
        CHECK(est.value <= v0 + 3.0 * est.std_error + 0.05);
        // and the argmax policy should not be far below
        CHECK(est.value >= v0 - 3.0 * est.std_error - 0.25);
    }

    SUBCASE("mesh mismatch is rejected") {
        SimConfig cfg;
        cfg.n_paths = 10;
        cfg.steps = 32;  // surface carries 64
        double x0 = std::log(100.0);
        CHECK_THROWS_AS(
            simulate_em(p, FeedbackPolicy{&surf}, std::span<const double>(&x0, 1), cfg),
            Error);
    }

    SUBCASE("missing policy slices are rejected") {
        auto bare =
            backward_solve(p, grid, mesh, hermite_rule(2), InterpKind::linear, {});
        SimConfig cfg;
        cfg.n_paths = 10;
        cfg.steps = 64;
        double x0 = std::log(100.0);
        CHECK_THROWS_AS(
            simulate_em(p, FeedbackPolicy{&bare}, std::span<const double>(&x0, 1), cfg),
            Error);
    }
}

TEST_CASE("strong_rate_estimate") {
    const std::vector<double> h_list = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128,
                                        1.0 / 256};

    SUBCASE("GBM strong rate is about one half") {
        const double slope =
            strong_rate_estimate(0.15, 0.4, 100.0, 1.0, h_list, 20000, 9);
        CHECK(slope > 0.45);
        CHECK(slope < 0.60);
    }

    SUBCASE("sigma = 0 gives the deterministic first-order rate") {
        const double slope = strong_rate_estimate(0.15, 0.0, 100.0, 1.0, h_list, 64, 9);
        CHECK(slope > 0.9);
        CHECK(slope < 1.1);
    }

    SUBCASE("doubling the path count keeps the slope in band") {
        const double s1 = strong_rate_estimate(0.15, 0.4, 100.0, 1.0, h_list, 10000, 13);
        const double s2 = strong_rate_estimate(0.15, 0.4, 100.0, 1.0, h_list, 20000, 13);
        CHECK(std::abs(s1 - s2) < 0.08);
    }

    SUBCASE("fewer than 3 step sizes is insufficient data") {
        const std::vector<double> two = {0.1, 0.05};
        CHECK_THROWS_AS(strong_rate_estimate(0.15, 0.4, 100.0, 1.0, two, 100, 1), Error);
        try {
            strong_rate_estimate(0.15, 0.4, 100.0, 1.0, two, 100, 1);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::insufficient_data);
        }
    }
}
