#include "slhjb/quadrature.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <set>

using namespace slhjb;

namespace {

/// Independent oracle: Golub-Welsch nodes/weights for the standard normal
/// from the Jacobi matrix of the probabilists' Hermite polynomials
/// (off-diagonal sqrt(j)). Kept free of the Newton-iteration path it checks.
struct GwRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GwRule golub_welsch(int m) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
    for (int j = 1; j < m; ++j) {
        jacobi(j, j - 1) = std::sqrt(static_cast<double>(j));
        jacobi(j - 1, j) = jacobi(j, j - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    GwRule out;
    for (int i = 0; i < m; ++i) {
        out.nodes.push_back(es.eigenvalues()(i));
        const double q0 = es.eigenvectors()(0, i);
        out.weights.push_back(q0 * q0);
    }
    return out;
}

}  // namespace

TEST_CASE("hermite_rule reproduces the tabulated rules for M in {2,3,4}") {
    const double s6 = std::sqrt(6.0);

    auto r2 = hermite_rule(2);
    REQUIRE(r2.size() == 2);
    CHECK(std::abs(r2.node1d(0) + 1.0) < 1e-12);
    CHECK(std::abs(r2.node1d(1) - 1.0) < 1e-12);
    CHECK(std::abs(r2.weight(0) - 0.5) < 1e-12);
    CHECK(std::abs(r2.weight(1) - 0.5) < 1e-12);

    auto r3 = hermite_rule(3);
    REQUIRE(r3.size() == 3);
    CHECK(std::abs(r3.node1d(0) + std::sqrt(3.0)) < 1e-12);
    CHECK(r3.node1d(1) == 0.0);
    CHECK(std::abs(r3.node1d(2) - std::sqrt(3.0)) < 1e-12);
    CHECK(std::abs(r3.weight(0) - 1.0 / 6.0) < 1e-12);
    CHECK(std::abs(r3.weight(1) - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(r3.weight(2) - 1.0 / 6.0) < 1e-12);

    auto r4 = hermite_rule(4);
    REQUIRE(r4.size() == 4);
    CHECK(std::abs(r4.node1d(0) + std::sqrt(3.0 + s6)) < 1e-12);
    CHECK(std::abs(r4.node1d(1) + std::sqrt(3.0 - s6)) < 1e-12);
    CHECK(std::abs(r4.node1d(2) - std::sqrt(3.0 - s6)) < 1e-12);
    CHECK(std::abs(r4.node1d(3) - std::sqrt(3.0 + s6)) < 1e-12);
    CHECK(std::abs(r4.weight(0) - (3.0 - s6) / 12.0) < 1e-12);
    CHECK(std::abs(r4.weight(1) - (3.0 + s6) / 12.0) < 1e-12);
    CHECK(std::abs(r4.weight(2) - (3.0 + s6) / 12.0) < 1e-12);
    CHECK(std::abs(r4.weight(3) - (3.0 - s6) / 12.0) < 1e-12);
}

TEST_CASE("hermite_rule M=5 matches the Golub-Welsch oracle and closed forms") {
    auto rule = hermite_rule(5);
    auto gw = golub_welsch(5);
    REQUIRE(rule.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(rule.node1d(i) - gw.nodes[i]) < 1e-12);
        CHECK(std::abs(rule.weight(i) - gw.weights[i]) < 1e-12);
    }
    // roots of the probabilists' He_5: 0, +-sqrt(5 -+ sqrt(10))
    const double s10 = std::sqrt(10.0);
    CHECK(std::abs(rule.node1d(1) + std::sqrt(5.0 - s10)) < 1e-12);
    CHECK(std::abs(rule.node1d(3) - std::sqrt(5.0 - s10)) < 1e-12);
    CHECK(std::abs(rule.node1d(4) - std::sqrt(5.0 + s10)) < 1e-12);
    CHECK(std::abs(rule.weight(2) - 8.0 / 15.0) < 1e-12);
}

TEST_CASE("hermite_rule agrees with Golub-Welsch up to the order cap") {
    for (int m : {6, 9, 16, 33, 64}) {
        auto rule = hermite_rule(m);
        auto gw = golub_welsch(m);
        double worst_node = 0.0;
        double worst_weight = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            worst_node = std::max(worst_node, std::abs(rule.node1d(i) - gw.nodes[i]));
            worst_weight =
                std::max(worst_weight, std::abs(rule.weight(i) - gw.weights[i]));
        }
        CAPTURE(m);
        CHECK(worst_node < 1e-11);
        CHECK(worst_weight < 1e-12);
    }
}

TEST_CASE("rule invariants: normalization, symmetry, distinct sorted nodes") {
    for (int m = 2; m <= 8; ++m) {
        auto rule = hermite_rule(m);
        CAPTURE(m);

        double sum = 0.0;
        double mean = 0.0;
        double var = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            sum += rule.weight(i);
            mean += rule.weight(i) * rule.node1d(i);
            var += rule.weight(i) * rule.node1d(i) * rule.node1d(i);
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(var - 1.0) < 1e-12);

        std::set<double> distinct;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            distinct.insert(rule.node1d(i));
            if (i > 0)
                CHECK(rule.node1d(i) > rule.node1d(i - 1));
            // exact mirror symmetry with equal weights
            CHECK(rule.node1d(i) == -rule.node1d(rule.size() - 1 - i));
            CHECK(rule.weight(i) == rule.weight(rule.size() - 1 - i));
        }
        CHECK(distinct.size() == rule.size());
    }
}

TEST_CASE("polynomial exactness up to degree 2M-1 for M in 2..8") {
    for (int m = 2; m <= 8; ++m) {
        auto rule = hermite_rule(m);
        CAPTURE(m);
        CHECK(moment_mismatch(rule, 2 * m - 1) < 1e-10);
    }
}

TEST_CASE("hermite_rule rejects out-of-range orders") {
    CHECK_THROWS_AS(hermite_rule(1), Error);
    CHECK_THROWS_AS(hermite_rule(0), Error);
    CHECK_THROWS_AS(hermite_rule(65), Error);
    try {
        hermite_rule(1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_order);
    }
}

TEST_CASE("gaussian_moment double factorials") {
    CHECK(gaussian_moment(0) == 1.0);
    CHECK(gaussian_moment(1) == 0.0);
    CHECK(gaussian_moment(2) == 1.0);
    CHECK(gaussian_moment(4) == 3.0);
    CHECK(gaussian_moment(6) == 15.0);
    const int b42[] = {4, 2};
    CHECK(gaussian_moment(std::span<const int>(b42)) == 3.0);
    const int b30[] = {3, 0};
    CHECK(gaussian_moment(std::span<const int>(b30)) == 0.0);
}

TEST_CASE("tensor_rule products") {
    auto base = hermite_rule(2);

    SUBCASE("p = 1 is the base rule") {
        auto t = tensor_rule(base, 1);
        REQUIRE(t.size() == 2);
        CHECK(t.node1d(0) == base.node1d(0));
        CHECK(t.weight(1) == base.weight(1));
    }

    SUBCASE("M=2, p=2 gives the four corner nodes with weight 1/4") {
        auto t = tensor_rule(base, 2);
        REQUIRE(t.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(std::abs(std::abs(t.node(i)[0]) - 1.0) < 1e-13);
            CHECK(std::abs(std::abs(t.node(i)[1]) - 1.0) < 1e-13);
            CHECK(std::abs(t.weight(i) - 0.25) < 1e-13);
        }
    }

    SUBCASE("M=3, p=3 has 27 nodes and exact moments") {
        auto t = tensor_rule(hermite_rule(3), 3);
        CHECK(t.size() == 27);
        CHECK(moment_mismatch(t, 5) < 1e-10);
    }

    SUBCASE("moment exactness in dim <= 3") {
        for (int m : {2, 3, 4}) {
            for (int p : {2, 3}) {
                auto t = tensor_rule(hermite_rule(m), p);
                CAPTURE(m);
                CAPTURE(p);
                CHECK(moment_mismatch(t, 2 * m - 1) < 1e-10);
            }
        }
    }

    SUBCASE("node cap") {
        CHECK_THROWS_AS(tensor_rule(hermite_rule(4), 10), Error);  // 4^10 > 1e6
        try {
            tensor_rule(hermite_rule(4), 10);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::capacity);
        }
        CHECK_NOTHROW(tensor_rule(hermite_rule(4), 10, 2000000));
    }
}

TEST_CASE("caratheodory_reduce") {
    SUBCASE("1-D Gauss-Hermite input is already minimal") {
        for (int m : {2, 3, 5}) {
            auto rule = hermite_rule(m);
            auto red = caratheodory_reduce(rule, m);
            CAPTURE(m);
            CHECK(red.size() == rule.size());
        }
    }

    SUBCASE("M=2, p=2 tensor rule cannot shrink") {
        auto red = caratheodory_reduce(tensor_rule(hermite_rule(2), 2), 2);
        CHECK(red.size() == 4);
    }

    SUBCASE("M=3, p=3: 27 nodes reduce to at most 23") {
        auto t = tensor_rule(hermite_rule(3), 3);
        auto red = caratheodory_reduce(t, 3);
        CHECK(red.size() <= 23);
        CHECK(moment_mismatch(red, 5) < 1e-10);
        for (std::size_t i = 0; i < red.size(); ++i)
            CHECK(red.weight(i) > 0.0);
    }

    SUBCASE("M=3, p=5: 243 nodes reduce to at most 96") {
        auto t = tensor_rule(hermite_rule(3), 5);
        const auto t0 = std::chrono::steady_clock::now();
        auto red = caratheodory_reduce(t, 3);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CHECK(red.size() <= 96);
        CHECK(moment_mismatch(red, 5) < 1e-10);
        for (std::size_t i = 0; i < red.size(); ++i)
            CHECK(red.weight(i) > 0.0);
        CHECK(secs < 10.0);
    }

    SUBCASE("reduced nodes are a subset of the input nodes") {
        auto t = tensor_rule(hermite_rule(3), 3);
        auto red = caratheodory_reduce(t, 3);
        for (std::size_t i = 0; i < red.size(); ++i) {
            bool found = false;
            for (std::size_t j = 0; j < t.size(); ++j) {
                bool same = true;
                for (int a = 0; a < 3; ++a)
                    same = same && red.node(i)[a] == t.node(j)[a];
                found = found || same;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("integrate") {
    auto r2 = hermite_rule(2);
    CHECK(std::abs(integrate(r2, [](double) { return 1.0; }) - 1.0) < 1e-14);
    CHECK(std::abs(integrate(r2, [](double y) { return y * y; }) - 1.0) < 1e-13);

    // order-M rule misses the y^{2M} moment by a strictly positive gap;
    // for M=2 the gap is (2M-1)!! - sum lambda xi^4 = 3 - 1 = 2
    const double q4 = integrate(r2, [](double y) { return y * y * y * y; });
    CHECK(std::abs((3.0 - q4) - 2.0) < 1e-13);
    for (int m = 2; m <= 6; ++m) {
        auto rule = hermite_rule(m);
        double q = integrate(rule, [m](double y) { return std::pow(y, 2 * m); });
        CHECK(gaussian_moment(2 * m) - q > 0.0);
    }
}

TEST_CASE("monomial_exponents is graded lexicographic") {
    auto monos = monomial_exponents(2, 2);
    REQUIRE(monos.size() == 6);
    CHECK(monos[0] == std::vector<int>{0, 0});
    CHECK(monos[1] == std::vector<int>{1, 0});
    CHECK(monos[2] == std::vector<int>{0, 1});
    CHECK(monos[3] == std::vector<int>{2, 0});
    CHECK(monos[4] == std::vector<int>{1, 1});
    CHECK(monos[5] == std::vector<int>{0, 2});
}
