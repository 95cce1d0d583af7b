#ifndef SLHJB_CONTROL_PROBLEM_HPP
#define SLHJB_CONTROL_PROBLEM_HPP

/// Finite-horizon controlled-diffusion problem definitions: SDE coefficients
/// over a finite control set, discount rate, running cost, terminal payoff.
/// Includes the unequal borrowing/lending rates option-pricing model in
/// log-price coordinates.

#include "slhjb/interpolation.hpp"

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace slhjb {

struct TimeMesh {
    int steps = 1;         // N
    double horizon = 1.0;  // T

    TimeMesh() = default;
    TimeMesh(int n, double T);

    double dt() const { return horizon / steps; }
    double time(int n) const { return n * dt(); }
};

using DriftFn = std::function<void(double t, std::span<const double> x,
                                   std::span<const double> a, std::span<double> out)>;
using DiffusionFn = DriftFn;  // out is dim x noise_dim, row-major
using ScalarCoeffFn =
    std::function<double(double t, std::span<const double> x, std::span<const double> a)>;
using PayoffFn = std::function<double(std::span<const double> x)>;

/// Optional analytic spatial derivatives for the weak second-order stepper
/// (1-D problems). Missing entries fall back to centered finite differences.
struct CoeffDerivs1d {
    std::function<double(double t, double x, double a)> mu_x, mu_xx, sigma_x, sigma_xx;
};

struct ControlProblem {
    int dim = 1;
    int noise_dim = 1;
    double horizon = 1.0;
    std::vector<std::vector<double>> controls;  // declared order breaks sup ties

    DriftFn drift;
    DiffusionFn diffusion;
    ScalarCoeffFn discount_rate;  // rho >= 0; empty means 0
    ScalarCoeffFn running_cost;   // g; empty means 0
    PayoffFn terminal_payoff;
    AsymptoteFn asymptote;  // optional payoff asymptote for extrapolation

    /// True when mu, sigma, rho and g do not depend on x (enables the
    /// uniform-shift fast path of the solver).
    bool x_independent_coeffs = false;
    bool time_independent_coeffs = true;

    CoeffDerivs1d derivs;

    std::string name;
    std::string fingerprint;  // canonical parameter digest for surface files

    double rho(double t, std::span<const double> x, std::span<const double> a) const {
        return discount_rate ? discount_rate(t, x, a) : 0.0;
    }
    double cost(double t, std::span<const double> x, std::span<const double> a) const {
        return running_cost ? running_cost(t, x, a) : 0.0;
    }
};

double payoff_call(double s, double strike);
double payoff_butterfly(double s, double k1, double k2);

struct CallPayoff {
    double strike;
};
struct ButterflyPayoff {
    double k1;
    double k2;
};
using BergmanPayoff = std::variant<CallPayoff, ButterflyPayoff>;

/// Black-Scholes model with unequal lending/borrowing rates in log-price
/// coordinates: drift q - sigma^2/2, diffusion sigma, discount rate q,
/// control set {r_b, r_l} (borrowing rate first so sup ties resolve to it).
/// r_l == r_b collapses the control set to a single value. sigma == 0 is the
/// allowed degenerate transport limit.
ControlProblem bergman_problem(double r_l, double r_b, double sigma,
                               const BergmanPayoff& payoff, double T);

}  // namespace slhjb

#endif  // SLHJB_CONTROL_PROBLEM_HPP
