#ifndef SLHJB_MC_HPP
#define SLHJB_MC_HPP

/// Monte Carlo validation layer: Euler-Maruyama path simulation under
/// piecewise-constant controls (a fixed control sequence or a feedback policy
/// extracted from a solved surface), value estimation, and strong-rate
/// measurement against the exact geometric Brownian motion solution.

#include "slhjb/control_problem.hpp"
#include "slhjb/solver.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace slhjb {

struct SimConfig {
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 0;
    int steps = 64;  // N; h = problem.horizon / steps
    bool antithetic = false;
};

/// Control held constant per time step: one entry used for every step, or
/// exactly N entries a_0..a_{N-1}.
struct FixedControl {
    std::vector<std::vector<double>> sequence;
};

/// Feedback from a solved surface; evaluated by nearest-grid-node lookup at
/// (t_i, X_{t_i}). The surface must carry the policy at every slice and its
/// mesh must match the simulation steps.
struct FeedbackPolicy {
    const ValueSurface* surface = nullptr;
};

using McControl = std::variant<FixedControl, FeedbackPolicy>;

struct TerminalSamples {
    int dim = 1;
    std::vector<double> states;     // n_paths * dim, path-major
    std::vector<double> discounts;  // exp(-sum rho h) per path
    std::vector<double> costs;      // discounted accumulated running cost per path
};

TerminalSamples simulate_em(const ControlProblem& problem, const McControl& control,
                            std::span<const double> x0, const SimConfig& config);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
};

/// Sample mean and standard error of discount * payoff(X_T) + running cost.
/// With antithetic sampling the statistics are over pair averages.
McEstimate mc_value(const ControlProblem& problem, const McControl& control,
                    std::span<const double> x0, const SimConfig& config);

/// Strong convergence rate of Euler-Maruyama for geometric Brownian motion in
/// price coordinates: for each h, E|S_T^euler - S_T^exact| against the exact
/// solution driven by the same Brownian increments; returns the least-squares
/// slope of log error against log h. Requires at least 3 step sizes.
double strong_rate_estimate(double mu, double sigma, double s0, double T,
                            std::span<const double> h_list, std::int64_t n_paths,
                            std::uint64_t seed);

/// Numerically stable deterministic reduction (recursive pairwise sum).
double pairwise_sum(std::span<const double> values);

}  // namespace slhjb

#endif  // SLHJB_MC_HPP
