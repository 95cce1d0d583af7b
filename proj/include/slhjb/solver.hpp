#ifndef SLHJB_SOLVER_HPP
#define SLHJB_SOLVER_HPP

/// The fully discrete semi-Lagrangian scheme: backward dynamic programming
/// over a uniform grid with Gauss-Hermite transitions, Euler-Maruyama or weak
/// second-order time stepping, interpolation at the step destinations, and
/// per-step discounting.

#include "slhjb/control_problem.hpp"
#include "slhjb/quadrature.hpp"

#include <cstdint>
#include <vector>

namespace slhjb {

enum class StepperKind { euler, weak2 };
enum class InterpKind { linear, pchip };

struct Stepper {
    StepperKind kind = StepperKind::euler;
    /// Relative step for centered finite differences when the model carries
    /// no analytic derivatives (weak2 only).
    double fd_relative_step = 1e-5;
};

struct SolverOptions {
    bool record_all_values = false;    // keep every time slice (memory permitting)
    bool record_all_policies = false;  // keep the argmax field at every slice
};

/// Backward-solve output. Slices 0 and N of `values` and slice 0 of `policy`
/// are always recorded; the rest only under SolverOptions.
struct ValueSurface {
    Grid grid;
    TimeMesh mesh;
    std::vector<std::vector<double>> values;    // [n][node], empty if not recorded
    std::vector<std::vector<std::int32_t>> policy;  // [n][node], n < N
    std::vector<double> slice_lipschitz;        // [n], discrete Lipschitz constant

    bool has_values(int n) const {
        return n >= 0 && n < static_cast<int>(values.size()) && !values[n].empty();
    }
    bool has_policy(int n) const {
        return n >= 0 && n < static_cast<int>(policy.size()) && !policy[n].empty();
    }
};

/// One controlled step from x at time t with the Gaussian increment realized
/// at quadrature node xi. euler: x + mu h + sqrt(h) sigma xi. weak2: the
/// second-order Taylor step (1-D, time-independent coefficients).
std::vector<double> step_point(const Stepper& stepper, const ControlProblem& problem,
                               double t, std::span<const double> x,
                               std::span<const double> a, std::span<const double> xi,
                               double h);

ValueSurface backward_solve(const ControlProblem& problem, const Grid& grid,
                            const TimeMesh& mesh, const QuadratureRule& rule,
                            InterpKind interp, const Stepper& stepper,
                            const SolverOptions& options = {});

/// One row of the controlled Markov chain: transition probabilities from node
/// m at time t_n under control index a, merged over duplicate destinations
/// and sorted by grid index. Entries are nonnegative and sum to one whenever
/// every step destination lands inside the grid. Linear interpolation only.
struct TransitionRow {
    struct Entry {
        std::size_t index;
        double probability;
    };
    std::vector<Entry> entries;
};

TransitionRow transition_row(const ControlProblem& problem, const Grid& grid,
                             const QuadratureRule& rule, double t_n, double h,
                             std::size_t m, std::size_t control_index,
                             InterpKind interp = InterpKind::linear,
                             const Stepper& stepper = {});

/// Discrete Lipschitz constant of slice n: max over grid-adjacent node pairs
/// of |V(x_m) - V(x_m')| / |x_m - x_m'|.
double lipschitz_estimate(const ValueSurface& surface, int n);

}  // namespace slhjb

#endif  // SLHJB_SOLVER_HPP
