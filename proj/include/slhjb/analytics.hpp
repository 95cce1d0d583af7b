#ifndef SLHJB_ANALYTICS_HPP
#define SLHJB_ANALYTICS_HPP

/// References and metrology: the closed-form Black-Scholes price, sup-norm
/// errors over price intervals, convergence-order estimation, and the
/// refinement-study driver.

#include "slhjb/config.hpp"
#include "slhjb/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace slhjb {

double norm_cdf(double x);
double bs_call(double s, double strike, double r, double sigma, double T);

/// Max over slice-0 grid nodes with price e^{x_m} inside [lo, hi] of
/// |V(0, x_m) - reference(e^{x_m})|. Throws invalid-interval when no node
/// falls inside.
double sup_error(const ValueSurface& surface,
                 const std::function<double(double)>& reference_by_price,
                 Interval interval);

/// Same, against a finer surface evaluated at the coarse nodes through the
/// stated interpolant.
double sup_error(const ValueSurface& coarse, const ValueSurface& fine,
                 InterpKind interp, Interval interval);

struct StudyRow {
    int k = 0;
    std::int64_t N = 0;
    std::int64_t J = 0;
    std::vector<double> errors;  // per interval; NaN = unavailable
    std::vector<double> orders;  // per interval; NaN = undefined
    double cpu_seconds = 0.0;
    std::string note;
};

struct ConvergenceReport {
    std::string model_name;
    int gh_order = 2;
    InterpKind interp = InterpKind::linear;
    StepperKind stepper = StepperKind::euler;
    ReferenceKind reference = ReferenceKind::exact;
    std::vector<Interval> intervals;
    std::pair<double, double> domain{0.0, 1.0};
    std::vector<StudyRow> rows;
    std::vector<int> skipped_levels;  // J < 8
};

/// log2(previous / current); the estimated convergence order between two
/// consecutive refinement errors.
double estimated_order(double error_prev, double error_cur);

/// Runs backward_solve over the refinement ladder N(k), J(k), measures
/// per-interval sup errors against the configured reference (exact
/// Black-Scholes or the next refinement level), and records orders and
/// wall-clock times. Levels with J < 8 are skipped and noted; per-level
/// failures are recorded in the row and the study continues.
ConvergenceReport run_convergence_study(const StudyConfig& config);

}  // namespace slhjb

#endif  // SLHJB_ANALYTICS_HPP
