#include "slhjb/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>

namespace slhjb {

namespace {

void validate_shapes(const ControlProblem& problem, const Grid& grid,
                     const QuadratureRule& rule) {
    if (rule.dim() != problem.noise_dim)
        throw Error(ErrorCode::configuration, "quadrature dimension must match noise_dim");
    if (grid.dim() != problem.dim)
        throw Error(ErrorCode::configuration, "grid dimension must match problem dim");
    if (problem.controls.empty())
        throw Error(ErrorCode::invalid_model, "control set must be non-empty");
    if (!problem.terminal_payoff)
        throw Error(ErrorCode::invalid_model, "terminal payoff missing");
    if (!problem.drift || !problem.diffusion)
        throw Error(ErrorCode::invalid_model, "drift/diffusion missing");
}

struct Scalar1d {
    const ControlProblem& p;
    double t;
    double a0;

    double mu(double x) const {
        double out;
        std::span<const double> xs(&x, 1), as(&a0, 1);
        p.drift(t, xs, as, {&out, 1});
        return out;
    }
    double sigma(double x) const {
        double out;
        std::span<const double> xs(&x, 1), as(&a0, 1);
        p.diffusion(t, xs, as, {&out, 1});
        return out;
    }
};

double fd_first(const std::function<double(double)>& f, double x, double step) {
    return (f(x + step) - f(x - step)) / (2.0 * step);
}

double fd_second(const std::function<double(double)>& f, double x, double step) {
    return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
}

void step_point_into(const Stepper& stepper, const ControlProblem& problem, double t,
                     std::span<const double> x, std::span<const double> a,
                     std::span<const double> xi, double h, std::span<double> out,
                     std::span<double> scratch) {
    const int d = problem.dim;
    const int p = problem.noise_dim;
    if (stepper.kind == StepperKind::euler) {
        // out = x + mu h + sqrt(h) sigma xi
        problem.drift(t, x, a, out.subspan(0, d));
        problem.diffusion(t, x, a, scratch.subspan(0, static_cast<std::size_t>(d) * p));
        const double sqrt_h = std::sqrt(h);
        for (int j = 0; j < d; ++j) {
            double diff = 0.0;
            for (int k = 0; k < p; ++k)
                diff += scratch[static_cast<std::size_t>(j) * p + k] * xi[k];
            out[j] = x[j] + out[j] * h + sqrt_h * diff;
        }
        return;
    }

    // weak second-order Taylor step
    if (d != 1 || p != 1)
        throw Error(ErrorCode::unsupported_stepper,
                    "weak2 stepper supports scalar problems only");
    if (!problem.time_independent_coeffs)
        throw Error(ErrorCode::unsupported_stepper,
                    "weak2 stepper requires time-independent coefficients");

    Scalar1d c{problem, t, a[0]};
    const double x0 = x[0];
    const double mu = c.mu(x0);
    const double sig = c.sigma(x0);
    const double fd = stepper.fd_relative_step * (1.0 + std::abs(x0));
    const auto& dv = problem.derivs;
    auto mu_f = [&](double y) { return c.mu(y); };
    auto sig_f = [&](double y) { return c.sigma(y); };
    const double mu_x = dv.mu_x ? dv.mu_x(t, x0, a[0]) : fd_first(mu_f, x0, fd);
    const double mu_xx = dv.mu_xx ? dv.mu_xx(t, x0, a[0]) : fd_second(mu_f, x0, fd);
    const double sig_x = dv.sigma_x ? dv.sigma_x(t, x0, a[0]) : fd_first(sig_f, x0, fd);
    const double sig_xx =
        dv.sigma_xx ? dv.sigma_xx(t, x0, a[0]) : fd_second(sig_f, x0, fd);

    const double z = xi[0];
    const double sqrt_h = std::sqrt(h);
    out[0] = x0 + mu * h +
             (0.5 * mu * mu_x + 0.25 * mu_xx * sig * sig) * h * h +
             sig * sqrt_h * z +
             0.5 * sig * sig_x * h * (z * z - 1.0) +
             (0.5 * mu_x * sig + 0.5 * mu * sig_x + 0.25 * sig_xx * sig * sig) * h *
                 sqrt_h * z;
}

}  // namespace

std::vector<double> step_point(const Stepper& stepper, const ControlProblem& problem,
                               double t, std::span<const double> x,
                               std::span<const double> a, std::span<const double> xi,
                               double h) {
    if (!(h > 0.0))
        throw Error(ErrorCode::configuration, "step requires h > 0");
    std::vector<double> out(problem.dim);
    std::vector<double> scratch(static_cast<std::size_t>(problem.dim) * problem.noise_dim);
    step_point_into(stepper, problem, t, x, a, xi, h, out, scratch);
    return out;
}

namespace {

struct BlowupCapture {
    std::atomic<bool> hit{false};
    int n = 0;
    std::size_t m = 0;
    int a = 0;

    void record(int n_, std::size_t m_, int a_) {
        bool expected = false;
        if (hit.compare_exchange_strong(expected, true)) {
            n = n_;
            m = m_;
            a = a_;
        }
    }
    void raise() const {
        if (hit.load())
            throw BlowupError(n, m, a,
                              "non-finite value at slice " + std::to_string(n) +
                                  ", node " + std::to_string(m) + ", control " +
                                  std::to_string(a));
    }
};

double slice_lipschitz_of(const Grid& grid, std::span<const double> values) {
    double worst = 0.0;
    const int d = grid.dim();
    std::size_t stride = 1;
    for (int a = d - 1; a >= 0; --a) {
        const auto& ax = grid.axis(a);
        const double inv_dx = 1.0 / ax.spacing();
        const std::size_t n_axis = static_cast<std::size_t>(ax.intervals) + 1;
        const std::size_t total = grid.node_count();
        for (std::size_t base = 0; base < total; ++base) {
            std::size_t idx_along = (base / stride) % n_axis;
            if (idx_along + 1 < n_axis)
                worst = std::max(worst,
                                 std::abs(values[base + stride] - values[base]) * inv_dx);
        }
        stride *= n_axis;
    }
    return worst;
}

/// Precomputed per-control data for one time slice of the 1-D fast path.
struct ControlPre {
    double disc = 1.0;   // e^{-rho h}
    double gterm = 0.0;  // disc * h * g
    std::vector<double> offsets;  // per quadrature node
    std::vector<long> shifts;
    std::vector<double> thetas;
    long m_lo = 0, m_hi = -1;  // inclusive range where all stencils stay in-grid
};

}  // namespace

ValueSurface backward_solve(const ControlProblem& problem, const Grid& grid,
                            const TimeMesh& mesh, const QuadratureRule& rule,
                            InterpKind interp, const Stepper& stepper,
                            const SolverOptions& options) {
    validate_shapes(problem, grid, rule);
    if (stepper.kind == StepperKind::weak2 && !problem.time_independent_coeffs)
        throw Error(ErrorCode::unsupported_stepper,
                    "weak2 stepper requires time-independent coefficients");

    const int N = mesh.steps;
    const double h = mesh.dt();
    const std::size_t nodes = grid.node_count();
    const int n_controls = static_cast<int>(problem.controls.size());
    const int d = problem.dim;

    ValueSurface out;
    out.grid = grid;
    out.mesh = mesh;
    out.values.resize(N + 1);
    out.policy.resize(N);
    out.slice_lipschitz.assign(N + 1, 0.0);

    std::vector<double> next(nodes);
    std::vector<double> cur(nodes);
    std::vector<std::int32_t> policy_buf(nodes);

    {
        std::vector<double> pt(d);
        for (std::size_t m = 0; m < nodes; ++m) {
            grid.node_point(m, pt);
            next[m] = problem.terminal_payoff(pt);
            if (!std::isfinite(next[m]))
                throw BlowupError(N, m, -1, "non-finite terminal payoff at node " +
                                                std::to_string(m));
        }
    }
    out.values[N] = next;
    out.slice_lipschitz[N] = slice_lipschitz_of(grid, next);

    const AsymptoteFn* asym =
        grid.extrapolation() == Extrapolation::payoff_asymptotic ? &problem.asymptote
                                                                 : nullptr;

    const bool fast1d = d == 1 && problem.x_independent_coeffs;
    const std::size_t n_quad = rule.size();

    std::vector<ControlPre> pre(n_controls);
    const double x_lo = grid.axis(0).lo;
    const double dx1 = grid.axis(0).spacing();
    const long J = grid.axis(0).intervals;

    for (int n = N - 1; n >= 0; --n) {
        const double t = mesh.time(n);
        const double t1 = mesh.time(n + 1);
        BlowupCapture blowup;

        std::vector<double> slopes;
        if (interp == InterpKind::pchip && d == 1)
            slopes = pchip_slopes(dx1, next);

        if (fast1d) {
            // x-independent coefficients: one destination offset per
            // (control, quadrature node), shared by every grid node.
            for (int ai = 0; ai < n_controls; ++ai) {
                auto& cp = pre[ai];
                std::span<const double> a(problem.controls[ai]);
                std::span<const double> rep(&x_lo, 1);
                const double rho = problem.rho(t, rep, a);
                const double g = problem.cost(t, rep, a);
                cp.disc = std::exp(-rho * h);
                cp.gterm = cp.disc * h * g;
                cp.offsets.resize(n_quad);
                cp.shifts.resize(n_quad);
                cp.thetas.resize(n_quad);
                cp.m_lo = 0;
                cp.m_hi = J;
                double dest, scratch_v;
                for (std::size_t i = 0; i < n_quad; ++i) {
                    step_point_into(stepper, problem, t, rep, a, rule.node(i), h,
                                    {&dest, 1}, {&scratch_v, 1});
                    const double off = dest - x_lo;
                    const double u = off / dx1;
                    const long s = static_cast<long>(std::floor(u));
                    cp.offsets[i] = off;
                    cp.shifts[i] = s;
                    cp.thetas[i] = u - static_cast<double>(s);
                    cp.m_lo = std::max(cp.m_lo, -s);
                    cp.m_hi = std::min(cp.m_hi, J - 1 - s);
                }
            }

            const double* vnext = next.data();
            const double* mslope = slopes.empty() ? nullptr : slopes.data();
#pragma omp parallel for schedule(static)
            for (long m = 0; m <= J; ++m) {
                double best = -std::numeric_limits<double>::infinity();
                std::int32_t pol = 0;
                for (int ai = 0; ai < n_controls; ++ai) {
                    const ControlPre& cp = pre[ai];
                    double acc = 0.0;
                    if (m >= cp.m_lo && m <= cp.m_hi) {
                        if (interp == InterpKind::linear) {
                            for (std::size_t i = 0; i < n_quad; ++i) {
                                const long j = m + cp.shifts[i];
                                const double th = cp.thetas[i];
                                acc += rule.weight(i) *
                                       ((1.0 - th) * vnext[j] + th * vnext[j + 1]);
                            }
                        } else {
                            for (std::size_t i = 0; i < n_quad; ++i) {
                                const long j = m + cp.shifts[i];
                                acc += rule.weight(i) *
                                       hermite_cell_eval(vnext[j], vnext[j + 1],
                                                         mslope[j], mslope[j + 1], dx1,
                                                         cp.thetas[i]);
                            }
                        }
                    } else {
                        const double x_m = grid.node_coord(0, static_cast<int>(m));
                        for (std::size_t i = 0; i < n_quad; ++i) {
                            const double dest = x_m + cp.offsets[i];
                            std::span<const double> ds(&dest, 1);
                            const double v =
                                interp == InterpKind::linear
                                    ? interp_multilinear(grid, next, ds, asym, t1)
                                    : interp_pchip(grid, next, ds, asym, t1);
                            acc += rule.weight(i) * v;
                        }
                    }
                    const double val = cp.disc * acc + cp.gterm;
                    if (!std::isfinite(val))
                        blowup.record(n, static_cast<std::size_t>(m), ai);
                    if (val > best) {
                        best = val;
                        pol = static_cast<std::int32_t>(ai);
                    }
                }
                cur[m] = best;
                policy_buf[m] = pol;
            }
        } else {
            // generic path: arbitrary dimension and x-dependent coefficients
#pragma omp parallel for schedule(static)
            for (long ml = 0; ml < static_cast<long>(nodes); ++ml) {
                const std::size_t m = static_cast<std::size_t>(ml);
                std::vector<double> pt(d);
                std::vector<double> dest(d);
                std::vector<double> scratch(static_cast<std::size_t>(d) *
                                            problem.noise_dim);
                grid.node_point(m, pt);
                double best = -std::numeric_limits<double>::infinity();
                std::int32_t pol = 0;
                for (int ai = 0; ai < n_controls; ++ai) {
                    std::span<const double> a(problem.controls[ai]);
                    double acc = 0.0;
                    for (std::size_t i = 0; i < n_quad; ++i) {
                        step_point_into(stepper, problem, t, pt, a, rule.node(i), h,
                                        dest, scratch);
                        const double v =
                            interp == InterpKind::linear
                                ? interp_multilinear(grid, next, dest, asym, t1)
                                : interp_pchip(grid, next, dest, asym, t1);
                        acc += rule.weight(i) * v;
                    }
                    const double disc = std::exp(-problem.rho(t, pt, a) * h);
                    const double val = disc * (acc + h * problem.cost(t, pt, a));
                    if (!std::isfinite(val))
                        blowup.record(n, m, ai);
                    if (val > best) {
                        best = val;
                        pol = static_cast<std::int32_t>(ai);
                    }
                }
                cur[m] = best;
                policy_buf[m] = pol;
            }
        }

        blowup.raise();
        out.slice_lipschitz[n] = slice_lipschitz_of(grid, cur);
        if (n == 0 || options.record_all_values)
            out.values[n] = cur;
        if (n == 0 || options.record_all_policies)
            out.policy[n] = policy_buf;
        std::swap(cur, next);
    }
    return out;
}

TransitionRow transition_row(const ControlProblem& problem, const Grid& grid,
                             const QuadratureRule& rule, double t_n, double h,
                             std::size_t m, std::size_t control_index,
                             InterpKind interp, const Stepper& stepper) {
    validate_shapes(problem, grid, rule);
    if (interp != InterpKind::linear)
        throw Error(ErrorCode::configuration,
                    "transition_row requires linear interpolation (pchip stencils can "
                    "be negative)");
    if (control_index >= problem.controls.size())
        throw Error(ErrorCode::configuration, "control index out of range");

    std::vector<double> pt(problem.dim);
    grid.node_point(m, pt);
    std::span<const double> a(problem.controls[control_index]);

    std::map<std::size_t, double> mass;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        auto dest = step_point(stepper, problem, t_n, pt, a, rule.node(i), h);
        if (!grid.inside(dest) && grid.extrapolation() != Extrapolation::clamp)
            continue;  // mass leaving the grid is not representable as node weights
        for (const auto& entry : locate(grid, dest).entries)
            mass[entry.index] += rule.weight(i) * entry.weight;
    }

    TransitionRow row;
    row.entries.reserve(mass.size());
    for (const auto& [idx, p] : mass)
        row.entries.push_back({idx, p});
    return row;
}

double lipschitz_estimate(const ValueSurface& surface, int n) {
    if (!surface.has_values(n))
        throw Error(ErrorCode::configuration,
                    "slice " + std::to_string(n) + " was not recorded");
    return slice_lipschitz_of(surface.grid, surface.values[n]);
}

}  // namespace slhjb
