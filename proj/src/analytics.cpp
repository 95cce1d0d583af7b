#include "slhjb/analytics.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace slhjb {

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double bs_call(double s, double strike, double r, double sigma, double T) {
    if (s < 0.0)
        throw Error(ErrorCode::invalid_model, "spot must be >= 0");
    if (!(strike > 0.0) || !(sigma > 0.0) || !(T > 0.0))
        throw Error(ErrorCode::invalid_model, "strike, sigma and T must be positive");
    if (s == 0.0)
        return 0.0;
    const double vol = sigma * std::sqrt(T);
    const double d1 = (std::log(s / strike) + (r + 0.5 * sigma * sigma) * T) / vol;
    const double d2 = d1 - vol;
    return s * norm_cdf(d1) - strike * std::exp(-r * T) * norm_cdf(d2);
}

namespace {

void check_surface_1d(const ValueSurface& surface) {
    if (surface.grid.dim() != 1)
        throw Error(ErrorCode::configuration, "sup_error expects a 1-D surface");
    if (!surface.has_values(0))
        throw Error(ErrorCode::configuration, "surface lacks slice 0 values");
}

}  // namespace

double sup_error(const ValueSurface& surface,
                 const std::function<double(double)>& reference_by_price,
                 Interval interval) {
    check_surface_1d(surface);
    const auto& ax = surface.grid.axis(0);
    double worst = -1.0;
    for (int m = 0; m <= ax.intervals; ++m) {
        const double s = std::exp(surface.grid.node_coord(0, m));
        if (s < interval.lo || s > interval.hi)
            continue;
        worst = std::max(worst,
                         std::abs(surface.values[0][m] - reference_by_price(s)));
    }
    if (worst < 0.0)
        throw Error(ErrorCode::invalid_interval,
                    "no grid node has price in [" + std::to_string(interval.lo) + ", " +
                        std::to_string(interval.hi) + "]");
    return worst;
}

double sup_error(const ValueSurface& coarse, const ValueSurface& fine, InterpKind interp,
                 Interval interval) {
    check_surface_1d(coarse);
    check_surface_1d(fine);
    const auto& ax = coarse.grid.axis(0);
    double worst = -1.0;
    for (int m = 0; m <= ax.intervals; ++m) {
        const double x = coarse.grid.node_coord(0, m);
        const double s = std::exp(x);
        if (s < interval.lo || s > interval.hi)
            continue;
        std::span<const double> xs(&x, 1);
        const double fine_v = interp == InterpKind::linear
                                  ? interp_multilinear(fine.grid, fine.values[0], xs)
                                  : interp_pchip(fine.grid, fine.values[0], xs);
        worst = std::max(worst, std::abs(coarse.values[0][m] - fine_v));
    }
    if (worst < 0.0)
        throw Error(ErrorCode::invalid_interval,
                    "no grid node has price in [" + std::to_string(interval.lo) + ", " +
                        std::to_string(interval.hi) + "]");
    return worst;
}

double estimated_order(double error_prev, double error_cur) {
    return std::log2(error_prev / error_cur);
}

ConvergenceReport run_convergence_study(const StudyConfig& config) {
    const auto& scheme = config.scheme;
    if (scheme.n_rule.empty() || scheme.j_rule.empty())
        throw Error(ErrorCode::invalid_config, "study requires N_rule and J_rule");
    if (config.measurement.intervals.empty())
        throw Error(ErrorCode::invalid_config, "study requires measurement intervals");

    const ControlProblem problem = problem_from_config(config.model);
    const auto domain = scheme.domain ? *scheme.domain : default_domain(config.model);
    const Extrapolation extrap =
        scheme.extrapolation
            ? *scheme.extrapolation
            : (problem.asymptote ? Extrapolation::payoff_asymptotic
                                 : Extrapolation::clamp);

    std::function<double(double)> exact_ref;
    if (config.measurement.reference == ReferenceKind::exact) {
        const auto* call = std::get_if<CallPayoff>(&config.model.payoff);
        if (call == nullptr)
            throw Error(ErrorCode::invalid_config,
                        "exact reference is only available for the call payoff");
        const double K = call->strike;
        const double r = config.model.r_b;
        const double sigma = config.model.sigma;
        const double T = config.model.T;
        exact_ref = [=](double s) { return bs_call(s, K, r, sigma, T); };
    }

    ConvergenceReport report;
    report.model_name = problem.name;
    report.gh_order = scheme.gh_order;
    report.interp = scheme.interp;
    report.stepper = scheme.stepper;
    report.reference = config.measurement.reference;
    report.intervals = config.measurement.intervals;
    report.domain = domain;

    const bool self_diff = config.measurement.reference == ReferenceKind::self_difference;
    const int k_solve_max = scheme.k_max + (self_diff ? 1 : 0);
    const QuadratureRule rule = hermite_rule(scheme.gh_order);
    const Stepper stepper{scheme.stepper};
    const double nan = std::numeric_limits<double>::quiet_NaN();

    struct Level {
        std::int64_t N = 0, J = 0;
        ValueSurface surface;
        double cpu = 0.0;
        bool ok = false;
        std::string note;
    };
    std::map<int, Level> levels;

    for (int k = scheme.k_min; k <= k_solve_max; ++k) {
        Level lvl;
        lvl.N = scheme.n_rule.eval(k);
        lvl.J = scheme.j_rule.eval(k, lvl.N);
        if (lvl.N < 1) {
            lvl.note = "N < 1";
            levels.emplace(k, std::move(lvl));
            continue;
        }
        if (lvl.J < 8) {
            if (k <= scheme.k_max)
                report.skipped_levels.push_back(k);
            lvl.note = "skipped (J < 8)";
            levels.emplace(k, std::move(lvl));
            continue;
        }
        try {
            Grid grid = Grid::uniform_1d(domain.first, domain.second,
                                         static_cast<int>(lvl.J), extrap);
            TimeMesh mesh(static_cast<int>(lvl.N), config.model.T);
            const auto t0 = std::chrono::steady_clock::now();
            lvl.surface = backward_solve(problem, grid, mesh, rule, scheme.interp,
                                         stepper);
            lvl.cpu = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
            lvl.ok = true;
        } catch (const Error& e) {
            lvl.note = e.what();
        }
        levels.emplace(k, std::move(lvl));
    }

    std::vector<double> prev_errors(report.intervals.size(), nan);
    for (int k = scheme.k_min; k <= scheme.k_max; ++k) {
        const Level& lvl = levels.at(k);
        if (!lvl.note.empty() && lvl.note.rfind("skipped", 0) == 0)
            continue;  // skipped levels never make a row

        StudyRow row;
        row.k = k;
        row.N = lvl.N;
        row.J = lvl.J;
        row.cpu_seconds = lvl.cpu;
        row.note = lvl.note;
        row.errors.assign(report.intervals.size(), nan);
        row.orders.assign(report.intervals.size(), nan);

        const Level* fine = nullptr;
        if (self_diff) {
            auto it = levels.find(k + 1);
            if (it != levels.end() && it->second.ok)
                fine = &it->second;
        }

        for (std::size_t iv = 0; iv < report.intervals.size(); ++iv) {
            if (!lvl.ok)
                break;
            try {
                if (self_diff) {
                    if (fine == nullptr) {
                        row.note = "next refinement unavailable";
                        continue;
                    }
                    row.errors[iv] = sup_error(lvl.surface, fine->surface, scheme.interp,
                                               report.intervals[iv]);
                } else {
                    row.errors[iv] =
                        sup_error(lvl.surface, exact_ref, report.intervals[iv]);
                }
                if (std::isfinite(prev_errors[iv]) && std::isfinite(row.errors[iv]))
                    row.orders[iv] = estimated_order(prev_errors[iv], row.errors[iv]);
            } catch (const Error& e) {
                row.note = e.what();
            }
        }
        for (std::size_t iv = 0; iv < report.intervals.size(); ++iv)
            prev_errors[iv] = row.errors[iv];
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace slhjb
