#include "slhjb/mc.hpp"

#include "slhjb/rng.hpp"

#include <algorithm>
#include <cmath>

namespace slhjb {

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double acc = 0.0;
        for (double v : values)
            acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

namespace {

struct FeedbackLookup {
    const ValueSurface* surface;
    const ControlProblem* problem;

    std::size_t nearest_node(std::span<const double> x) const {
        const Grid& g = surface->grid;
        std::size_t flat = 0;
        for (int a = 0; a < g.dim(); ++a) {
            const auto& ax = g.axis(a);
            long idx = std::lround((x[a] - ax.lo) / ax.spacing());
            idx = std::clamp(idx, 0L, static_cast<long>(ax.intervals));
            flat = flat * (static_cast<std::size_t>(ax.intervals) + 1) +
                   static_cast<std::size_t>(idx);
        }
        return flat;
    }

    std::span<const double> control_at(int step, std::span<const double> x) const {
        const auto ai = surface->policy[step][nearest_node(x)];
        return problem->controls[static_cast<std::size_t>(ai)];
    }
};

}  // namespace

TerminalSamples simulate_em(const ControlProblem& problem, const McControl& control,
                            std::span<const double> x0, const SimConfig& config) {
    if (config.n_paths < 1)
        throw Error(ErrorCode::configuration, "n_paths must be >= 1");
    if (config.steps < 1)
        throw Error(ErrorCode::configuration, "steps must be >= 1");
    if (static_cast<int>(x0.size()) != problem.dim)
        throw Error(ErrorCode::configuration, "x0 dimension mismatch");
    if (config.antithetic && config.n_paths % 2 != 0)
        throw Error(ErrorCode::configuration, "antithetic sampling needs even n_paths");

    const int N = config.steps;
    const double h = problem.horizon / N;
    const int d = problem.dim;
    const int p = problem.noise_dim;

    const FixedControl* fixed = std::get_if<FixedControl>(&control);
    FeedbackLookup feedback{nullptr, &problem};
    if (fixed != nullptr) {
        if (fixed->sequence.size() != 1 &&
            fixed->sequence.size() != static_cast<std::size_t>(N))
            throw Error(ErrorCode::configuration,
                        "fixed control sequence must have 1 or N entries");
    } else {
        feedback.surface = std::get<FeedbackPolicy>(control).surface;
        if (feedback.surface == nullptr)
            throw Error(ErrorCode::configuration, "feedback policy surface missing");
        if (feedback.surface->mesh.steps != N ||
            std::abs(feedback.surface->mesh.horizon - problem.horizon) >
                1e-12 * std::max(1.0, problem.horizon))
            throw Error(ErrorCode::configuration,
                        "feedback surface time mesh does not match the simulation");
        for (int n = 0; n < N; ++n)
            if (!feedback.surface->has_policy(n))
                throw Error(ErrorCode::configuration,
                            "feedback surface lacks the policy at slice " +
                                std::to_string(n));
    }

    TerminalSamples out;
    out.dim = d;
    out.states.resize(static_cast<std::size_t>(config.n_paths) * d);
    out.discounts.resize(config.n_paths);
    out.costs.resize(config.n_paths);

#pragma omp parallel for schedule(static)
    for (std::int64_t path = 0; path < config.n_paths; ++path) {
        const std::uint64_t stream =
            config.antithetic ? static_cast<std::uint64_t>(path) / 2
                              : static_cast<std::uint64_t>(path);
        const double flip = (config.antithetic && path % 2 == 1) ? -1.0 : 1.0;
        PathRng rng(config.seed, stream);

        std::vector<double> x(x0.begin(), x0.end());
        std::vector<double> mu(d);
        std::vector<double> sig(static_cast<std::size_t>(d) * p);
        std::vector<double> z(p);
        double disc = 1.0;
        double cost = 0.0;

        for (int i = 0; i < N; ++i) {
            const double t = i * h;
            std::span<const double> a =
                fixed != nullptr
                    ? std::span<const double>(
                          fixed->sequence[fixed->sequence.size() == 1 ? 0 : i])
                    : feedback.control_at(i, x);

            disc *= std::exp(-problem.rho(t, x, a) * h);
            cost += disc * h * problem.cost(t, x, a);

            problem.drift(t, x, a, mu);
            problem.diffusion(t, x, a, sig);
            for (int k = 0; k < p; ++k)
                z[k] = flip * rng.next_gaussian();
            const double sqrt_h = std::sqrt(h);
            for (int j = 0; j < d; ++j) {
                double diff = 0.0;
                for (int k = 0; k < p; ++k)
                    diff += sig[static_cast<std::size_t>(j) * p + k] * z[k];
                x[j] += mu[j] * h + sqrt_h * diff;
            }
        }
        for (int j = 0; j < d; ++j)
            out.states[static_cast<std::size_t>(path) * d + j] = x[j];
        out.discounts[path] = disc;
        out.costs[path] = cost;
    }
    return out;
}

McEstimate mc_value(const ControlProblem& problem, const McControl& control,
                    std::span<const double> x0, const SimConfig& config) {
    TerminalSamples samples = simulate_em(problem, control, x0, config);
    const int d = samples.dim;

    std::vector<double> v(config.n_paths);
    for (std::int64_t i = 0; i < config.n_paths; ++i) {
        std::span<const double> xT(samples.states.data() + i * d,
                                   static_cast<std::size_t>(d));
        v[i] = samples.discounts[i] * problem.terminal_payoff(xT) + samples.costs[i];
    }
    if (config.antithetic) {
        std::vector<double> pairs(config.n_paths / 2);
        for (std::size_t k = 0; k < pairs.size(); ++k)
            pairs[k] = 0.5 * (v[2 * k] + v[2 * k + 1]);
        v = std::move(pairs);
    }

    const auto n = static_cast<std::int64_t>(v.size());
    const double mean = pairwise_sum(v) / static_cast<double>(n);
    double se = 0.0;
    if (n > 1) {
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            sq[i] = (v[i] - mean) * (v[i] - mean);
        const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
        se = std::sqrt(var / static_cast<double>(n));
    }
    return {mean, se, n};
}

double strong_rate_estimate(double mu, double sigma, double s0, double T,
                            std::span<const double> h_list, std::int64_t n_paths,
                            std::uint64_t seed) {
    if (h_list.size() < 3)
        throw Error(ErrorCode::insufficient_data,
                    "strong rate estimation needs at least 3 step sizes");
    if (n_paths < 2)
        throw Error(ErrorCode::insufficient_data, "strong rate estimation needs paths");

    std::vector<double> log_h;
    std::vector<double> log_err;
    std::vector<double> abs_err(n_paths);

    for (std::size_t hi = 0; hi < h_list.size(); ++hi) {
        const int N = std::max(1, static_cast<int>(std::lround(T / h_list[hi])));
        const double h = T / N;
        const double sqrt_h = std::sqrt(h);

#pragma omp parallel for schedule(static)
        for (std::int64_t path = 0; path < n_paths; ++path) {
            PathRng rng(seed + 0x9e3779b97f4a7c15ULL * (hi + 1),
                        static_cast<std::uint64_t>(path));
            double s = s0;
            double brownian = 0.0;
            for (int i = 0; i < N; ++i) {
                const double db = sqrt_h * rng.next_gaussian();
                s += mu * s * h + sigma * s * db;
                brownian += db;
            }
            const double exact =
                s0 * std::exp((mu - 0.5 * sigma * sigma) * T + sigma * brownian);
            abs_err[path] = std::abs(s - exact);
        }
        const double mean_err = pairwise_sum(abs_err) / static_cast<double>(n_paths);
        log_h.push_back(std::log(h));
        log_err.push_back(std::log(mean_err));
    }

    const double n = static_cast<double>(log_h.size());
    const double xb = pairwise_sum(log_h) / n;
    const double yb = pairwise_sum(log_err) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < log_h.size(); ++i) {
        sxx += (log_h[i] - xb) * (log_h[i] - xb);
        sxy += (log_h[i] - xb) * (log_err[i] - yb);
    }
    return sxy / sxx;
}

}  // namespace slhjb
