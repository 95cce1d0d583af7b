// Command-line front end: quad / solve / mc / converge subcommands over the
// solver library. Errors print one machine-readable line on stderr and exit
// nonzero.

#include "slhjb/analytics.hpp"
#include "slhjb/mc.hpp"
#include "slhjb/surface_io.hpp"
#include "slhjb/version.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace slhjb;

InterpKind parse_interp(const std::string& s) {
    if (s == "linear")
        return InterpKind::linear;
    if (s == "pchip")
        return InterpKind::pchip;
    throw Error(ErrorCode::invalid_config, "--interp expects 'linear' or 'pchip'");
}

StepperKind parse_stepper(const std::string& s) {
    if (s == "euler")
        return StepperKind::euler;
    if (s == "weak2")
        return StepperKind::weak2;
    throw Error(ErrorCode::invalid_config, "--stepper expects 'euler' or 'weak2'");
}

std::pair<double, double> parse_domain(const std::string& s) {
    std::istringstream ss(s);
    double lo, hi;
    char comma;
    if (!(ss >> lo >> comma >> hi) || comma != ',' || !(lo < hi))
        throw Error(ErrorCode::invalid_config, "--domain expects 'lo,hi' with lo < hi");
    return {lo, hi};
}

void print_rule_csv(std::ostream& os, const QuadratureRule& rule) {
    for (int a = 0; a < rule.dim(); ++a)
        os << "xi_" << a + 1 << ',';
    os << "weight\n";
    char buf[40];
    for (std::size_t i = 0; i < rule.size(); ++i) {
        for (double c : rule.node(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", c);
            os << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", rule.weight(i));
        os << buf << '\n';
    }
}

int cmd_quad(int order, int dim, bool reduce, std::size_t cap,
             const std::string& out_path) {
    QuadratureRule rule = hermite_rule(order);
    if (dim > 1)
        rule = tensor_rule(rule, dim, cap);
    if (reduce)
        rule = caratheodory_reduce(rule, order);

    if (out_path.empty()) {
        print_rule_csv(std::cout, rule);
    } else {
        std::ofstream out(out_path);
        if (!out)
            throw Error(ErrorCode::io, "cannot open '" + out_path + "'");
        print_rule_csv(out, rule);
    }

    std::cout << "# nodes: " << rule.size() << "\n";
    std::cout << "# moment check (degree <= " << 2 * order - 1 << "):\n";
    for (int d = 0; d <= 2 * order - 1; ++d) {
        double worst = 0.0;
        for (const auto& beta : monomial_exponents(rule.dim(), d)) {
            int total = 0;
            for (int b : beta)
                total += b;
            if (total != d)
                continue;
            double q = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                double term = rule.weight(i);
                auto x = rule.node(i);
                for (int a = 0; a < rule.dim(); ++a)
                    for (int e = 0; e < beta[a]; ++e)
                        term *= x[a];
                q += term;
            }
            double exact = gaussian_moment(beta);
            worst = std::max(worst,
                             std::abs(q - exact) / std::max(1.0, std::abs(exact)));
        }
        std::printf("# degree %d: max scaled mismatch %.3e\n", d, worst);
    }
    return 0;
}

int cmd_solve(const std::string& model_path, int N, long J,
              std::optional<int> gh_order, std::optional<std::string> stepper,
              std::optional<std::string> interp, std::optional<std::string> domain,
              const std::string& out_path, const std::string& surface_path,
              bool all_slices) {
    StudyConfig cfg = load_config(model_path);
    const int order = gh_order.value_or(cfg.scheme.gh_order);
    const StepperKind step = stepper ? parse_stepper(*stepper) : cfg.scheme.stepper;
    const InterpKind ik = interp ? parse_interp(*interp) : cfg.scheme.interp;
    auto box = domain ? parse_domain(*domain)
                      : (cfg.scheme.domain ? *cfg.scheme.domain
                                           : default_domain(cfg.model));

    ControlProblem problem = problem_from_config(cfg.model);
    const Extrapolation extrap =
        cfg.scheme.extrapolation
            ? *cfg.scheme.extrapolation
            : (problem.asymptote ? Extrapolation::payoff_asymptotic
                                 : Extrapolation::clamp);
    Grid grid = Grid::uniform_1d(box.first, box.second, static_cast<int>(J), extrap);
    TimeMesh mesh(N, cfg.model.T);

    SolverOptions opts;
    opts.record_all_values = all_slices;
    opts.record_all_policies = all_slices;
    ValueSurface surface = backward_solve(problem, grid, mesh, hermite_rule(order), ik,
                                          Stepper{step}, opts);

    if (!surface_path.empty()) {
        SurfaceHeader hdr{problem.name, problem.fingerprint, order, ik, step,
                          kToolVersion};
        save_surface(surface_path, surface, hdr);
    }
    if (out_path.empty())
        std::cout << surface_csv(surface);
    else
        emit_csv(surface, out_path);
    return 0;
}

int cmd_mc(const std::string& model_path, std::int64_t paths, std::uint64_t seed,
           int steps, const std::string& policy_path, const std::string& control_spec,
           std::optional<double> x0_opt, std::optional<double> s0_opt, bool antithetic,
           std::optional<double> ref) {
    StudyConfig cfg = load_config(model_path);
    ControlProblem problem = problem_from_config(cfg.model);

    if (!x0_opt && !s0_opt)
        throw Error(ErrorCode::invalid_config, "mc requires --x0 or --s0");
    const double x0 = x0_opt ? *x0_opt : std::log(*s0_opt);

    SimConfig sim;
    sim.n_paths = paths;
    sim.seed = seed;
    sim.steps = steps;
    sim.antithetic = antithetic;

    McControl control;
    LoadedSurface loaded;
    if (!policy_path.empty()) {
        loaded = load_surface(policy_path);
        if (loaded.header.fingerprint != problem.fingerprint)
            throw Error(ErrorCode::configuration,
                        "surface was produced by a different model (fingerprint "
                        "mismatch)");
        sim.steps = loaded.surface.mesh.steps;
        control = FeedbackPolicy{&loaded.surface};
    } else if (!control_spec.empty()) {
        if (control_spec.rfind("const:", 0) != 0)
            throw Error(ErrorCode::invalid_config,
                        "--control expects 'const:<value>'");
        control = FixedControl{{{std::stod(control_spec.substr(6))}}};
    } else {
        throw Error(ErrorCode::invalid_config, "mc requires --policy or --control");
    }

    std::span<const double> x0s(&x0, 1);
    McEstimate est = mc_value(problem, control, x0s, sim);
    std::printf("estimate %.10g\nstd_error %.4g\nn_samples %lld\n", est.value,
                est.std_error, static_cast<long long>(est.n_samples));
    if (ref) {
        const double diff = est.value - *ref;
        std::printf("reference %.10g\ndiff %.4g\nsigmas %.3f\n", *ref, diff,
                    est.std_error > 0 ? diff / est.std_error : 0.0);
    }
    return 0;
}

int cmd_converge(const std::string& study_path, std::string out_path) {
    StudyConfig cfg = load_config(study_path);
    ConvergenceReport report = run_convergence_study(cfg);
    if (out_path.empty())
        out_path = cfg.output;

    for (int k : report.skipped_levels)
        std::cerr << "note: level k=" << k << " skipped (J < 8)\n";
    const std::string csv = report_csv(report);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        if (!out)
            throw Error(ErrorCode::io, "cannot open '" + out_path + "'");
        out << csv;
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-Lagrangian solver for finite-horizon stochastic control"};
    app.set_version_flag("--version", std::string("slhjb ") + slhjb::kToolVersion +
                                          " (config schema " +
                                          std::to_string(slhjb::kConfigSchemaVersion) +
                                          ")");
    app.require_subcommand(1);

    // quad
    auto* quad = app.add_subcommand("quad", "print a Gauss-Hermite rule and moment check");
    int order = 2;
    int dim = 1;
    bool reduce = false;
    std::size_t cap = 1000000;
    std::string quad_out;
    quad->add_option("--order", order, "Gauss-Hermite order M")->required();
    quad->add_option("--dim", dim, "noise dimension p");
    quad->add_flag("--reduce", reduce, "apply Caratheodory node reduction");
    quad->add_option("--cap", cap, "tensor node cap");
    quad->add_option("--out", quad_out, "write the rule CSV to a file");

    // solve
    auto* solve = app.add_subcommand("solve", "backward-solve one configuration");
    std::string model_path;
    int N = 64;
    long J = 1024;
    std::optional<int> gh_order;
    std::optional<std::string> stepper_s, interp_s, domain_s;
    std::string solve_out, surface_out;
    bool all_slices = false;
    solve->add_option("--model", model_path, "model config file")->required();
    solve->add_option("--N", N, "time steps")->required();
    solve->add_option("--J", J, "grid intervals")->required();
    solve->add_option("--gh-order", gh_order, "Gauss-Hermite order M");
    solve->add_option("--stepper", stepper_s, "euler|weak2");
    solve->add_option("--interp", interp_s, "linear|pchip");
    solve->add_option("--domain", domain_s, "log-price domain 'lo,hi'");
    solve->add_option("--out", solve_out, "output CSV path (default stdout)");
    solve->add_option("--save-surface", surface_out, "persist the surface");
    solve->add_flag("--all-slices", all_slices, "record every time slice");

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo value estimate");
    std::string mc_model, policy_path, control_spec;
    std::int64_t paths = 100000;
    std::uint64_t seed = 12345;
    int steps = 64;
    std::optional<double> x0, s0, ref;
    bool antithetic = false;
    mc->add_option("--model", mc_model, "model config file")->required();
    mc->add_option("--paths", paths, "number of paths");
    mc->add_option("--seed", seed, "RNG seed");
    mc->add_option("--N", steps, "time steps");
    mc->add_option("--policy", policy_path, "feedback policy surface file");
    mc->add_option("--control", control_spec, "fixed control, e.g. const:0.15");
    mc->add_option("--x0", x0, "initial state (log-price)");
    mc->add_option("--s0", s0, "initial price (sets x0 = log s0)");
    mc->add_flag("--antithetic", antithetic, "antithetic variates");
    mc->add_option("--ref", ref, "reference value to compare against");

    // converge
    auto* converge = app.add_subcommand("converge", "run a convergence study");
    std::string study_path, converge_out;
    converge->add_option("--study", study_path, "study config file")->required();
    converge->add_option("--out", converge_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (quad->parsed())
            return cmd_quad(order, dim, reduce, cap, quad_out);
        if (solve->parsed())
            return cmd_solve(model_path, N, J, gh_order, stepper_s, interp_s, domain_s,
                             solve_out, surface_out, all_slices);
        if (mc->parsed())
            return cmd_mc(mc_model, paths, seed, steps, policy_path, control_spec, x0,
                          s0, antithetic, ref);
        if (converge->parsed())
            return cmd_converge(study_path, converge_out);
    } catch (const slhjb::Error& e) {
        std::cerr << "error code=" << slhjb::error_code_name(e.code()) << " msg=\""
                  << e.what() << "\"\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error code=internal msg=\"" << e.what() << "\"\n";
        return 1;
    }
    return 0;
}
