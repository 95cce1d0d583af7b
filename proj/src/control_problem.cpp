#include "slhjb/control_problem.hpp"

#include <cmath>
#include <sstream>

namespace slhjb {

TimeMesh::TimeMesh(int n, double T) : steps(n), horizon(T) {
    if (n < 1)
        throw Error(ErrorCode::configuration, "time mesh requires >= 1 step");
    if (!(T > 0.0))
        throw Error(ErrorCode::configuration, "time mesh requires horizon > 0");
}

double payoff_call(double s, double strike) {
    return std::max(s - strike, 0.0);
}

double payoff_butterfly(double s, double k1, double k2) {
    return 0.25 * (std::max(s - k1, 0.0) - 2.0 * std::max(s - 0.5 * (k1 + k2), 0.0) +
                   std::max(s - k2, 0.0));
}

ControlProblem bergman_problem(double r_l, double r_b, double sigma,
                               const BergmanPayoff& payoff, double T) {
    if (!(r_l > 0.0) || !(r_l <= r_b))
        throw Error(ErrorCode::invalid_model, "rates must satisfy 0 < r_l <= r_b");
    if (sigma < 0.0)
        throw Error(ErrorCode::invalid_model, "sigma must be >= 0");
    if (!(T > 0.0))
        throw Error(ErrorCode::invalid_model, "horizon must be positive");

    ControlProblem p;
    p.dim = 1;
    p.noise_dim = 1;
    p.horizon = T;
    p.controls = {{r_b}};
    if (r_l != r_b)
        p.controls.push_back({r_l});

    p.drift = [sigma](double, std::span<const double>, std::span<const double> a,
                      std::span<double> out) { out[0] = a[0] - 0.5 * sigma * sigma; };
    p.diffusion = [sigma](double, std::span<const double>, std::span<const double>,
                          std::span<double> out) { out[0] = sigma; };
    p.discount_rate = [](double, std::span<const double>, std::span<const double> a) {
        return a[0];
    };
    p.x_independent_coeffs = true;
    p.time_independent_coeffs = true;
    auto zero1 = [](double, double, double) { return 0.0; };
    p.derivs = {zero1, zero1, zero1, zero1};

    std::ostringstream fp;
    fp.precision(17);
    if (const auto* call = std::get_if<CallPayoff>(&payoff)) {
        const double K = call->strike;
        if (!(K > 0.0))
            throw Error(ErrorCode::invalid_model, "call strike must be positive");
        p.terminal_payoff = [K](std::span<const double> x) {
            return payoff_call(std::exp(x[0]), K);
        };
        // s - K e^{-r_b (T-t)} for large s, 0 for small s; one formula covers both
        p.asymptote = [K, r_b, T](double t, std::span<const double> x) {
            return std::max(std::exp(x[0]) - K * std::exp(-r_b * (T - t)), 0.0);
        };
        p.name = "bergman-call";
        fp << "bergman-call;" << r_l << ';' << r_b << ';' << sigma << ';' << K << ';' << T;
    } else {
        const auto& bf = std::get<ButterflyPayoff>(payoff);
        if (!(bf.k1 > 0.0) || !(bf.k1 < bf.k2))
            throw Error(ErrorCode::invalid_model,
                        "butterfly strikes must satisfy 0 < K1 < K2");
        const double k1 = bf.k1;
        const double k2 = bf.k2;
        p.terminal_payoff = [k1, k2](std::span<const double> x) {
            return payoff_butterfly(std::exp(x[0]), k1, k2);
        };
        p.asymptote = [](double, std::span<const double>) { return 0.0; };
        p.name = "bergman-butterfly";
        fp << "bergman-butterfly;" << r_l << ';' << r_b << ';' << sigma << ';' << k1
           << ';' << k2 << ';' << T;
    }
    p.fingerprint = fp.str();
    return p;
}

}  // namespace slhjb
