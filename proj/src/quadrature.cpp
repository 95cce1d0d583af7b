#include "slhjb/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>

namespace slhjb {

namespace {

/// Orthonormal Hermite polynomial (weight e^{-z^2}) evaluated at z, together
/// with the previous-order value needed for Newton steps and weights.
struct HermitePair {
    double p_m;    // ~H_M(z)
    double p_m1;   // ~H_{M-1}(z)
};

HermitePair orthonormal_hermite(int order, double z) {
    double p1 = std::pow(std::numbers::pi, -0.25);
    double p2 = 0.0;
    for (int j = 1; j <= order; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
    }
    return {p1, p2};
}

}  // namespace

QuadratureRule::QuadratureRule(int dim, int gh_order, std::vector<double> flat_nodes,
                               std::vector<double> weights)
    : dim_(dim), gh_order_(gh_order), nodes_(std::move(flat_nodes)),
      weights_(std::move(weights)) {
    if (dim_ < 1)
        throw Error(ErrorCode::invalid_order, "rule dimension must be >= 1");
    if (nodes_.size() != weights_.size() * static_cast<std::size_t>(dim_))
        throw Error(ErrorCode::invalid_order, "node/weight size mismatch");
}

QuadratureRule hermite_rule(int order) {
    if (order < 2 || order > 64)
        throw Error(ErrorCode::invalid_order,
                    "Gauss-Hermite order must be in [2, 64], got " + std::to_string(order));

    const int m = order;
    const int half = (m + 1) / 2;
    std::vector<double> roots(half);  // positive half, descending

    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        // Initial guesses for the descending positive roots of H_M.
        if (i == 0) {
            z = std::sqrt(2.0 * m + 1.0) - 1.85575 * std::pow(2.0 * m + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(m, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * roots[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * roots[1];
        } else {
            z = 2.0 * z - roots[i - 2];
        }
        // Newton iteration on the orthonormal recurrence.
        for (int it = 0; it < 100; ++it) {
            auto [pm, pm1] = orthonormal_hermite(m, z);
            double deriv = std::sqrt(2.0 * m) * pm1;
            double step = pm / deriv;
            z -= step;
            if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z)))
                break;
        }
        roots[i] = z;
    }
    if (m % 2 == 1)
        roots[half - 1] = 0.0;

    std::vector<double> nodes(m);
    std::vector<double> weights(m);
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (int i = 0; i < half; ++i) {
        double zi = roots[i];
        auto [pm, pm1] = orthonormal_hermite(m, zi);
        (void)pm;
        // lambda = omega / sqrt(pi) with the closed-form weight evaluated
        // through the normalized recurrence: lambda = 1 / (M sqrt(pi) ~H_{M-1}^2).
        double lambda = 1.0 / (m * sqrt_pi * pm1 * pm1);
        double xi = std::numbers::sqrt2 * zi;
        nodes[m - 1 - i] = xi;
        nodes[i] = -xi;
        weights[m - 1 - i] = lambda;
        weights[i] = lambda;
    }
    if (m % 2 == 1)
        nodes[half - 1] = 0.0;

    return QuadratureRule(1, m, std::move(nodes), std::move(weights));
}

QuadratureRule tensor_rule(const QuadratureRule& base, int dim, std::size_t node_cap) {
    if (base.dim() != 1)
        throw Error(ErrorCode::invalid_order, "tensor_rule requires a 1-D base rule");
    if (dim < 1)
        throw Error(ErrorCode::invalid_order, "tensor dimension must be >= 1");

    const std::size_t m = base.size();
    std::size_t count = 1;
    for (int a = 0; a < dim; ++a) {
        if (count > node_cap / m)
            throw Error(ErrorCode::capacity,
                        "tensor rule would exceed node cap of " + std::to_string(node_cap));
        count *= m;
    }

    std::vector<double> nodes(count * dim);
    std::vector<double> weights(count, 1.0);
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t i = 0; i < count; ++i) {
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            nodes[i * dim + a] = base.node1d(idx[a]);
            w *= base.weight(idx[a]);
        }
        weights[i] = w;
        // advance multi-index, last coordinate fastest (row-major)
        for (int a = dim - 1; a >= 0; --a) {
            if (++idx[a] < m)
                break;
            idx[a] = 0;
        }
    }
    return QuadratureRule(dim, base.gh_order(), std::move(nodes), std::move(weights));
}

double gaussian_moment(int beta) {
    if (beta % 2 == 1)
        return 0.0;
    double v = 1.0;
    for (int k = beta - 1; k > 1; k -= 2)
        v *= k;
    return v;
}

double gaussian_moment(std::span<const int> beta) {
    double out = 1.0;
    for (int b : beta) {
        if (b % 2 == 1)
            return 0.0;
        out *= gaussian_moment(b);
    }
    return out;
}

std::vector<std::vector<int>> monomial_exponents(int dim, int max_degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> beta(dim, 0);
    // enumerate per total degree; within a degree, lexicographic on exponents
    std::function<void(int, int, int)> rec = [&](int pos, int remaining, int degree) {
        if (pos == dim - 1) {
            beta[pos] = remaining;
            (void)degree;
            out.push_back(beta);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            beta[pos] = e;
            rec(pos + 1, remaining - e, degree);
        }
    };
    for (int d = 0; d <= max_degree; ++d)
        rec(0, d, d);
    return out;
}

double integrate(const QuadratureRule& rule,
                 const std::function<double(std::span<const double>)>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc += rule.weight(i) * f(rule.node(i));
    return acc;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
    if (rule.dim() != 1)
        throw Error(ErrorCode::invalid_order, "scalar integrate requires a 1-D rule");
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc += rule.weight(i) * f(rule.node1d(i));
    return acc;
}

double moment_mismatch(const QuadratureRule& rule, int max_degree) {
    double worst = 0.0;
    for (const auto& beta : monomial_exponents(rule.dim(), max_degree)) {
        double q = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            auto x = rule.node(i);
            double term = rule.weight(i);
            for (int a = 0; a < rule.dim(); ++a)
                for (int e = 0; e < beta[a]; ++e)
                    term *= x[a];
            q += term;
        }
        double exact = gaussian_moment(beta);
        worst = std::max(worst, std::abs(q - exact) / std::max(1.0, std::abs(exact)));
    }
    return worst;
}

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Matrix moment_matrix(const QuadratureRule& rule, std::span<const std::size_t> cols,
                     const std::vector<std::vector<int>>& monos) {
    Matrix A(monos.size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto x = rule.node(cols[c]);
        for (std::size_t r = 0; r < monos.size(); ++r) {
            double v = 1.0;
            for (int a = 0; a < rule.dim(); ++a)
                for (int e = 0; e < monos[r][a]; ++e)
                    v *= x[a];
            A(r, c) = v;
        }
    }
    return A;
}

/// One Caratheodory elimination pass on a column-grouped moment system.
/// `group_nodes[c]` lists the input node ids tied to column c (all sharing
/// one weight). Eliminates until the active columns are linearly
/// independent; picks, at each step, the null direction that zeroes the most
/// nodes. Updates `weights` (per column) in place and returns the surviving
/// column ids.
std::vector<std::size_t> eliminate(const Matrix& A_full, std::vector<double>& weights,
                                   const std::vector<std::size_t>& group_sizes) {
    std::vector<std::size_t> active(weights.size());
    for (std::size_t i = 0; i < active.size(); ++i)
        active[i] = i;

    while (active.size() > 1) {
        Matrix A(A_full.rows(), active.size());
        for (std::size_t c = 0; c < active.size(); ++c)
            A.col(c) = A_full.col(active[c]);

        Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        double tol = std::max(A.rows(), A.cols()) *
                     std::numeric_limits<double>::epsilon() *
                     (sv.size() > 0 ? sv(0) : 1.0);
        Eigen::Index rank = 0;
        while (rank < sv.size() && sv(rank) > tol)
            ++rank;
        Eigen::Index kdim = static_cast<Eigen::Index>(active.size()) - rank;
        if (kdim <= 0)
            break;

        const Matrix kernel = svd.matrixV().rightCols(kdim);  // n x kdim

        // Try to target each active column for removal; keep the direction
        // that removes the most nodes.
        double best_score = -1.0;
        Vector best_dir;
        double best_t = 0.0;
        for (Eigen::Index target = 0; target < kernel.rows(); ++target) {
            Vector dir = kernel * kernel.row(target).transpose();
            if (std::abs(dir(target)) < 1e-12)
                continue;
            dir /= dir(target);
            double t = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < dir.size(); ++c)
                if (dir(c) > 1e-14)
                    t = std::min(t, weights[active[c]] / dir(c));
            if (!std::isfinite(t))
                continue;
            std::size_t killed = 0;
            for (Eigen::Index c = 0; c < dir.size(); ++c) {
                double w = weights[active[c]] - t * dir(c);
                if (w <= 1e-13)
                    killed += group_sizes[active[c]];
            }
            if (static_cast<double>(killed) > best_score) {
                best_score = static_cast<double>(killed);
                best_dir = dir;
                best_t = t;
            }
        }
        if (best_score <= 0.0)
            break;  // kernel present but no removable direction: stop cleanly

        std::vector<std::size_t> next;
        next.reserve(active.size());
        for (Eigen::Index c = 0; c < best_dir.size(); ++c) {
            double w = weights[active[c]] - best_t * best_dir(c);
            if (w > 1e-13) {
                weights[active[c]] = w;
                next.push_back(active[c]);
            } else {
                weights[active[c]] = 0.0;
            }
        }
        if (next.size() == active.size())
            break;  // no progress
        active = std::move(next);
    }
    return active;
}

std::int64_t quantize(double v) {
    return std::llround(v * 1e10);
}

}  // namespace

QuadratureRule caratheodory_reduce(const QuadratureRule& rule, int exactness_order) {
    if (exactness_order < 1)
        throw Error(ErrorCode::invalid_order, "exactness order must be >= 1");
    const int max_degree = 2 * exactness_order - 1;
    const auto monos = monomial_exponents(rule.dim(), max_degree);
    const double input_mismatch = moment_mismatch(rule, max_degree);

    // Group nodes into symmetry orbits: nodes with identical weight and the
    // same multiset of |coordinates| map into each other under sign flips and
    // coordinate permutations, so their weights can stay tied. Asymmetric
    // inputs degenerate to one node per group.
    std::map<std::vector<std::int64_t>, std::vector<std::size_t>> orbit_map;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        std::vector<std::int64_t> key;
        key.reserve(rule.dim() + 1);
        for (double c : rule.node(i))
            key.push_back(quantize(std::abs(c)));
        std::sort(key.begin(), key.end());
        key.push_back(quantize(rule.weight(i) * 100.0));
        orbit_map[key].push_back(i);
    }

    std::vector<std::vector<std::size_t>> orbits;
    orbits.reserve(orbit_map.size());
    for (auto& [key, members] : orbit_map)
        orbits.push_back(std::move(members));

    // Orbit stage: collapsed columns (sum of member node columns).
    std::vector<std::size_t> all_nodes(rule.size());
    for (std::size_t i = 0; i < all_nodes.size(); ++i)
        all_nodes[i] = i;
    Matrix A_nodes = moment_matrix(rule, all_nodes, monos);

    Matrix A_orb(A_nodes.rows(), orbits.size());
    std::vector<double> w_orb(orbits.size());
    std::vector<std::size_t> orbit_sizes(orbits.size());
    for (std::size_t c = 0; c < orbits.size(); ++c) {
        Vector col = Vector::Zero(A_nodes.rows());
        for (std::size_t n : orbits[c])
            col += A_nodes.col(n);
        A_orb.col(c) = col;
        w_orb[c] = rule.weight(orbits[c].front());
        orbit_sizes[c] = orbits[c].size();
    }

    auto kept_orbits = eliminate(A_orb, w_orb, orbit_sizes);

    // Node stage on the survivors.
    std::vector<std::size_t> node_ids;
    std::vector<double> node_w;
    for (std::size_t c : kept_orbits) {
        for (std::size_t n : orbits[c]) {
            node_ids.push_back(n);
            node_w.push_back(w_orb[c]);
        }
    }
    Matrix A_sub(A_nodes.rows(), node_ids.size());
    for (std::size_t c = 0; c < node_ids.size(); ++c)
        A_sub.col(c) = A_nodes.col(node_ids[c]);
    std::vector<std::size_t> ones(node_ids.size(), 1);
    auto kept = eliminate(A_sub, node_w, ones);

    std::vector<double> out_nodes;
    std::vector<double> out_w;
    out_nodes.reserve(kept.size() * rule.dim());
    out_w.reserve(kept.size());
    for (std::size_t c : kept) {
        auto x = rule.node(node_ids[c]);
        out_nodes.insert(out_nodes.end(), x.begin(), x.end());
        out_w.push_back(node_w[c]);
    }
    QuadratureRule reduced(rule.dim(), rule.gh_order(), std::move(out_nodes),
                           std::move(out_w));

    double mismatch = moment_mismatch(reduced, max_degree);
    if (mismatch > std::max(1e-10, 10.0 * input_mismatch))
        throw ReductionError("reduced rule moment mismatch " + std::to_string(mismatch),
                             std::move(reduced));
    return reduced;
}

}  // namespace slhjb
