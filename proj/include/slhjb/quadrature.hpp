#ifndef SLHJB_QUADRATURE_HPP
#define SLHJB_QUADRATURE_HPP

/// Gauss-Hermite quadrature normalized for the standard Gaussian measure:
/// nodes xi_i = sqrt(2) z_i and weights lambda_i = omega_i / sqrt(pi), where
/// z_i are the zeros of the physicists' Hermite polynomial H_M. Includes
/// tensorization for p-dimensional noise and nonnegative Caratheodory node
/// reduction.

#include "slhjb/errors.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace slhjb {

class QuadratureRule {
public:
    /// flat_nodes holds size() * dim coordinates, node-major.
    QuadratureRule(int dim, int gh_order, std::vector<double> flat_nodes,
                   std::vector<double> weights);

    int dim() const noexcept { return dim_; }
    int gh_order() const noexcept { return gh_order_; }
    std::size_t size() const noexcept { return weights_.size(); }

    std::span<const double> node(std::size_t i) const {
        return {nodes_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    /// First coordinate of node i; the whole node for dim 1 rules.
    double node1d(std::size_t i) const { return nodes_[i * dim_]; }
    double weight(std::size_t i) const { return weights_[i]; }

    const std::vector<double>& flat_nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    int dim_;
    int gh_order_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// M-point rule exact for polynomials of degree <= 2M-1 against N(0,1).
/// Nodes sorted ascending. Requires 2 <= order <= 64.
QuadratureRule hermite_rule(int order);

/// Tensor product of a 1-D rule across `dim` coordinates; node count
/// M^dim must not exceed `node_cap`.
QuadratureRule tensor_rule(const QuadratureRule& base, int dim,
                           std::size_t node_cap = 1000000);

/// Standard Gaussian moment of the monomial x^beta: prod_j (beta_j - 1)!!
/// for even beta_j, zero if any beta_j is odd.
double gaussian_moment(std::span<const int> beta);
double gaussian_moment(int beta);

/// Multi-index exponents of all monomials in `dim` variables with total
/// degree <= max_degree, in graded lexicographic order.
std::vector<std::vector<int>> monomial_exponents(int dim, int max_degree);

/// Elimination went numerically singular; carries the best rule reached.
class ReductionError : public Error {
public:
    ReductionError(const std::string& message, QuadratureRule partial)
        : Error(ErrorCode::reduction_failed, message), partial_(std::move(partial)) {}

    const QuadratureRule& partial_rule() const noexcept { return partial_; }

private:
    QuadratureRule partial_;
};

/// Caratheodory node reduction: returns a rule supported on a subset of the
/// input nodes with nonnegative weights that matches every Gaussian moment of
/// total degree <= 2*exactness_order - 1 reproduced by the input.
///
/// Null-space elimination over the moment matrix, run first on symmetry
/// orbits of the node set (sign flips and coordinate permutations leave
/// tensor Gauss-Hermite rules invariant, so whole orbits drop at once) and
/// then on individual nodes until the active columns are linearly
/// independent.
QuadratureRule caratheodory_reduce(const QuadratureRule& rule, int exactness_order);

double integrate(const QuadratureRule& rule,
                 const std::function<double(std::span<const double>)>& f);
double integrate(const QuadratureRule& rule, const std::function<double(double)>& f);

/// Max over monomials of total degree <= max_degree of the rule-vs-Gaussian
/// moment mismatch, scaled by max(1, |moment|).
double moment_mismatch(const QuadratureRule& rule, int max_degree);

}  // namespace slhjb

#endif  // SLHJB_QUADRATURE_HPP
