#ifndef SLHJB_INTERPOLATION_HPP
#define SLHJB_INTERPOLATION_HPP

/// Spatial interpolation on uniform rectangular grids: multilinear (monotone)
/// and monotonicity-preserving cubic (Fritsch-Carlson), plus the grid type
/// and its out-of-box extrapolation policy.

#include "slhjb/errors.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace slhjb {

enum class Extrapolation {
    clamp,              // project the query onto the grid box
    linear,             // extend the boundary cell gradient
    payoff_asymptotic,  // evaluate a registered analytic asymptote
};

struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    int intervals = 1;  // J; nodes are lo + m * spacing() for m = 0..J

    double spacing() const { return (hi - lo) / intervals; }
};

class Grid {
public:
    Grid() = default;
    Grid(std::vector<GridAxis> axes, Extrapolation mode = Extrapolation::clamp);
    static Grid uniform_1d(double lo, double hi, int intervals,
                           Extrapolation mode = Extrapolation::clamp);

    int dim() const noexcept { return static_cast<int>(axes_.size()); }
    const GridAxis& axis(int a) const { return axes_[a]; }
    Extrapolation extrapolation() const noexcept { return mode_; }
    void set_extrapolation(Extrapolation mode) noexcept { mode_ = mode; }

    std::size_t node_count() const noexcept { return node_count_; }
    double node_coord(int axis, int index) const {
        return axes_[axis].lo + index * axes_[axis].spacing();
    }
    /// Coordinates of the node with row-major flat index.
    void node_point(std::size_t flat, std::span<double> out) const;
    std::size_t flat_index(std::span<const int> multi) const;
    bool inside(std::span<const double> x) const;

private:
    std::vector<GridAxis> axes_;
    Extrapolation mode_ = Extrapolation::clamp;
    std::size_t node_count_ = 0;
};

/// Nonnegative convex stencil for a query point: grid flat indices and
/// barycentric weights (zero-weight corners dropped).
struct StencilWeights {
    struct Entry {
        std::size_t index;
        double weight;
    };
    std::vector<Entry> entries;
};

/// Multilinear stencil of x. Queries outside the box are projected onto it
/// first (clamp semantics); linear / payoff_asymptotic extrapolation does not
/// route through here.
StencilWeights locate(const Grid& grid, std::span<const double> x);

using AsymptoteFn = std::function<double(double t, std::span<const double> x)>;

/// Multilinear interpolation of nodal `values` at x. Out-of-box queries
/// follow grid.extrapolation(); payoff_asymptotic requires `asymptote`
/// (evaluated at time `t`) and throws a configuration error without one.
double interp_multilinear(const Grid& grid, std::span<const double> values,
                          std::span<const double> x,
                          const AsymptoteFn* asymptote = nullptr, double t = 0.0);

/// Fritsch-Carlson limited slopes for pchip on a uniform 1-D grid.
std::vector<double> pchip_slopes(double spacing, std::span<const double> values);

/// The slope at node j, from its local 3-point window (identical to
/// pchip_slopes(...)[j]).
double pchip_slope_at(double spacing, std::span<const double> values, std::size_t j);

/// Cubic Hermite value on cell [j, j+1] at local parameter t in [0, 1].
double hermite_cell_eval(double v0, double v1, double m0, double m1, double spacing,
                         double t);

/// Monotonicity-preserving cubic interpolation, tensorized axis-by-axis for
/// dim > 1. Extrapolation handled as in interp_multilinear (linear mode uses
/// the limited endpoint slope).
double interp_pchip(const Grid& grid, std::span<const double> values,
                    std::span<const double> x,
                    const AsymptoteFn* asymptote = nullptr, double t = 0.0);

}  // namespace slhjb

#endif  // SLHJB_INTERPOLATION_HPP
