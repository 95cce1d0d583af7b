#include "slhjb/interpolation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace slhjb {

namespace {
constexpr int kMaxDim = 16;
}

Grid::Grid(std::vector<GridAxis> axes, Extrapolation mode)
    : axes_(std::move(axes)), mode_(mode) {
    if (axes_.empty() || axes_.size() > kMaxDim)
        throw Error(ErrorCode::configuration, "grid dimension must be in [1, 16]");
    node_count_ = 1;
    for (const auto& ax : axes_) {
        if (!(ax.hi > ax.lo))
            throw Error(ErrorCode::configuration, "grid axis requires hi > lo");
        if (ax.intervals < 1)
            throw Error(ErrorCode::configuration, "grid axis requires >= 1 interval");
        node_count_ *= static_cast<std::size_t>(ax.intervals) + 1;
    }
}

Grid Grid::uniform_1d(double lo, double hi, int intervals, Extrapolation mode) {
    return Grid({GridAxis{lo, hi, intervals}}, mode);
}

void Grid::node_point(std::size_t flat, std::span<double> out) const {
    for (int a = dim() - 1; a >= 0; --a) {
        std::size_t n = static_cast<std::size_t>(axes_[a].intervals) + 1;
        out[a] = node_coord(a, static_cast<int>(flat % n));
        flat /= n;
    }
}

std::size_t Grid::flat_index(std::span<const int> multi) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim(); ++a)
        flat = flat * (static_cast<std::size_t>(axes_[a].intervals) + 1) +
               static_cast<std::size_t>(multi[a]);
    return flat;
}

bool Grid::inside(std::span<const double> x) const {
    for (int a = 0; a < dim(); ++a)
        if (x[a] < axes_[a].lo || x[a] > axes_[a].hi)
            return false;
    return true;
}

namespace {

void check_query(const Grid& grid, std::span<const double> x) {
    if (static_cast<int>(x.size()) != grid.dim())
        throw Error(ErrorCode::invalid_point, "query dimension mismatch");
    for (double c : x)
        if (!std::isfinite(c))
            throw Error(ErrorCode::invalid_point, "non-finite interpolation query");
}

struct CellAxis {
    int j;         // left node of the cell
    double theta;  // local coordinate; outside [0,1] only in linear mode
    std::size_t stride;
};

/// Cell location with clamp semantics (projects onto the box first when
/// requested, otherwise leaves theta unclamped for affine extension).
/// Queries a few ulps from a grid node snap onto it so node exactness holds
/// bit-for-bit, including across nested grids.
void locate_cells(const Grid& grid, std::span<const double> x, bool clamp_query,
                  CellAxis* cells) {
    std::size_t stride = 1;
    for (int a = grid.dim() - 1; a >= 0; --a) {
        const auto& ax = grid.axis(a);
        double u = (x[a] - ax.lo) / ax.spacing();
        const double snapped = std::nearbyint(u);
        if (std::abs(u - snapped) <=
            64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u)))
            u = snapped;
        if (clamp_query)
            u = std::clamp(u, 0.0, static_cast<double>(ax.intervals));
        int j = std::clamp(static_cast<int>(std::floor(u)), 0, ax.intervals - 1);
        cells[a] = {j, u - j, stride};
        stride *= static_cast<std::size_t>(ax.intervals) + 1;
    }
}

}  // namespace

StencilWeights locate(const Grid& grid, std::span<const double> x) {
    check_query(grid, x);
    std::array<CellAxis, kMaxDim> cells;
    locate_cells(grid, x, /*clamp_query=*/true, cells.data());

    const int d = grid.dim();
    StencilWeights out;
    out.entries.reserve(std::size_t{1} << d);
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            bool high = (corner >> a) & 1u;
            w *= high ? cells[a].theta : 1.0 - cells[a].theta;
            flat += (static_cast<std::size_t>(cells[a].j) + (high ? 1 : 0)) *
                    cells[a].stride;
        }
        if (w != 0.0)
            out.entries.push_back({flat, w});
    }
    return out;
}

double interp_multilinear(const Grid& grid, std::span<const double> values,
                          std::span<const double> x, const AsymptoteFn* asymptote,
                          double t) {
    check_query(grid, x);
    const bool in_box = grid.inside(x);
    bool clamp_query = true;
    if (!in_box) {
        switch (grid.extrapolation()) {
            case Extrapolation::clamp:
                break;
            case Extrapolation::linear:
                clamp_query = false;
                break;
            case Extrapolation::payoff_asymptotic:
                if (asymptote == nullptr || !*asymptote)
                    throw Error(ErrorCode::configuration,
                                "payoff_asymptotic extrapolation requires a registered "
                                "asymptote");
                return (*asymptote)(t, x);
        }
    }

    std::array<CellAxis, kMaxDim> cells;
    locate_cells(grid, x, clamp_query, cells.data());
    const int d = grid.dim();
    double acc = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            bool high = (corner >> a) & 1u;
            w *= high ? cells[a].theta : 1.0 - cells[a].theta;
            flat += (static_cast<std::size_t>(cells[a].j) + (high ? 1 : 0)) *
                    cells[a].stride;
        }
        acc += w * values[flat];
    }
    return acc;
}

namespace {

double fc_interior_slope(double d0, double d1) {
    if (d0 == 0.0 || d1 == 0.0 || (d0 > 0) != (d1 > 0))
        return 0.0;
    return 2.0 * d0 * d1 / (d0 + d1);  // harmonic mean (uniform spacing)
}

double fc_endpoint_slope(double d0, double d1) {
    double m = (3.0 * d0 - d1) / 2.0;
    if (m == 0.0 || d0 == 0.0 || (m > 0) != (d0 > 0))
        return 0.0;
    if ((d0 > 0) != (d1 > 0) && std::abs(m) > 3.0 * std::abs(d0))
        return 3.0 * d0;
    return m;
}

}  // namespace

double pchip_slope_at(double spacing, std::span<const double> values, std::size_t j) {
    const std::size_t n = values.size();
    if (n < 2)
        throw Error(ErrorCode::configuration, "pchip requires >= 2 nodes");
    auto secant = [&](std::size_t i) { return (values[i + 1] - values[i]) / spacing; };
    if (n == 2)
        return secant(0);
    if (j == 0)
        return fc_endpoint_slope(secant(0), secant(1));
    if (j == n - 1)
        return fc_endpoint_slope(secant(n - 2), secant(n - 3));
    return fc_interior_slope(secant(j - 1), secant(j));
}

std::vector<double> pchip_slopes(double spacing, std::span<const double> values) {
    std::vector<double> m(values.size());
    for (std::size_t j = 0; j < values.size(); ++j)
        m[j] = pchip_slope_at(spacing, values, j);
    return m;
}

double hermite_cell_eval(double v0, double v1, double m0, double m1, double spacing,
                         double t) {
    double t2 = t * t;
    double t3 = t2 * t;
    return v0 * (2.0 * t3 - 3.0 * t2 + 1.0) + spacing * m0 * (t3 - 2.0 * t2 + t) +
           v1 * (-2.0 * t3 + 3.0 * t2) + spacing * m1 * (t3 - t2);
}

namespace {

/// Recursive tensorized pchip over the local 4-node window per axis.
/// `offset` indexes the already-fixed leading axes. Returns the value at
/// x[axis..]; per-axis out-of-range queries are clamped or linearly extended
/// according to `mode`.
double pchip_rec(const Grid& grid, std::span<const double> values,
                 std::span<const double> x, const CellAxis* cells, int axis,
                 std::size_t offset, Extrapolation mode) {
    if (axis == grid.dim())
        return values[offset];

    const auto& ax = grid.axis(axis);
    const double h = ax.spacing();
    const int J = ax.intervals;
    const CellAxis& cell = cells[axis];
    const int j = cell.j;

    auto line = [&](int i) {
        return pchip_rec(grid, values, x, cells, axis + 1,
                         offset + static_cast<std::size_t>(i) * cell.stride, mode);
    };

    if (J == 1) {
        double v0 = line(0);
        double v1 = line(1);
        double d = (v1 - v0) / h;
        double theta = mode == Extrapolation::linear
                           ? cell.theta
                           : std::clamp(cell.theta, 0.0, 1.0);
        return hermite_cell_eval(v0, v1, d, d, h, theta);
    }

    // window values and secants around cell [j, j+1]
    double g0 = line(j);
    double g1 = line(j + 1);
    double d_mid = (g1 - g0) / h;
    double m0, m1;
    if (j == 0) {
        double g2 = line(2);
        double d1 = (g2 - g1) / h;
        m0 = fc_endpoint_slope(d_mid, d1);
        m1 = (J == 1) ? m0 : fc_interior_slope(d_mid, d1);
    } else {
        double gm1 = line(j - 1);
        double d_prev = (g0 - gm1) / h;
        m0 = fc_interior_slope(d_prev, d_mid);
        if (j + 1 == J) {
            m1 = fc_endpoint_slope(d_mid, d_prev);
        } else {
            double g2 = line(j + 2);
            m1 = fc_interior_slope(d_mid, (g2 - g1) / h);
        }
    }

    double theta = cell.theta;
    if (mode == Extrapolation::linear) {
        // linear extension from the endpoint with the limited endpoint slope
        if (theta < 0.0 && j == 0)
            return g0 + m0 * (theta * h);
        if (theta > 1.0 && j + 1 == J)
            return g1 + m1 * ((theta - 1.0) * h);
    }
    theta = std::clamp(theta, 0.0, 1.0);
    return hermite_cell_eval(g0, g1, m0, m1, h, theta);
}

}  // namespace

double interp_pchip(const Grid& grid, std::span<const double> values,
                    std::span<const double> x, const AsymptoteFn* asymptote, double t) {
    check_query(grid, x);
    const bool in_box = grid.inside(x);
    Extrapolation mode = grid.extrapolation();
    if (!in_box && mode == Extrapolation::payoff_asymptotic) {
        if (asymptote == nullptr || !*asymptote)
            throw Error(ErrorCode::configuration,
                        "payoff_asymptotic extrapolation requires a registered asymptote");
        return (*asymptote)(t, x);
    }

    std::array<CellAxis, kMaxDim> cells;
    locate_cells(grid, x, /*clamp_query=*/mode != Extrapolation::linear, cells.data());
    return pchip_rec(grid, values, x, cells.data(), 0, 0, mode);
}

}  // namespace slhjb
