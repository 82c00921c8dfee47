#pragma once

// One-dimensional node sets and trapezoid quadrature.  Grids are immutable
// after construction; every consumer shares them read-only.

#include <cstddef>
#include <span>
#include <vector>

namespace subwave {

enum class GridSpacing {
    Uniform,
    Logarithmic, // geometric node progression in the grid variable
};

class Grid1D {
public:
    // n >= 2 equally spaced nodes on [a, b], a < b.
    static Grid1D uniform(double a, double b, std::size_t n);
    // n >= 2 geometrically spaced nodes on [a, b], 0 < a < b.
    static Grid1D logarithmic(double a, double b, std::size_t n);
    // Adopts an externally built strictly increasing node set.  `tag`
    // records which spacing rule produced it (a graded grid built in a
    // transformed variable is tagged Logarithmic and documented by its
    // producer).
    static Grid1D from_nodes(std::vector<double> nodes, GridSpacing tag);

    const std::vector<double>& nodes() const { return nodes_; }
    GridSpacing spacing() const { return spacing_; }
    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    double front() const { return nodes_.front(); }
    double back() const { return nodes_.back(); }
    // Spacing of a uniform grid (first gap for non-uniform ones).
    double step() const { return nodes_[1] - nodes_[0]; }

    // Largest index j with nodes[j] <= x (nodes[0] <= x required); the
    // usual bracketing primitive for interpolation.
    std::size_t locate(double x) const;

private:
    Grid1D(std::vector<double> nodes, GridSpacing spacing);
    std::vector<double> nodes_;
    GridSpacing spacing_;
};

// Composite trapezoid rule of `values` sampled on `grid`.  Exact for
// piecewise-linear integrands; second-order for smooth ones (on both
// uniform and geometric grids).  Sizes must match.
double integrate_grid(std::span<const double> values, const Grid1D& grid);
double integrate_grid(std::span<const double> values, std::span<const double> nodes);

} // namespace subwave
