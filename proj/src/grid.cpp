#include "subwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace subwave {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

} // namespace

Grid1D::Grid1D(std::vector<double> nodes, GridSpacing spacing)
    : nodes_(std::move(nodes)), spacing_(spacing) {}

Grid1D Grid1D::uniform(double a, double b, std::size_t n) {
    require(n >= 2, "Grid1D::uniform: need at least 2 nodes");
    require(a < b, "Grid1D::uniform: need a < b");
    std::vector<double> x(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + h * static_cast<double>(i);
    x.back() = b;
    return Grid1D(std::move(x), GridSpacing::Uniform);
}

Grid1D Grid1D::logarithmic(double a, double b, std::size_t n) {
    require(n >= 2, "Grid1D::logarithmic: need at least 2 nodes");
    require(a > 0.0 && a < b, "Grid1D::logarithmic: need 0 < a < b");
    std::vector<double> x(n);
    const double la = std::log(a), lb = std::log(b);
    const double h = (lb - la) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(la + h * static_cast<double>(i));
    x.front() = a;
    x.back() = b;
    return Grid1D(std::move(x), GridSpacing::Logarithmic);
}

Grid1D Grid1D::from_nodes(std::vector<double> nodes, GridSpacing tag) {
    require(nodes.size() >= 2, "Grid1D::from_nodes: need at least 2 nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) {
            std::ostringstream os;
            os << "Grid1D::from_nodes: nodes not strictly increasing at index " << i;
            throw std::invalid_argument(os.str());
        }
    }
    return Grid1D(std::move(nodes), tag);
}

std::size_t Grid1D::locate(double x) const {
    if (!(x >= nodes_.front())) throw std::invalid_argument("Grid1D::locate: x below grid");
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    if (it == nodes_.begin()) return 0;
    std::size_t j = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    if (j >= nodes_.size() - 1) j = nodes_.size() - 2;
    return j;
}

double integrate_grid(std::span<const double> values, std::span<const double> nodes) {
    if (values.size() != nodes.size())
        throw std::invalid_argument("integrate_grid: values/nodes size mismatch");
    if (nodes.size() < 2)
        throw std::invalid_argument("integrate_grid: need at least 2 nodes");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        acc += 0.5 * (values[i] + values[i + 1]) * (nodes[i + 1] - nodes[i]);
    return acc;
}

double integrate_grid(std::span<const double> values, const Grid1D& grid) {
    return integrate_grid(values, std::span<const double>(grid.nodes()));
}

} // namespace subwave
