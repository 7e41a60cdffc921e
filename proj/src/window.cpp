#include "minplus/window.hpp"

#include <string>

namespace minplus {

Window::Window(Vec center, Vec half_width, int partitions, int samples_per_partition)
    : center_(std::move(center)),
      half_width_(std::move(half_width)),
      partitions_(partitions),
      samples_(samples_per_partition) {
    if (center_.size() != half_width_.size()) {
        throw DimensionMismatch("window center/half_width length mismatch");
    }
    if ((half_width_.array() <= 0.0).any()) {
        throw std::invalid_argument("window half_width must be positive componentwise");
    }
    if (partitions_ < 1) {
        throw std::invalid_argument("window partitions must be >= 1");
    }
    if (samples_ < 3) {
        // A quadratic has three coefficients per 1D fit.
        throw std::invalid_argument("window samples_per_partition must be >= 3");
    }
}

bool Window::contains(const Vec& x) const {
    if (x.size() != center_.size()) {
        throw DimensionMismatch("point dimension " + std::to_string(x.size()) +
                                " does not match window dimension " + std::to_string(center_.size()));
    }
    return ((x - lo()).array() >= 0.0).all() && ((hi() - x).array() >= 0.0).all();
}

Window Window::recentered(const Vec& new_center) const {
    return Window(new_center, half_width_, partitions_, samples_);
}

std::vector<double> Window::axis_samples(int d) const {
    const int count = partitions_ * (samples_ - 1) + 1;
    const double a = center_(d) - half_width_(d);
    const double b = center_(d) + half_width_(d);
    std::vector<double> pts(count);
    for (int i = 0; i < count; ++i) {
        pts[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    pts.back() = b;
    return pts;
}

std::vector<Vec> Window::full_grid() const {
    std::vector<int> dims(dim());
    for (int d = 0; d < dim(); ++d) dims[d] = d;
    return grid_over(dims);
}

std::vector<Vec> Window::grid_over(const std::vector<int>& dims) const {
    std::vector<std::vector<double>> axes;
    axes.reserve(dims.size());
    std::size_t total = 1;
    for (int d : dims) {
        axes.push_back(axis_samples(d));
        total *= axes.back().size();
    }
    std::vector<Vec> grid;
    grid.reserve(total);
    std::vector<std::size_t> idx(dims.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vec x = center_;
        std::size_t rem = flat;
        // Last listed dimension varies fastest.
        for (std::size_t k = dims.size(); k-- > 0;) {
            idx[k] = rem % axes[k].size();
            rem /= axes[k].size();
        }
        for (std::size_t k = 0; k < dims.size(); ++k) {
            x(dims[k]) = axes[k][idx[k]];
        }
        grid.push_back(std::move(x));
    }
    return grid;
}

}  // namespace minplus
