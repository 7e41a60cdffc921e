#pragma once

#include <Eigen/Core>
#include <vector>

#include "minplus/errors.hpp"

namespace minplus {

using Vec = Eigen::VectorXd;

/// Axis-aligned box centered on the current estimate, with the partition
/// and sampling parameters used for majorant fitting and grid scans.
/// Along each partitioned dimension the box splits into `partitions`
/// uniform sub-intervals, each sampled at `samples_per_partition`
/// uniformly spaced points including both endpoints.
class Window {
public:
    Window(Vec center, Vec half_width, int partitions, int samples_per_partition);

    int dim() const { return static_cast<int>(center_.size()); }
    const Vec& center() const { return center_; }
    const Vec& half_width() const { return half_width_; }
    int partitions() const { return partitions_; }
    int samples_per_partition() const { return samples_; }

    Vec lo() const { return center_ - half_width_; }
    Vec hi() const { return center_ + half_width_; }
    bool contains(const Vec& x) const;

    Window recentered(const Vec& new_center) const;

    // Union of all sub-interval sample grids along dimension d:
    // partitions*(samples_per_partition-1)+1 uniform points, endpoints
    // included, shared sub-interval endpoints deduplicated.
    std::vector<double> axis_samples(int d) const;

    // Tensor grid of axis_samples over every dimension, lexicographic with
    // the last dimension varying fastest.
    std::vector<Vec> full_grid() const;

    // Tensor grid restricted to `dims`; the remaining coordinates stay at
    // the window center.
    std::vector<Vec> grid_over(const std::vector<int>& dims) const;

private:
    Vec center_;
    Vec half_width_;
    int partitions_;
    int samples_;
};

}  // namespace minplus
