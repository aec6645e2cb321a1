#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "lvlmc/errors.hpp"

namespace lvlmc {

using Point3 = std::array<double, 3>;

inline double squared_distance(const Point3& a, const Point3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

struct Neighbor {
    int id = -1;
    double distance = 0.0;
};

/// k-NN and radius queries come with a warning flag when the request had to
/// be capped at the number of indexed points.
struct KnnResult {
    std::vector<Neighbor> neighbors;
    bool capped = false;
};

/// Exact 3-d nearest-neighbor index (median-split kd-tree). Results are
/// identical to a brute-force scan, with ties broken by ascending id.
/// Immutable after construction; concurrent queries are safe.
class SpatialIndex {
public:
    explicit SpatialIndex(std::vector<Point3> locations);

    std::size_t size() const { return points_.size(); }
    const Point3& location(int id) const { return points_[static_cast<std::size_t>(id)]; }

    /// k nearest by Euclidean distance, ascending, ties by lowest id.
    KnnResult knn(const Point3& query, int k) const;

    /// All points within `radius`, nearest first, optionally capped to the
    /// `max_results` closest.
    std::vector<Neighbor> radius(const Point3& query, double radius,
                                 int max_results = -1) const;

private:
    struct Node {
        int axis = -1;       // -1 marks a leaf
        double split = 0.0;
        int left = -1;
        int right = -1;
        int begin = 0;       // leaf payload range into order_
        int end = 0;
    };

    int build(int begin, int end, int depth);

    std::vector<Point3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace lvlmc
