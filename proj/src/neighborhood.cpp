#include "lvlmc/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace lvlmc {

namespace {
constexpr int kLeafSize = 16;

struct HeapEntry {
    double distance_sq;
    int id;
    // max-heap on (distance, id): the worst kept neighbor sits on top
    bool operator<(const HeapEntry& other) const {
        if (distance_sq != other.distance_sq) return distance_sq < other.distance_sq;
        return id < other.id;
    }
};
}  // namespace

SpatialIndex::SpatialIndex(std::vector<Point3> locations) : points_(std::move(locations)) {
    if (points_.empty()) throw InvariantError("SpatialIndex: no locations");
    for (const auto& point : points_)
        for (double c : point)
            if (!std::isfinite(c)) throw InvariantError("SpatialIndex: non-finite coordinate");
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
    nodes_.reserve(2 * points_.size() / kLeafSize + 4);
    root_ = build(0, static_cast<int>(points_.size()), 0);
}

int SpatialIndex::build(int begin, int end, int depth) {
    Node node;
    if (end - begin <= kLeafSize) {
        node.begin = begin;
        node.end = end;
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }
    const int axis = depth % 3;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         const double ca = points_[static_cast<std::size_t>(a)][static_cast<std::size_t>(axis)];
                         const double cb = points_[static_cast<std::size_t>(b)][static_cast<std::size_t>(axis)];
                         if (ca != cb) return ca < cb;
                         return a < b;
                     });
    node.axis = axis;
    node.split = points_[static_cast<std::size_t>(order_[static_cast<std::size_t>(mid)])]
                        [static_cast<std::size_t>(axis)];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

KnnResult SpatialIndex::knn(const Point3& query, int k) const {
    KnnResult result;
    if (k < 1) throw InvariantError("knn: k must be at least 1");
    if (k > static_cast<int>(points_.size())) {
        k = static_cast<int>(points_.size());
        result.capped = true;
    }

    std::priority_queue<HeapEntry> heap;  // keeps the k best under (d, id) order

    auto consider = [&](int id) {
        const double d2 = squared_distance(points_[static_cast<std::size_t>(id)], query);
        const HeapEntry entry{d2, id};
        if (static_cast<int>(heap.size()) < k) {
            heap.push(entry);
        } else if (entry < heap.top()) {
            heap.pop();
            heap.push(entry);
        }
    };

    // Iterative depth-first descent, nearer child first.
    std::vector<int> stack = {root_};
    while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        if (idx < 0) continue;
        const Node& node = nodes_[static_cast<std::size_t>(idx)];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i)
                consider(order_[static_cast<std::size_t>(i)]);
            continue;
        }
        const double diff = query[static_cast<std::size_t>(node.axis)] - node.split;
        const int near = diff < 0.0 ? node.left : node.right;
        const int far = diff < 0.0 ? node.right : node.left;
        // prune the far side only when the worst kept distance beats the plane
        if (static_cast<int>(heap.size()) < k || diff * diff <= heap.top().distance_sq)
            stack.push_back(far);
        stack.push_back(near);
    }

    result.neighbors.resize(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
        result.neighbors[i] = {heap.top().id, std::sqrt(heap.top().distance_sq)};
        heap.pop();
    }
    return result;
}

std::vector<Neighbor> SpatialIndex::radius(const Point3& query, double radius,
                                           int max_results) const {
    if (!(radius >= 0.0)) throw InvariantError("radius query: negative radius");
    const double r2 = radius * radius;
    std::vector<HeapEntry> found;

    std::vector<int> stack = {root_};
    while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        if (idx < 0) continue;
        const Node& node = nodes_[static_cast<std::size_t>(idx)];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int id = order_[static_cast<std::size_t>(i)];
                const double d2 = squared_distance(points_[static_cast<std::size_t>(id)], query);
                if (d2 <= r2) found.push_back({d2, id});
            }
            continue;
        }
        const double diff = query[static_cast<std::size_t>(node.axis)] - node.split;
        const int near = diff < 0.0 ? node.left : node.right;
        const int far = diff < 0.0 ? node.right : node.left;
        if (diff * diff <= r2) stack.push_back(far);
        stack.push_back(near);
    }

    std::sort(found.begin(), found.end());
    if (max_results >= 0 && static_cast<int>(found.size()) > max_results)
        found.resize(static_cast<std::size_t>(max_results));
    std::vector<Neighbor> result(found.size());
    for (std::size_t i = 0; i < found.size(); ++i)
        result[i] = {found[i].id, std::sqrt(found[i].distance_sq)};
    return result;
}

}  // namespace lvlmc
