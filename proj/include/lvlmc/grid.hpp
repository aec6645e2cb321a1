#pragma once

#include <array>
#include <vector>

#include "lvlmc/errors.hpp"
#include "lvlmc/neighborhood.hpp"

namespace lvlmc {

/// Regular 3-d lattice. Node order is GSLIB-style: x fastest, then y, then z.
struct Grid {
    Point3 origin{0.0, 0.0, 0.0};
    Point3 spacing{1.0, 1.0, 1.0};
    std::array<int, 3> counts{1, 1, 1};

    int size() const { return counts[0] * counts[1] * counts[2]; }

    int index(int i, int j, int k) const {
        return i + counts[0] * (j + counts[1] * k);
    }

    Point3 node(int flat) const {
        const int i = flat % counts[0];
        const int j = (flat / counts[0]) % counts[1];
        const int k = flat / (counts[0] * counts[1]);
        return {origin[0] + i * spacing[0], origin[1] + j * spacing[1],
                origin[2] + k * spacing[2]};
    }

    std::vector<Point3> nodes() const {
        std::vector<Point3> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (int flat = 0; flat < size(); ++flat) out.push_back(node(flat));
        return out;
    }

    void validate() const {
        for (int c : counts)
            if (c < 1) throw InvariantError("Grid: node counts must be positive");
        for (double s : spacing)
            if (!(s > 0.0)) throw InvariantError("Grid: spacing must be positive");
    }
};

}  // namespace lvlmc
