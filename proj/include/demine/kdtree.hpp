#pragma once

#include <cstddef>
#include <vector>

#include "demine/matrix.hpp"

namespace demine {

// Static k-d tree over the rows of a matrix under the max-norm (Chebyshev)
// distance. Holds a copy of the points.
class KdTree {
public:
    explicit KdTree(Matrix points, std::size_t leaf_size = 16);

    std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
    const Matrix& points() const { return points_; }

    // Distance from point `self` to its k-th nearest other point.
    double kth_neighbor_distance(std::size_t self, std::size_t k) const;

    // Number of points j != self with max-norm distance strictly below radius.
    std::size_t count_within(std::size_t self, double radius) const;

private:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        int split_dim = -1; // -1 marks a leaf
        double split_value = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
    };

    std::size_t build(std::size_t begin, std::size_t end);
    double distance(std::size_t a, std::size_t b) const;

    Matrix points_;
    std::size_t leaf_size_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

} // namespace demine
