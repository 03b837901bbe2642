#include "demine/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "demine/errors.hpp"

namespace demine {

KdTree::KdTree(Matrix points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    order_.resize(size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (size() > 0) {
        nodes_.reserve(2 * size() / leaf_size_ + 2);
        build(0, size());
    }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    int best_dim = 0;
    double best_spread = -1.0;
    for (Eigen::Index d = 0; d < points_.cols(); ++d) {
        double lo = points_(static_cast<Eigen::Index>(order_[begin]), d);
        double hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            const double v = points_(static_cast<Eigen::Index>(order_[i]), d);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = static_cast<int>(d);
        }
    }
    if (best_spread <= 0.0) return id; // all points identical: keep as a leaf

    const std::size_t mid = begin + (end - begin) / 2;
    auto coord = [&](std::size_t idx) { return points_(static_cast<Eigen::Index>(idx), best_dim); };
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return coord(a) < coord(b); });
    const double split = coord(order_[mid]);
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].split_dim = best_dim;
    nodes_[id].split_value = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double KdTree::distance(std::size_t a, std::size_t b) const {
    return (points_.row(static_cast<Eigen::Index>(a)) - points_.row(static_cast<Eigen::Index>(b)))
        .cwiseAbs()
        .maxCoeff();
}

double KdTree::kth_neighbor_distance(std::size_t self, std::size_t k) const {
    if (k == 0 || k >= size()) throw InputError("k-th neighbor needs 1 <= k < n");
    std::priority_queue<double> best; // max-heap of the k smallest distances
    const auto q = points_.row(static_cast<Eigen::Index>(self));

    auto visit = [&](auto&& self_ref, std::size_t id) -> void {
        const Node& node = nodes_[id];
        if (node.split_dim < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t j = order_[i];
                if (j == self) continue;
                const double d = distance(self, j);
                if (best.size() < k) {
                    best.push(d);
                } else if (d < best.top()) {
                    best.pop();
                    best.push(d);
                }
            }
            return;
        }
        const double diff = q[node.split_dim] - node.split_value;
        const std::size_t near = diff < 0 ? node.left : node.right;
        const std::size_t far = diff < 0 ? node.right : node.left;
        self_ref(self_ref, near);
        if (best.size() < k || std::abs(diff) < best.top()) self_ref(self_ref, far);
    };
    visit(visit, 0);
    return best.top();
}

std::size_t KdTree::count_within(std::size_t self, double radius) const {
    const auto q = points_.row(static_cast<Eigen::Index>(self));
    std::size_t count = 0;
    auto visit = [&](auto&& self_ref, std::size_t id) -> void {
        const Node& node = nodes_[id];
        if (node.split_dim < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t j = order_[i];
                if (j != self && distance(self, j) < radius) ++count;
            }
            return;
        }
        const double qv = q[node.split_dim];
        if (qv - radius < node.split_value) self_ref(self_ref, node.left);
        if (qv + radius > node.split_value) self_ref(self_ref, node.right);
    };
    if (!nodes_.empty()) visit(visit, 0);
    return count;
}

} // namespace demine
