#include "demine/ksg.hpp"

#include <cmath>
#include <algorithm>
#include <iostream>
#include <memory>
#include <random>
#include <vector>

#include "demine/errors.hpp"
#include "demine/kdtree.hpp"
#include "demine/parallel.hpp"
#include "demine/rng.hpp"

namespace demine {

double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("digamma needs a finite x > 0");
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    return acc + std::log(x) - 0.5 * inv - series;
}

namespace {

struct Radii {
    std::vector<double> eps;
    bool degenerate = false;
};

Radii joint_radii(const KdTree& joint, std::size_t k) {
    Radii r;
    r.eps.resize(joint.size());
    parallel_for(joint.size(), worker_count(), [&](std::size_t i) { r.eps[i] = joint.kth_neighbor_distance(i, k); });
    for (double e : r.eps)
        if (e <= 0.0) r.degenerate = true;
    return r;
}

Matrix joined(const Matrix& x, const Matrix& z) {
    Matrix j(x.rows(), x.cols() + z.cols());
    j << x, z;
    return j;
}

} // namespace

double ksg_estimate(const PairedDataset& input, const KsgConfig& cfg) {
    validate(input);
    const std::size_t n = input.size();
    const std::size_t k = cfg.k_neighbors;
    if (k < 1) throw InputError("KSG needs k >= 1");
    if (n <= k) throw InputError("KSG needs more samples (" + std::to_string(n) + ") than neighbors (" +
                                 std::to_string(k) + ")");

    Matrix x = input.x;
    Matrix z = input.z;
    auto joint = std::make_unique<KdTree>(joined(x, z));
    Radii radii = joint_radii(*joint, k);
    if (radii.degenerate) {
        std::cerr << "warning: KSG found duplicate joint points; applying 1e-10 jitter\n";
        Rng rng(cfg.jitter_seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (Matrix* m : {&x, &z})
            for (Eigen::Index i = 0; i < m->size(); ++i) {
                double& v = m->data()[i];
                v += 1e-10 * std::max(1.0, std::abs(v)) * u(rng);
            }
        joint = std::make_unique<KdTree>(joined(x, z));
        radii = joint_radii(*joint, k);
        if (radii.degenerate) throw InputError("KSG radius is zero even after jitter");
    }
    joint.reset();

    const KdTree tx(std::move(x));
    const KdTree tz(std::move(z));
    std::vector<double> terms(n);
    parallel_for(n, worker_count(), [&](std::size_t i) {
        const auto nx = static_cast<double>(tx.count_within(i, radii.eps[i]));
        const auto nz = static_cast<double>(tz.count_within(i, radii.eps[i]));
        terms[i] = digamma(nx + 1.0) + digamma(nz + 1.0);
    });
    double mean = 0.0;
    for (double t : terms) mean += t;
    mean /= static_cast<double>(n);
    return digamma(static_cast<double>(k)) + digamma(static_cast<double>(n)) - mean;
}

} // namespace demine
