#pragma once

#include <cstdint>

#include "demine/dataset.hpp"

namespace demine {

struct KsgConfig {
    std::size_t k_neighbors = 3;
    // Seeds the 1e-10 jitter that is only applied when duplicate joint
    // points would make a k-NN radius zero.
    std::uint64_t jitter_seed = 0x6a177e5;
};

// Digamma for x > 0: recurrence up to x >= 10, then the asymptotic series.
double digamma(double x);

// Kraskov-Stoegbauer-Grassberger estimator, first variant, max-norm:
//   psi(k) + psi(n) - mean_i [psi(n_x(i) + 1) + psi(n_z(i) + 1)]
// where n_x(i), n_z(i) count marginal neighbors strictly inside the joint
// k-NN radius. Unclamped, so it can be negative.
double ksg_estimate(const PairedDataset& ds, const KsgConfig& cfg = {});

} // namespace demine
