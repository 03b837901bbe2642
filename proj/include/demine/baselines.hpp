#pragma once

#include <cstdint>

#include "demine/estimator.hpp"
#include "demine/ksg.hpp"

namespace demine {

struct EarlyStopPolicy {
    std::size_t max_iterations = 100; // copied from a reference DEMINE config
};

// Trains on every sample and reports the MINE-f bound on those same samples.
// No valid confidence interval exists for this estimate, so epsilon and the
// verdict are left empty.
EstimateReport mine_f_es(const PairedDataset& ds, TrainConfig cfg, EarlyStopPolicy stop, std::uint64_t seed);

// KSG wrapped as a report (no interval).
EstimateReport ksg_report(const PairedDataset& ds, const KsgConfig& cfg = {});

} // namespace demine
