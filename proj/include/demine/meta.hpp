#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "demine/estimator.hpp"
#include "demine/transform.hpp"

namespace demine {

enum class MetaOptimizer { pepg, bptt_first_order };

std::string to_string(MetaOptimizer o);
MetaOptimizer parse_meta_optimizer(const std::string& s);

struct MetaConfig {
    std::size_t outer_iterations = 3000;  // N_M
    std::size_t tasks_per_iteration = 1;  // N_T
    double meta_train_fraction = 0.8;     // r
    std::optional<double> eta_meta;       // defaults to base learning rate / 3
    std::optional<std::size_t> inner_steps; // defaults to min(base iterations, inner_cap)
    std::size_t inner_cap = 30;
    MetaOptimizer optimizer = MetaOptimizer::pepg;
    std::string augmentation = "m(P(O(\xC2\xB7)))";
    std::size_t population = 32; // PEPG perturbation pairs
    double sigma_init = 0.02;

    double meta_step(const TrainConfig& base) const;
    std::size_t adaptation_steps(const TrainConfig& base) const;
};

void validate(const MetaConfig& cfg);
nlohmann::json to_json(const MetaConfig& cfg);
MetaConfig meta_config_from_json(const nlohmann::json& j, MetaConfig defaults = {});

// One meta-learning task: disjoint splits A and B of the training data, both
// passed through the same random invertible transform.
struct MetaTask {
    PairedDataset meta_train;
    PairedDataset meta_val;
    TaskTransform transform;
};

MetaTask make_task(const PairedDataset& train, double fraction, const std::string& mode, std::uint64_t seed);
std::vector<MetaTask> make_tasks(const PairedDataset& train, const MetaConfig& cfg, std::uint64_t seed);

// `steps` full-split Adam iterations on the MINE-f loss starting from `init`;
// the optimizer state starts fresh for every call.
Critic meta_train_inner(const Critic& init, const PairedDataset& task_data, double eta, std::size_t steps);

// Mean over tasks of the loss on B after adapting on A.
double meta_objective(const Critic& init, const std::vector<MetaTask>& tasks, double eta, std::size_t steps);

// Learns an initialization for the critic from augmented tasks drawn from
// `train`. Starts from initial_critic(base).
Critic meta_optimize(const PairedDataset& train, const MetaConfig& cfg, const TrainConfig& base, std::uint64_t seed);

// Same split and evaluation as demine_estimate; the critic is trained by
// train_critic(train, base_cfg) starting from the meta-learned initialization.
EstimateReport meta_demine_estimate(const PairedDataset& ds, const TrainConfig& base_cfg, const MetaConfig& meta_cfg,
                                    double delta);

} // namespace demine
