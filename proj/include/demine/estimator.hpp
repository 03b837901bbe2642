#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "demine/critic.hpp"
#include "demine/dataset.hpp"
#include "demine/report.hpp"

namespace demine {

// Critic shape plus optimization settings for one training run.
struct TrainConfig {
    std::size_t encoder_layers = 2;
    std::size_t hidden = 64;
    double learning_rate = 1e-2;
    std::size_t iterations = 100; // N_O
    std::size_t batch = 256;
    double M = 1.0;
    double t = 0.0;
    std::uint64_t seed = 0;

    ScoreRange score_range() const { return {-M * (1.0 + t), M * (1.0 - t)}; }
};

void validate(const TrainConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

// Freshly initialized critic for the data dimensions, seeded from cfg.seed.
Critic initial_critic(std::size_t x_dim, std::size_t z_dim, const TrainConfig& cfg);

// cfg.iterations Adam steps on the MINE-f loss; each step uses `batch`
// distinct rows drawn uniformly (capped at the set size). Starts from `init`
// when given, otherwise from initial_critic. Only rows of `train` are ever
// touched. Throws TrainingError on a non-finite loss.
Critic train_critic(const PairedDataset& train, const TrainConfig& cfg, std::optional<Critic> init = std::nullopt);

// MINE-f estimate over all n^2 validation pairs, computed in row blocks.
double mine_f_on(const Critic& c, const PairedDataset& data);

// Evaluates a trained critic on validation data and attaches the
// (1 - delta) interval for its score range.
EstimateReport evaluate_critic(const Critic& c, const PairedDataset& val, double delta, std::size_t n_train);

// 50/50 split, train on the first half, estimate on the second.
EstimateReport demine_estimate(const PairedDataset& ds, const TrainConfig& cfg, double delta);

// Seed of the train/validation split used by demine_estimate and meta_demine_estimate.
std::uint64_t split_seed(const TrainConfig& cfg);

} // namespace demine
