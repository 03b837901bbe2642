#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "demine/dataset.hpp"
#include "demine/estimator.hpp"

namespace demine {

// Selection objective over k-fold CV estimates:
//   vr  : mu - 2 sigma / sqrt(folds)
//   sig : mu - eps(L, U, held-out fold size, delta)
struct SearchCriterion {
    enum class Mode { vr, sig };
    Mode mode = Mode::vr;
    std::size_t folds = 3;
    double delta = 0.05;
};

std::string to_string(SearchCriterion::Mode m);
SearchCriterion::Mode parse_search_mode(const std::string& s);

// Ranges sampled by random search. lr, iterations and M are log-uniform,
// the rest uniform.
struct SearchSpace {
    std::size_t layers_min = 1, layers_max = 5;
    std::size_t hidden_min = 8, hidden_max = 256;
    double lr_min = 1e-4, lr_max = 3e-1;
    std::size_t iterations_min = 5, iterations_max = 200;
    std::size_t batch_min = 256, batch_max = 1024;
    double M_min = 1e-3, M_max = 5.0;
    double t_min = -1.0, t_max = 1.0;

    // Full published ranges (iterations up to 5000 for the sine task).
    static SearchSpace paper(bool sine = false);
    // Same ranges with narrower encoders, sized for a single-core budget.
    static SearchSpace desk(bool sine = false);
};

void validate(const SearchSpace& s);
nlohmann::json to_json(const SearchSpace& s);
SearchSpace search_space_from_json(const nlohmann::json& j, SearchSpace defaults);

TrainConfig sample_config(const SearchSpace& space, Rng& rng);

struct SearchTrial {
    TrainConfig config;
    std::vector<double> fold_estimates;
    double mu = 0.0;
    double sigma = 0.0; // sample std over folds
    double score = 0.0;
};

struct SearchResult {
    TrainConfig best;
    std::size_t best_index = 0;
    std::vector<SearchTrial> trials;
};

// Seeded fold assignment: shuffled rows cut into `folds` contiguous parts.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t folds, std::uint64_t seed);

// Cross-validated score of one config on the training split only.
SearchTrial evaluate_trial(const PairedDataset& train, const TrainConfig& cfg, const SearchCriterion& criterion,
                           std::uint64_t fold_seed);

// Random search with `budget` trials; returns the argmax (first on ties).
// Trials run on worker_count() threads; the result does not depend on it.
SearchResult hyperparameter_search(const PairedDataset& train, const SearchCriterion& criterion,
                                   const SearchSpace& space, std::size_t budget, std::uint64_t seed);

// Splits `ds` the way demine_estimate does for `seed`, searches on the
// training half only, and returns the result with best.seed set to `seed`.
SearchResult search_on_train_split(const PairedDataset& ds, const SearchCriterion& criterion,
                                   const SearchSpace& space, std::size_t budget, std::uint64_t seed);

// One row per trial: config + fold estimates + score.
void write_trace_csv(const SearchResult& result, std::ostream& out);

} // namespace demine
