#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "demine/meta.hpp"
#include "demine/search.hpp"
#include "demine/synthetic.hpp"

namespace demine {

struct DatasetSource {
    enum class Kind { gaussian, sine, csv };
    Kind kind = Kind::gaussian;
    GaussianSpec gaussian;
    SineSpec sine;
    std::filesystem::path path;
};

// Everything needed to rerun one `estimate` invocation.
struct ExperimentConfig {
    DatasetSource dataset;
    std::string method = "demine"; // demine, meta-demine, mine-f-es, ksg
    TrainConfig train;
    std::optional<SearchCriterion> search; // when set, train is replaced by the search winner
    std::size_t search_budget = 50;
    bool paper_scale = false;
    MetaConfig meta;
    double delta = 0.05;
    std::vector<std::uint64_t> seeds{0};
    std::optional<std::filesystem::path> output;
};

void validate(const ExperimentConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

PairedDataset load_dataset(const DatasetSource& src);

// One report per seed, in seed order.
std::vector<EstimateReport> run_experiment(const ExperimentConfig& cfg);

} // namespace demine
