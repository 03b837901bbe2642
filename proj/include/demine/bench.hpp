#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "demine/report.hpp"

namespace demine {

inline constexpr std::size_t kDeskSearchBudget = 50;
inline constexpr std::size_t kDeskMetaIterations = 300;
inline constexpr std::size_t kPaperSearchBudget = 1000;
inline constexpr std::size_t kPaperMetaIterations = 3000;

struct BenchOptions {
    std::string suite;
    double scale = 1.0;      // multiplies the search budget and N_M
    bool paper_scale = false; // paper budgets and search ranges
    std::size_t seeds = 5;
    std::uint64_t master_seed = 0;
    double delta = 0.05;
    std::filesystem::path out_dir = "bench-out";
    std::size_t workers = 1; // seeds of one point run concurrently
    std::size_t sine_oracle_samples = 1'000'000;
    std::optional<std::filesystem::path> cache_dir;

    std::size_t search_budget() const;
    std::size_t meta_iterations() const;
};

// One point on a figure axis: a dataset and sample count.
struct BenchPoint {
    std::string dataset; // "gaussian" or "sine"
    std::size_t k = 1;
    double rho = 0.0;
    double a = 0.0;
    std::size_t n = 0;

    std::string key() const;
};

// A method column; mode/adaptation only apply to the task-augmentation grid.
struct BenchMethod {
    std::string name; // ksg, mine-f-es, demine-vr, demine-sig, meta-demine-vr, meta-demine-sig
    std::string mode;
    std::optional<std::size_t> adaptation_steps;

    std::string label() const;
};

struct BenchRow {
    BenchPoint point;
    BenchMethod method;
    std::size_t seed_index = 0;
    std::uint64_t seed = 0;
    double ground_truth = 0.0;
    EstimateReport report;
};

struct BenchSummary {
    BenchPoint point;
    BenchMethod method;
    std::size_t count = 0;
    double ground_truth = 0.0;
    double mean = 0.0;
    double std = 0.0; // sample std over seeds
    double min = 0.0;
    double max = 0.0;
    std::optional<double> mean_epsilon;
    std::optional<double> dependent_rate;
};

struct BenchResult {
    std::string suite;
    std::vector<BenchRow> rows;
    std::vector<BenchSummary> summary;
};

std::vector<std::string> bench_suites();
std::vector<BenchPoint> suite_points(const std::string& suite);
std::vector<BenchMethod> suite_methods(const std::string& suite);

// Per-(point, seed) seed; every cell can be rerun on its own from this.
std::uint64_t cell_seed(std::uint64_t master, const BenchPoint& point, std::size_t seed_index);

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);

void write_rows_csv(const std::vector<BenchRow>& rows, std::ostream& out);
void write_summary_csv(const std::vector<BenchSummary>& summary, std::ostream& out);

// Runs every point x seed of the suite. Each point's rows go to
// <out_dir>/<suite>/<point key>.csv as soon as the point finishes; the
// summary goes to <out_dir>/<suite>/summary.csv.
BenchResult run_benchmark(const BenchOptions& opts);

} // namespace demine
