#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>

#include "demine/dataset.hpp"

namespace demine {

// X, Z in R^k with corr(X_i, Z_j) = rho if i == j else 0.
struct GaussianSpec {
    std::size_t k = 1;
    double rho = 0.0;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
};

// X ~ U(-1, 1), Z = sin(a X + phase) + noise_sigma * N(0, 1).
struct SineSpec {
    double a = 8.0 * std::numbers::pi;
    double phase = std::numbers::pi / 2.0;
    double noise_sigma = 0.05;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
};

void validate(const GaussianSpec& spec);
void validate(const SineSpec& spec);

PairedDataset gen_gaussian(const GaussianSpec& spec);
PairedDataset gen_sine(const SineSpec& spec);

// -(k/2) ln(1 - rho^2) nats.
double gaussian_ground_truth(std::size_t k, double rho);

inline constexpr std::size_t kSineOracleSamples = 1'000'000;

// KSG (k = 3) on oracle_samples fresh draws of the sine model. spec.n is
// ignored; spec.seed seeds the draw. When cache_dir is given the value is
// stored there keyed by a hash of (a, phase, noise_sigma, seed, samples).
double sine_ground_truth(const SineSpec& spec, std::size_t oracle_samples = kSineOracleSamples,
                         const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

} // namespace demine
