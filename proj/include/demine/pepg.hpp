#pragma once

#include <cstdint>
#include <functional>

#include "demine/adam.hpp"
#include "demine/matrix.hpp"
#include "demine/rng.hpp"

namespace demine {

struct PepgConfig {
    std::size_t pairs = 32;         // symmetric perturbation pairs per step
    double sigma_init = 0.02;
    double learning_rate = 1e-3;    // Adam step on the mean
    double sigma_learning_rate = 0.1;
    double sigma_min = 1e-6;
    double sigma_max = 1.0;
};

void validate(const PepgConfig& cfg);

// Parameter-exploring policy gradients minimizing a black-box loss.
// Each step draws u_k ~ N(0, I), evaluates loss(mean +- sigma*u_k), moves the
// mean along the symmetric-difference gradient estimate (via Adam) and
// rescales sigma per parameter from the mean-baselined pair losses.
class Pepg {
public:
    // loss(member, params): member indexes the 2*pairs evaluations of one step
    // so callers can give every member its own RNG stream.
    using Objective = std::function<double(std::size_t member, const Vector& params)>;
    // Evaluates all members of a step; the default runs them in order.
    using BatchRunner = std::function<void(std::size_t count, const std::function<void(std::size_t)>& job)>;

    Pepg(Vector mean, PepgConfig cfg, std::uint64_t seed);

    // One update. A non-finite member loss triggers one redraw of that pair;
    // a second failure throws TrainingError. Returns the mean member loss.
    double step(const Objective& loss, const BatchRunner& runner = {});

    const Vector& mean() const { return mean_; }
    const Vector& sigma() const { return sigma_; }
    std::uint64_t steps() const { return steps_; }

private:
    PepgConfig cfg_;
    Vector mean_;
    Vector sigma_;
    AdamState adam_;
    Rng rng_;
    std::uint64_t steps_ = 0;
};

} // namespace demine
