#pragma once

#include <cstdint>

#include "demine/matrix.hpp"

namespace demine {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Bias-corrected Adam over a flat parameter vector.
class AdamState {
public:
    AdamState(std::size_t parameter_count, AdamConfig cfg);

    // Applies one update in place. Throws TrainingError on a non-finite gradient.
    void step(Vector& params, const Vector& grad);

    std::uint64_t steps() const { return steps_; }
    const AdamConfig& config() const { return cfg_; }
    const Vector& first_moment() const { return m_; }
    const Vector& second_moment() const { return v_; }

private:
    AdamConfig cfg_;
    std::uint64_t steps_ = 0;
    Vector m_;
    Vector v_;
};

} // namespace demine
