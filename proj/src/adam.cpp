#include "demine/adam.hpp"

#include <cmath>
#include <string>

#include "demine/errors.hpp"

namespace demine {

AdamState::AdamState(std::size_t parameter_count, AdamConfig cfg)
    : cfg_(cfg),
      m_(Vector::Zero(static_cast<Eigen::Index>(parameter_count))),
      v_(Vector::Zero(static_cast<Eigen::Index>(parameter_count))) {
    if (!(cfg.learning_rate > 0.0)) throw InputError("Adam learning rate must be positive");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
        throw InputError("Adam betas must lie in [0, 1)");
}

void AdamState::step(Vector& params, const Vector& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw InputError("Adam: parameter/gradient size does not match optimizer state");
    if (!grad.allFinite()) {
        Eigen::Index bad = 0;
        while (bad < grad.size() && std::isfinite(grad[bad])) ++bad;
        throw TrainingError("non-finite gradient at parameter " + std::to_string(bad) + " on Adam step " +
                            std::to_string(steps_ + 1));
    }
    ++steps_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(cfg_.beta1, t);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t);
    params.array() -= cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
}

} // namespace demine
