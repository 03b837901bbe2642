#include "demine/pepg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "demine/errors.hpp"

namespace demine {

void validate(const PepgConfig& c) {
    if (c.pairs < 1) throw InputError("PEPG needs at least one perturbation pair");
    if (!(c.sigma_init > 0.0)) throw InputError("PEPG sigma_init must be > 0");
    if (!(c.learning_rate > 0.0)) throw InputError("PEPG learning rate must be > 0");
    if (!(c.sigma_learning_rate >= 0.0)) throw InputError("PEPG sigma learning rate must be >= 0");
    if (!(c.sigma_min > 0.0 && c.sigma_min <= c.sigma_max)) throw InputError("PEPG sigma bounds are inconsistent");
}

Pepg::Pepg(Vector mean, PepgConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      mean_(std::move(mean)),
      sigma_(Vector::Constant(mean_.size(), cfg.sigma_init)),
      adam_(static_cast<std::size_t>(mean_.size()), AdamConfig{cfg.learning_rate}),
      rng_(seed) {
    validate(cfg_);
}

double Pepg::step(const Objective& loss, const BatchRunner& runner) {
    const std::size_t pairs = cfg_.pairs;
    const Eigen::Index dim = mean_.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](Vector& u) {
        for (Eigen::Index i = 0; i < dim; ++i) u[i] = normal(rng_);
    };

    std::vector<Vector> noise(pairs, Vector(dim));
    for (auto& u : noise) draw(u);
    std::vector<double> plus(pairs), minus(pairs);

    auto evaluate = [&](std::size_t k) {
        const Vector e = sigma_.cwiseProduct(noise[k]);
        plus[k] = loss(2 * k, mean_ + e);
        minus[k] = loss(2 * k + 1, mean_ - e);
    };
    auto run_all = [&](const std::vector<std::size_t>& which) {
        if (runner) {
            runner(which.size(), [&](std::size_t i) { evaluate(which[i]); });
        } else {
            for (std::size_t k : which) evaluate(k);
        }
    };

    std::vector<std::size_t> all(pairs);
    for (std::size_t k = 0; k < pairs; ++k) all[k] = k;
    run_all(all);

    std::vector<std::size_t> bad;
    for (std::size_t k = 0; k < pairs; ++k)
        if (!std::isfinite(plus[k]) || !std::isfinite(minus[k])) bad.push_back(k);
    if (!bad.empty()) {
        for (std::size_t k : bad) draw(noise[k]);
        run_all(bad);
        for (std::size_t k : bad)
            if (!std::isfinite(plus[k]) || !std::isfinite(minus[k]))
                throw TrainingError("PEPG member " + std::to_string(k) + " stayed non-finite after a redraw at step " +
                                    std::to_string(steps_));
    }

    double baseline = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) baseline += plus[k] + minus[k];
    baseline /= static_cast<double>(2 * pairs);
    double spread = 0.0;
    for (std::size_t k = 0; k < pairs; ++k)
        spread += (plus[k] - baseline) * (plus[k] - baseline) + (minus[k] - baseline) * (minus[k] - baseline);
    spread = std::sqrt(spread / static_cast<double>(2 * pairs));

    // d/dmean E[loss] ~ (1/P) sum_k (l+ - l-)/2 * u_k / sigma
    Vector grad = Vector::Zero(dim);
    Vector sigma_signal = Vector::Zero(dim);
    for (std::size_t k = 0; k < pairs; ++k) {
        grad += (0.5 * (plus[k] - minus[k])) * noise[k];
        if (spread > 0.0) {
            const double centered = (0.5 * (plus[k] + minus[k]) - baseline) / spread;
            sigma_signal += centered * (noise[k].array().square() - 1.0).matrix();
        }
    }
    grad = (grad.array() / (static_cast<double>(pairs) * sigma_.array())).matrix();
    adam_.step(mean_, grad);

    // Pairs whose average loss is below the baseline pull sigma toward their
    // perturbation size.
    const double rate = cfg_.sigma_learning_rate / static_cast<double>(pairs);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double s = sigma_[i] * std::exp(-rate * sigma_signal[i]);
        sigma_[i] = std::clamp(s, cfg_.sigma_min, cfg_.sigma_max);
    }
    ++steps_;
    return baseline;
}

} // namespace demine
