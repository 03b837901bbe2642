#include "demine/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "demine/adam.hpp"
#include "demine/bounds.hpp"
#include "demine/errors.hpp"
#include "demine/rng.hpp"

namespace demine {

using nlohmann::json;

void validate(const TrainConfig& c) {
    if (c.encoder_layers < 1) throw InputError("encoder_layers must be >= 1");
    if (c.hidden < 1) throw InputError("hidden must be >= 1");
    if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) throw InputError("learning rate must be > 0");
    if (c.batch < 2) throw InputError("batch must be >= 2");
    if (!(c.M > 0.0) || !std::isfinite(c.M)) throw InputError("M must be > 0");
    if (!(c.t >= -1.0 && c.t <= 1.0)) throw InputError("t must lie in [-1, 1]");
}

json to_json(const TrainConfig& c) {
    return json{{"encoder_layers", c.encoder_layers},
                {"hidden", c.hidden},
                {"learning_rate", c.learning_rate},
                {"iterations", c.iterations},
                {"batch", c.batch},
                {"M", c.M},
                {"t", c.t},
                {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
    try {
        if (j.contains("encoder_layers")) c.encoder_layers = j["encoder_layers"].get<std::size_t>();
        if (j.contains("hidden")) c.hidden = j["hidden"].get<std::size_t>();
        if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
        if (j.contains("iterations")) c.iterations = j["iterations"].get<std::size_t>();
        if (j.contains("batch")) c.batch = j["batch"].get<std::size_t>();
        if (j.contains("M")) c.M = j["M"].get<double>();
        if (j.contains("t")) c.t = j["t"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed train config: ") + e.what());
    }
    validate(c);
    return c;
}

Critic initial_critic(std::size_t x_dim, std::size_t z_dim, const TrainConfig& cfg) {
    validate(cfg);
    Rng rng = make_rng(cfg.seed, "critic-init");
    return make_critic(x_dim, z_dim, cfg.encoder_layers, cfg.hidden, cfg.M, cfg.t, rng);
}

Critic train_critic(const PairedDataset& train, const TrainConfig& cfg, std::optional<Critic> init) {
    validate(cfg);
    validate(train);
    const std::size_t n = train.size();
    if (n < 2) throw InputError("training needs at least 2 rows");
    Critic critic = init ? std::move(*init) : initial_critic(train.x_dim(), train.z_dim(), cfg);
    if (cfg.iterations == 0) return critic;

    const std::size_t batch = std::min(cfg.batch, n);
    AdamState adam(critic.parameter_count(), AdamConfig{cfg.learning_rate});
    Rng rng = make_rng(cfg.seed, "minibatch");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Matrix xb(static_cast<Eigen::Index>(batch), train.x.cols());
    Matrix zb(static_cast<Eigen::Index>(batch), train.z.cols());
    Vector params = critic.parameters();
    Vector grad;

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        // Partial Fisher-Yates: the first `batch` entries are a uniform draw
        // without replacement.
        for (std::size_t i = 0; i < batch; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(pool[i], pool[pick(rng)]);
            xb.row(static_cast<Eigen::Index>(i)) = train.x.row(static_cast<Eigen::Index>(pool[i]));
            zb.row(static_cast<Eigen::Index>(i)) = train.z.row(static_cast<Eigen::Index>(pool[i]));
        }
        const double l = mine_f_loss_and_gradient(critic, xb, zb, grad);
        if (!std::isfinite(l)) {
            std::ostringstream msg;
            msg << "non-finite training loss at iteration " << it << " (lr=" << cfg.learning_rate
                << ", M=" << cfg.M << ", t=" << cfg.t << ")";
            throw TrainingError(msg.str());
        }
        adam.step(params, grad);
        critic.set_parameters(params);
    }
    return critic;
}

double mine_f_on(const Critic& c, const PairedDataset& data) {
    validate(data);
    const Eigen::Index n = data.x.rows();
    if (n < 2) throw InputError("MINE-f estimate needs at least 2 rows");
    const Matrix xu = c.unit_embeddings(Side::x, data.x);
    const Matrix zu = c.unit_embeddings(Side::z, data.z);
    constexpr Eigen::Index kBlock = 512;
    double joint = 0.0;
    double marginal = 0.0;
    for (Eigen::Index start = 0; start < n; start += kBlock) {
        const Eigen::Index rows = std::min(kBlock, n - start);
        const Matrix s = c.scores_from_units(xu.middleRows(start, rows), zu);
        for (Eigen::Index i = 0; i < rows; ++i) joint += s(i, start + i);
        marginal += s.array().exp().sum();
    }
    const double nn = static_cast<double>(n);
    return joint / nn - marginal / (nn * nn) + 1.0;
}

EstimateReport evaluate_critic(const Critic& c, const PairedDataset& val, double delta, std::size_t n_train) {
    validate(val);
    EstimateReport r;
    r.method = "demine";
    r.bound_kind = BoundKind::mine_f;
    r.delta = delta;
    r.n_val = val.size();
    r.n_train = n_train;
    r.range = ScoreRange{c.lower_bound(), c.upper_bound()};
    constexpr std::size_t kFullMatrixLimit = 4096;
    if (val.size() <= kFullMatrixLimit) {
        const Matrix s = c.forward_batch(val.x, val.z);
        r.point_estimate = estimate(BoundKind::mine_f, s);
        r.mine_bound = estimate(BoundKind::mine, s);
        r.eb1_bound = estimate(BoundKind::eb1, s);
    } else {
        r.point_estimate = mine_f_on(c, val);
    }
    r.epsilon = demine_epsilon(*r.range, static_cast<double>(val.size()), delta);
    r.significance = significance_verdict(r.point_estimate, *r.epsilon);
    return r;
}

std::uint64_t split_seed(const TrainConfig& cfg) { return derive_seed(cfg.seed, "train-val-split"); }

EstimateReport demine_estimate(const PairedDataset& ds, const TrainConfig& cfg, double delta) {
    const auto start = std::chrono::steady_clock::now();
    validate(cfg);
    auto [train, val] = split(ds, 0.5, split_seed(cfg));
    const Critic critic = train_critic(train, cfg);
    EstimateReport r = evaluate_critic(critic, val, delta, train.size());
    r.seed = cfg.seed;
    r.settings["train"] = to_json(cfg);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace demine
