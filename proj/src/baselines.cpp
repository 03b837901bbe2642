#include "demine/baselines.hpp"

#include <chrono>

#include "demine/errors.hpp"

namespace demine {

EstimateReport mine_f_es(const PairedDataset& ds, TrainConfig cfg, EarlyStopPolicy stop, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    validate(ds);
    if (ds.size() < 2) throw InputError("MINE-f-ES needs at least 2 rows");
    cfg.iterations = stop.max_iterations;
    cfg.seed = seed;
    const Critic critic = train_critic(ds, cfg);
    EstimateReport r;
    r.method = "mine-f-es";
    r.bound_kind = BoundKind::mine_f;
    r.point_estimate = mine_f_on(critic, ds);
    r.n_val = ds.size();
    r.n_train = ds.size();
    r.range = ScoreRange{critic.lower_bound(), critic.upper_bound()};
    r.seed = seed;
    r.settings["train"] = to_json(cfg);
    r.settings["confidence"] = "none: critic was fit on the evaluation samples";
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

EstimateReport ksg_report(const PairedDataset& ds, const KsgConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    EstimateReport r;
    r.method = "ksg";
    r.point_estimate = ksg_estimate(ds, cfg);
    r.n_val = ds.size();
    r.n_train = 0;
    r.settings["k_neighbors"] = cfg.k_neighbors;
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace demine
