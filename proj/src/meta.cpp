#include "demine/meta.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "demine/adam.hpp"
#include "demine/bounds.hpp"
#include "demine/errors.hpp"
#include "demine/parallel.hpp"
#include "demine/pepg.hpp"
#include "demine/rng.hpp"

namespace demine {

using nlohmann::json;

std::string to_string(MetaOptimizer o) { return o == MetaOptimizer::pepg ? "pepg" : "bptt-first-order"; }

MetaOptimizer parse_meta_optimizer(const std::string& s) {
    if (s == "pepg" || s == "PEPG") return MetaOptimizer::pepg;
    if (s == "bptt-first-order" || s == "bptt" || s == "BPTT_FIRST_ORDER") return MetaOptimizer::bptt_first_order;
    throw InputError("unknown meta optimizer '" + s + "' (expected pepg or bptt-first-order)");
}

double MetaConfig::meta_step(const TrainConfig& base) const { return eta_meta ? *eta_meta : base.learning_rate / 3.0; }

std::size_t MetaConfig::adaptation_steps(const TrainConfig& base) const {
    return inner_steps ? *inner_steps : std::min(base.iterations, inner_cap);
}

void validate(const MetaConfig& c) {
    if (!(c.meta_train_fraction > 0.0 && c.meta_train_fraction < 1.0))
        throw InputError("meta-train fraction r must lie in (0, 1)");
    if (c.tasks_per_iteration < 1) throw InputError("N_T must be >= 1");
    if (c.eta_meta && !(*c.eta_meta > 0.0)) throw InputError("eta_meta must be > 0");
    if (c.population < 1) throw InputError("PEPG population must be >= 1");
    if (!(c.sigma_init > 0.0)) throw InputError("PEPG sigma_init must be > 0");
    parse_augmentation_mode(c.augmentation);
}

json to_json(const MetaConfig& c) {
    json j{{"outer_iterations", c.outer_iterations},
           {"tasks_per_iteration", c.tasks_per_iteration},
           {"meta_train_fraction", c.meta_train_fraction},
           {"inner_cap", c.inner_cap},
           {"optimizer", to_string(c.optimizer)},
           {"augmentation", c.augmentation},
           {"population", c.population},
           {"sigma_init", c.sigma_init}};
    j["eta_meta"] = c.eta_meta ? json(*c.eta_meta) : json(nullptr);
    j["inner_steps"] = c.inner_steps ? json(*c.inner_steps) : json(nullptr);
    return j;
}

MetaConfig meta_config_from_json(const json& j, MetaConfig c) {
    try {
        if (j.contains("outer_iterations")) c.outer_iterations = j["outer_iterations"].get<std::size_t>();
        if (j.contains("tasks_per_iteration")) c.tasks_per_iteration = j["tasks_per_iteration"].get<std::size_t>();
        if (j.contains("meta_train_fraction")) c.meta_train_fraction = j["meta_train_fraction"].get<double>();
        if (j.contains("inner_cap")) c.inner_cap = j["inner_cap"].get<std::size_t>();
        if (j.contains("optimizer")) c.optimizer = parse_meta_optimizer(j["optimizer"].get<std::string>());
        if (j.contains("augmentation")) c.augmentation = j["augmentation"].get<std::string>();
        if (j.contains("population")) c.population = j["population"].get<std::size_t>();
        if (j.contains("sigma_init")) c.sigma_init = j["sigma_init"].get<double>();
        if (j.contains("eta_meta") && !j["eta_meta"].is_null()) c.eta_meta = j["eta_meta"].get<double>();
        if (j.contains("inner_steps") && !j["inner_steps"].is_null())
            c.inner_steps = j["inner_steps"].get<std::size_t>();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed meta config: ") + e.what());
    }
    validate(c);
    return c;
}

MetaTask make_task(const PairedDataset& train, double fraction, const std::string& mode, std::uint64_t seed) {
    auto [a, b] = split(train, fraction, derive_seed(seed, "task-split"));
    MetaTask task;
    task.transform = sample_transform(train.x_dim(), train.z_dim(), mode, derive_seed(seed, "task-transform"));
    task.meta_train = apply(task.transform, a);
    task.meta_val = apply(task.transform, b);
    if (task.meta_train.size() < 2 || task.meta_val.size() < 2)
        throw InputError("meta task splits need at least 2 rows on each side");
    return task;
}

std::vector<MetaTask> make_tasks(const PairedDataset& train, const MetaConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    std::vector<MetaTask> tasks;
    tasks.reserve(cfg.tasks_per_iteration);
    for (std::size_t i = 0; i < cfg.tasks_per_iteration; ++i)
        tasks.push_back(make_task(train, cfg.meta_train_fraction, cfg.augmentation, derive_seed(seed, "task", {i})));
    return tasks;
}

Critic meta_train_inner(const Critic& init, const PairedDataset& task_data, double eta, std::size_t steps) {
    Critic critic = init;
    if (steps == 0) return critic;
    AdamState adam(critic.parameter_count(), AdamConfig{eta});
    Vector params = critic.parameters();
    Vector grad;
    for (std::size_t s = 0; s < steps; ++s) {
        if (!std::isfinite(mine_f_loss_and_gradient(critic, task_data.x, task_data.z, grad)))
            throw TrainingError("non-finite loss during inner adaptation at step " + std::to_string(s));
        adam.step(params, grad);
        critic.set_parameters(params);
    }
    return critic;
}

double meta_objective(const Critic& init, const std::vector<MetaTask>& tasks, double eta, std::size_t steps) {
    double total = 0.0;
    for (const MetaTask& task : tasks) {
        const Critic adapted = meta_train_inner(init, task.meta_train, eta, steps);
        total += loss(adapted.forward_batch(task.meta_val.x, task.meta_val.z));
    }
    return total / static_cast<double>(tasks.size());
}

namespace {

Critic optimize_pepg(const PairedDataset& train, const MetaConfig& cfg, const TrainConfig& base, Critic init,
                     std::uint64_t seed) {
    const double eta = base.learning_rate;
    const std::size_t steps = cfg.adaptation_steps(base);
    PepgConfig pc;
    pc.pairs = cfg.population;
    pc.sigma_init = cfg.sigma_init;
    pc.learning_rate = cfg.meta_step(base);
    Pepg pepg(init.parameters(), pc, derive_seed(seed, "pepg"));
    const std::size_t workers = worker_count();

    for (std::size_t it = 0; it < cfg.outer_iterations; ++it) {
        const auto tasks = make_tasks(train, cfg, derive_seed(seed, "meta-tasks", {it}));
        auto member_loss = [&](std::size_t, const Vector& p) {
            if (!p.allFinite()) return std::numeric_limits<double>::quiet_NaN();
            Critic c = init;
            c.set_parameters(p);
            try {
                return meta_objective(c, tasks, eta, steps);
            } catch (const TrainingError&) {
                return std::numeric_limits<double>::quiet_NaN();
            }
        };
        auto runner = [&](std::size_t count, const std::function<void(std::size_t)>& job) {
            parallel_for(count, workers, job);
        };
        pepg.step(member_loss, runner);
    }
    init.set_parameters(pepg.mean());
    return init;
}

Critic optimize_first_order(const PairedDataset& train, const MetaConfig& cfg, const TrainConfig& base, Critic init,
                            std::uint64_t seed) {
    const double eta = base.learning_rate;
    const std::size_t steps = cfg.adaptation_steps(base);
    AdamState adam(init.parameter_count(), AdamConfig{cfg.meta_step(base)});
    Vector params = init.parameters();

    for (std::size_t it = 0; it < cfg.outer_iterations; ++it) {
        const auto tasks = make_tasks(train, cfg, derive_seed(seed, "meta-tasks", {it}));
        Vector grad = Vector::Zero(params.size());
        for (const MetaTask& task : tasks) {
            const Critic adapted = meta_train_inner(init, task.meta_train, eta, steps);
            Vector g;
            if (!std::isfinite(mine_f_loss_and_gradient(adapted, task.meta_val.x, task.meta_val.z, g)))
                throw TrainingError("non-finite meta-validation loss at outer iteration " + std::to_string(it));
            grad += g;
        }
        grad /= static_cast<double>(tasks.size());
        adam.step(params, grad);
        init.set_parameters(params);
    }
    return init;
}

} // namespace

Critic meta_optimize(const PairedDataset& train, const MetaConfig& cfg, const TrainConfig& base, std::uint64_t seed) {
    validate(cfg);
    validate(train);
    Critic init = initial_critic(train.x_dim(), train.z_dim(), base);
    if (cfg.outer_iterations == 0) return init;
    if (cfg.optimizer == MetaOptimizer::pepg) return optimize_pepg(train, cfg, base, std::move(init), seed);
    return optimize_first_order(train, cfg, base, std::move(init), seed);
}

EstimateReport meta_demine_estimate(const PairedDataset& ds, const TrainConfig& base_cfg, const MetaConfig& meta_cfg,
                                    double delta) {
    const auto start = std::chrono::steady_clock::now();
    validate(base_cfg);
    validate(meta_cfg);
    auto [train, val] = split(ds, 0.5, split_seed(base_cfg));
    Critic init = meta_optimize(train, meta_cfg, base_cfg, derive_seed(base_cfg.seed, "meta"));
    const Critic critic = train_critic(train, base_cfg, std::move(init));
    EstimateReport r = evaluate_critic(critic, val, delta, train.size());
    r.method = "meta-demine";
    r.seed = base_cfg.seed;
    r.settings["train"] = to_json(base_cfg);
    r.settings["meta"] = to_json(meta_cfg);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace demine
