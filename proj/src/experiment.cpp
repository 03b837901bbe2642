#include "demine/experiment.hpp"

#include "demine/baselines.hpp"
#include "demine/errors.hpp"

namespace demine {

using nlohmann::json;

namespace {

const char* kind_name(DatasetSource::Kind k) {
    switch (k) {
    case DatasetSource::Kind::gaussian: return "gaussian";
    case DatasetSource::Kind::sine: return "sine";
    case DatasetSource::Kind::csv: return "csv";
    }
    return "?";
}

bool known_method(const std::string& m) {
    return m == "demine" || m == "meta-demine" || m == "mine-f-es" || m == "ksg";
}

} // namespace

void validate(const ExperimentConfig& c) {
    if (!known_method(c.method))
        throw InputError("unknown method '" + c.method + "' (expected demine, meta-demine, mine-f-es or ksg)");
    if (c.seeds.empty()) throw InputError("at least one seed is required");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw InputError("delta must lie in (0, 1)");
    if (c.search && c.search_budget < 1) throw InputError("search budget must be >= 1");
    switch (c.dataset.kind) {
    case DatasetSource::Kind::gaussian: validate(c.dataset.gaussian); break;
    case DatasetSource::Kind::sine: validate(c.dataset.sine); break;
    case DatasetSource::Kind::csv:
        if (c.dataset.path.empty()) throw InputError("csv dataset needs a path");
        break;
    }
    validate(c.train);
    validate(c.meta);
}

json to_json(const ExperimentConfig& c) {
    json ds{{"kind", kind_name(c.dataset.kind)}};
    switch (c.dataset.kind) {
    case DatasetSource::Kind::gaussian:
        ds.update(json{{"k", c.dataset.gaussian.k},
                       {"rho", c.dataset.gaussian.rho},
                       {"n", c.dataset.gaussian.n},
                       {"seed", c.dataset.gaussian.seed}});
        break;
    case DatasetSource::Kind::sine:
        ds.update(json{{"a", c.dataset.sine.a},
                       {"phase", c.dataset.sine.phase},
                       {"noise_sigma", c.dataset.sine.noise_sigma},
                       {"n", c.dataset.sine.n},
                       {"seed", c.dataset.sine.seed}});
        break;
    case DatasetSource::Kind::csv: ds["path"] = c.dataset.path.string(); break;
    }
    json j{{"dataset", ds},       {"method", c.method}, {"train", to_json(c.train)}, {"meta", to_json(c.meta)},
           {"delta", c.delta},    {"seeds", c.seeds}};
    if (c.search)
        j["search"] = json{{"criterion", to_string(c.search->mode)},
                           {"folds", c.search->folds},
                           {"budget", c.search_budget},
                           {"paper_scale", c.paper_scale}};
    if (c.output) j["output"] = c.output->string();
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("dataset")) {
            const json& d = j["dataset"];
            const std::string kind = d.value("kind", "gaussian");
            if (kind == "gaussian") {
                c.dataset.kind = DatasetSource::Kind::gaussian;
                c.dataset.gaussian.k = d.value("k", c.dataset.gaussian.k);
                c.dataset.gaussian.rho = d.value("rho", c.dataset.gaussian.rho);
                c.dataset.gaussian.n = d.value("n", c.dataset.gaussian.n);
                c.dataset.gaussian.seed = d.value("seed", c.dataset.gaussian.seed);
            } else if (kind == "sine") {
                c.dataset.kind = DatasetSource::Kind::sine;
                c.dataset.sine.a = d.value("a", c.dataset.sine.a);
                c.dataset.sine.phase = d.value("phase", c.dataset.sine.phase);
                c.dataset.sine.noise_sigma = d.value("noise_sigma", c.dataset.sine.noise_sigma);
                c.dataset.sine.n = d.value("n", c.dataset.sine.n);
                c.dataset.sine.seed = d.value("seed", c.dataset.sine.seed);
            } else if (kind == "csv") {
                c.dataset.kind = DatasetSource::Kind::csv;
                c.dataset.path = d.at("path").get<std::string>();
            } else {
                throw InputError("unknown dataset kind '" + kind + "'");
            }
        }
        c.method = j.value("method", c.method);
        if (j.contains("train")) c.train = train_config_from_json(j["train"]);
        if (j.contains("meta")) c.meta = meta_config_from_json(j["meta"]);
        c.delta = j.value("delta", c.delta);
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("search")) {
            const json& s = j["search"];
            SearchCriterion crit;
            crit.mode = parse_search_mode(s.value("criterion", std::string("vr")));
            crit.folds = s.value("folds", crit.folds);
            crit.delta = c.delta;
            c.search = crit;
            c.search_budget = s.value("budget", c.search_budget);
            c.paper_scale = s.value("paper_scale", c.paper_scale);
        }
        if (j.contains("output")) c.output = j["output"].get<std::string>();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed experiment config: ") + e.what());
    }
    validate(c);
    return c;
}

PairedDataset load_dataset(const DatasetSource& src) {
    switch (src.kind) {
    case DatasetSource::Kind::gaussian: return gen_gaussian(src.gaussian);
    case DatasetSource::Kind::sine: return gen_sine(src.sine);
    case DatasetSource::Kind::csv: return read_csv(src.path);
    }
    throw InputError("unknown dataset kind");
}

std::vector<EstimateReport> run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const PairedDataset ds = load_dataset(cfg.dataset);
    const bool sine = cfg.dataset.kind == DatasetSource::Kind::sine;
    std::vector<EstimateReport> reports;
    for (std::uint64_t seed : cfg.seeds) {
        if (cfg.method == "ksg") {
            reports.push_back(ksg_report(ds, KsgConfig{.jitter_seed = seed}));
            reports.back().seed = seed;
            continue;
        }
        TrainConfig train = cfg.train;
        train.seed = seed;
        json search_settings;
        if (cfg.search) {
            SearchCriterion crit = *cfg.search;
            crit.delta = cfg.delta;
            const SearchSpace space = cfg.paper_scale ? SearchSpace::paper(sine) : SearchSpace::desk(sine);
            train = search_on_train_split(ds, crit, space, cfg.search_budget, seed).best;
            search_settings = json{{"criterion", to_string(crit.mode)}, {"budget", cfg.search_budget},
                                   {"folds", crit.folds}, {"space", to_json(space)}};
        }
        EstimateReport r;
        if (cfg.method == "demine") {
            r = demine_estimate(ds, train, cfg.delta);
        } else if (cfg.method == "meta-demine") {
            r = meta_demine_estimate(ds, train, cfg.meta, cfg.delta);
        } else {
            r = mine_f_es(ds, train, EarlyStopPolicy{train.iterations}, seed);
        }
        if (cfg.search) r.settings["search"] = search_settings;
        r.settings["dataset"] = ds.provenance;
        reports.push_back(std::move(r));
    }
    return reports;
}

} // namespace demine
