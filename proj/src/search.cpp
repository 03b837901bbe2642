#include "demine/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "demine/errors.hpp"
#include "demine/parallel.hpp"
#include "demine/rng.hpp"

namespace demine {

using nlohmann::json;

std::string to_string(SearchCriterion::Mode m) { return m == SearchCriterion::Mode::vr ? "vr" : "sig"; }

SearchCriterion::Mode parse_search_mode(const std::string& s) {
    if (s == "vr") return SearchCriterion::Mode::vr;
    if (s == "sig") return SearchCriterion::Mode::sig;
    throw InputError("unknown search criterion '" + s + "' (want vr or sig)");
}

SearchSpace SearchSpace::paper(bool sine) {
    SearchSpace s;
    if (sine) s.iterations_max = 5000;
    return s;
}

SearchSpace SearchSpace::desk(bool sine) {
    SearchSpace s = paper(sine);
    s.layers_max = 3;
    s.hidden_max = 64;
    return s;
}

void validate(const SearchSpace& s) {
    if (s.layers_min < 1 || s.layers_min > s.layers_max) throw InputError("search space: bad layer range");
    if (s.hidden_min < 1 || s.hidden_min > s.hidden_max) throw InputError("search space: bad hidden range");
    if (!(s.lr_min > 0 && s.lr_min <= s.lr_max)) throw InputError("search space: bad learning-rate range");
    if (s.iterations_min < 1 || s.iterations_min > s.iterations_max)
        throw InputError("search space: bad iteration range");
    if (s.batch_min < 2 || s.batch_min > s.batch_max) throw InputError("search space: bad batch range");
    if (!(s.M_min > 0 && s.M_min <= s.M_max)) throw InputError("search space: bad M range");
    if (!(s.t_min >= -1 && s.t_min <= s.t_max && s.t_max <= 1)) throw InputError("search space: bad t range");
}

json to_json(const SearchSpace& s) {
    return json{{"layers", {s.layers_min, s.layers_max}},   {"hidden", {s.hidden_min, s.hidden_max}},
                {"learning_rate", {s.lr_min, s.lr_max}},    {"iterations", {s.iterations_min, s.iterations_max}},
                {"batch", {s.batch_min, s.batch_max}},      {"M", {s.M_min, s.M_max}},
                {"t", {s.t_min, s.t_max}}};
}

SearchSpace search_space_from_json(const json& j, SearchSpace s) {
    auto range = [&](const char* key, auto& lo, auto& hi) {
        if (!j.contains(key)) return;
        const auto& r = j.at(key);
        if (!r.is_array() || r.size() != 2) throw InputError(std::string("search space: '") + key + "' needs [lo, hi]");
        r.at(0).get_to(lo);
        r.at(1).get_to(hi);
    };
    try {
        range("layers", s.layers_min, s.layers_max);
        range("hidden", s.hidden_min, s.hidden_max);
        range("learning_rate", s.lr_min, s.lr_max);
        range("iterations", s.iterations_min, s.iterations_max);
        range("batch", s.batch_min, s.batch_max);
        range("M", s.M_min, s.M_max);
        range("t", s.t_min, s.t_max);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed search space: ") + e.what());
    }
    validate(s);
    return s;
}

namespace {

double log_uniform(double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

std::size_t int_uniform(std::size_t lo, std::size_t hi, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::size_t int_log_uniform(std::size_t lo, std::size_t hi, Rng& rng) {
    const double v = log_uniform(static_cast<double>(lo), static_cast<double>(hi) + 1.0, rng);
    return std::clamp(static_cast<std::size_t>(std::floor(v)), lo, hi);
}

} // namespace

TrainConfig sample_config(const SearchSpace& s, Rng& rng) {
    TrainConfig c;
    c.encoder_layers = int_uniform(s.layers_min, s.layers_max, rng);
    c.hidden = int_uniform(s.hidden_min, s.hidden_max, rng);
    c.learning_rate = log_uniform(s.lr_min, s.lr_max, rng);
    c.iterations = int_log_uniform(s.iterations_min, s.iterations_max, rng);
    c.batch = int_uniform(s.batch_min, s.batch_max, rng);
    c.M = log_uniform(s.M_min, s.M_max, rng);
    c.t = std::uniform_real_distribution<double>(s.t_min, s.t_max)(rng);
    return c;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
    if (n < 2 * folds) throw InputError("too few rows (" + std::to_string(n) + ") for " + std::to_string(folds) +
                                        "-fold cross-validation");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> out(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t begin = f * n / folds;
        const std::size_t end = (f + 1) * n / folds;
        out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

SearchTrial evaluate_trial(const PairedDataset& train, const TrainConfig& cfg, const SearchCriterion& criterion,
                           std::uint64_t fold_seed) {
    const auto folds = kfold_indices(train.size(), criterion.folds, fold_seed);
    SearchTrial trial;
    trial.config = cfg;
    std::size_t smallest_fold = train.size();
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> fit_rows;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f) fit_rows.insert(fit_rows.end(), folds[g].begin(), folds[g].end());
        std::sort(fit_rows.begin(), fit_rows.end());
        std::vector<std::size_t> held = folds[f];
        std::sort(held.begin(), held.end());
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = derive_seed(cfg.seed, "cv-fold", {f});
        const Critic critic = train_critic(select_rows(train, fit_rows), fold_cfg);
        trial.fold_estimates.push_back(mine_f_on(critic, select_rows(train, held)));
        smallest_fold = std::min(smallest_fold, held.size());
    }
    const double k = static_cast<double>(folds.size());
    trial.mu = std::accumulate(trial.fold_estimates.begin(), trial.fold_estimates.end(), 0.0) / k;
    double ss = 0.0;
    for (double e : trial.fold_estimates) ss += (e - trial.mu) * (e - trial.mu);
    trial.sigma = std::sqrt(ss / (k - 1.0));
    if (criterion.mode == SearchCriterion::Mode::vr) {
        trial.score = trial.mu - 2.0 * trial.sigma / std::sqrt(k);
    } else {
        trial.score = trial.mu - demine_epsilon(cfg.score_range(), static_cast<double>(smallest_fold), criterion.delta);
    }
    return trial;
}

SearchResult hyperparameter_search(const PairedDataset& train, const SearchCriterion& criterion,
                                   const SearchSpace& space, std::size_t budget, std::uint64_t seed) {
    if (budget < 1) throw InputError("search budget must be >= 1");
    validate(space);
    validate(train);
    Rng rng = make_rng(seed, "search-configs");
    std::vector<TrainConfig> configs;
    configs.reserve(budget);
    for (std::size_t i = 0; i < budget; ++i) {
        TrainConfig c = sample_config(space, rng);
        c.seed = derive_seed(seed, "search-trial", {i});
        configs.push_back(c);
    }
    const std::uint64_t fold_seed = derive_seed(seed, "search-folds");
    SearchResult result;
    result.trials.resize(budget);
    parallel_for(budget, worker_count(), [&](std::size_t i) {
        try {
            result.trials[i] = evaluate_trial(train, configs[i], criterion, fold_seed);
        } catch (const TrainingError&) {
            // A diverging config simply loses.
            SearchTrial failed;
            failed.config = configs[i];
            failed.mu = failed.sigma = std::numeric_limits<double>::quiet_NaN();
            failed.score = -std::numeric_limits<double>::infinity();
            result.trials[i] = failed;
        }
    });
    for (std::size_t i = 1; i < budget; ++i)
        if (result.trials[i].score > result.trials[result.best_index].score) result.best_index = i;
    result.best = result.trials[result.best_index].config;
    return result;
}

SearchResult search_on_train_split(const PairedDataset& ds, const SearchCriterion& criterion,
                                   const SearchSpace& space, std::size_t budget, std::uint64_t seed) {
    TrainConfig probe;
    probe.seed = seed;
    const auto parts = split(ds, 0.5, split_seed(probe));
    SearchResult result = hyperparameter_search(parts.first, criterion, space, budget, derive_seed(seed, "search"));
    result.best.seed = seed;
    return result;
}

void write_trace_csv(const SearchResult& result, std::ostream& out) {
    out << "trial,encoder_layers,hidden,learning_rate,iterations,batch,M,t,mu,sigma,score,fold_estimates,selected\n";
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
        const SearchTrial& t = result.trials[i];
        const TrainConfig& c = t.config;
        out << i << ',' << c.encoder_layers << ',' << c.hidden << ',' << format_double(c.learning_rate) << ','
            << c.iterations << ',' << c.batch << ',' << format_double(c.M) << ',' << format_double(c.t) << ','
            << format_double(t.mu) << ',' << format_double(t.sigma) << ',' << format_double(t.score) << ',';
        for (std::size_t f = 0; f < t.fold_estimates.size(); ++f)
            out << (f ? ";" : "") << format_double(t.fold_estimates[f]);
        out << ',' << (i == result.best_index ? 1 : 0) << '\n';
    }
}

} // namespace demine
