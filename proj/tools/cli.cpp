#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "demine/bench.hpp"
#include "demine/errors.hpp"
#include "demine/experiment.hpp"
#include "demine/parallel.hpp"

namespace demine {

namespace {

using nlohmann::json;

struct DatasetFlags {
    std::string kind = "gaussian";
    std::size_t k = 1;
    double rho = 0.0;
    std::size_t n = 1000;
    double a = 8.0 * std::numbers::pi;
    double phase = std::numbers::pi / 2.0;
    double noise = 0.05;
    std::uint64_t seed = 0;
    std::string path;
    CLI::Option* data = nullptr;
    std::vector<CLI::Option*> given;
};

void add_dataset_flags(CLI::App* app, DatasetFlags& f) {
    f.given = {app->add_option("--dataset", f.kind, "gaussian | sine")->check(CLI::IsMember({"gaussian", "sine"})),
               app->add_option("--k", f.k, "Gaussian dimension"),
               app->add_option("--rho", f.rho, "Gaussian per-dimension correlation"),
               app->add_option("--n", f.n, "sample count"),
               app->add_option("--a", f.a, "sine frequency"),
               app->add_option("--phase", f.phase, "sine phase"),
               app->add_option("--noise", f.noise, "sine noise sigma"),
               app->add_option("--data-seed", f.seed, "dataset seed")};
    f.data = app->add_option("--data", f.path, "read pairs from a CSV file instead");
}

bool dataset_flags_given(const DatasetFlags& f) {
    if (f.data->count()) return true;
    for (auto* o : f.given)
        if (o->count()) return true;
    return false;
}

DatasetSource to_source(const DatasetFlags& f) {
    DatasetSource s;
    if (f.data->count()) {
        s.kind = DatasetSource::Kind::csv;
        s.path = f.path;
    } else if (f.kind == "sine") {
        s.kind = DatasetSource::Kind::sine;
        s.sine = SineSpec{f.a, f.phase, f.noise, f.n, f.seed};
    } else {
        s.kind = DatasetSource::Kind::gaussian;
        s.gaussian = GaussianSpec{f.k, f.rho, f.n, f.seed};
    }
    return s;
}

struct TrainFlags {
    TrainConfig cfg;
    std::vector<std::pair<CLI::Option*, std::function<void(TrainConfig&)>>> given;
};

void add_train_flags(CLI::App* app, TrainFlags& f) {
    auto bind = [&](const char* name, auto TrainConfig::*field, const char* help) {
        CLI::Option* o = app->add_option(name, f.cfg.*field, help);
        f.given.emplace_back(o, [&f, field](TrainConfig& c) { c.*field = f.cfg.*field; });
    };
    bind("--layers", &TrainConfig::encoder_layers, "encoder layers");
    bind("--hidden", &TrainConfig::hidden, "encoder hidden width");
    bind("--lr", &TrainConfig::learning_rate, "Adam learning rate");
    bind("--iterations", &TrainConfig::iterations, "training iterations N_O");
    bind("--batch", &TrainConfig::batch, "minibatch size");
    bind("--M", &TrainConfig::M, "critic scale M");
    bind("--t", &TrainConfig::t, "critic shift t");
}

struct MetaFlags {
    MetaConfig cfg;
    double eta_meta = 0.0;
    std::size_t inner_steps = 0;
    std::string optimizer = "pepg";
    std::vector<std::pair<CLI::Option*, std::function<void(MetaConfig&)>>> given;
};

void add_meta_flags(CLI::App* app, MetaFlags& f) {
    auto bind = [&](const char* name, auto MetaConfig::*field, const char* help) {
        CLI::Option* o = app->add_option(name, f.cfg.*field, help);
        f.given.emplace_back(o, [&f, field](MetaConfig& c) { c.*field = f.cfg.*field; });
    };
    bind("--meta-iterations", &MetaConfig::outer_iterations, "outer iterations N_M");
    bind("--tasks", &MetaConfig::tasks_per_iteration, "tasks per outer iteration N_T");
    bind("--meta-fraction", &MetaConfig::meta_train_fraction, "meta-train fraction r");
    bind("--inner-cap", &MetaConfig::inner_cap, "cap on adaptation steps");
    bind("--augmentation", &MetaConfig::augmentation, "augmentation mode, e.g. m(P(O(.)))");
    bind("--population", &MetaConfig::population, "PEPG perturbation pairs");
    bind("--sigma-init", &MetaConfig::sigma_init, "PEPG initial sigma");
    f.given.emplace_back(app->add_option("--eta-meta", f.eta_meta, "meta step size (default lr/3)"),
                         [&f](MetaConfig& c) { c.eta_meta = f.eta_meta; });
    f.given.emplace_back(app->add_option("--inner-steps", f.inner_steps, "adaptation steps per task"),
                         [&f](MetaConfig& c) { c.inner_steps = f.inner_steps; });
    f.given.emplace_back(
        app->add_option("--optimizer", f.optimizer, "pepg | bptt-first-order"),
        [&f](MetaConfig& c) { c.optimizer = parse_meta_optimizer(f.optimizer); });
}

template <class Cfg, class Flags>
void apply_given(Cfg& cfg, const Flags& f) {
    for (const auto& [opt, set] : f.given)
        if (opt->count()) set(cfg);
}

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

json gen_sidecar(const DatasetSource& src, std::optional<double> truth) {
    json j;
    if (src.kind == DatasetSource::Kind::gaussian) {
        j = json{{"generator", "gaussian"}, {"k", src.gaussian.k}, {"rho", src.gaussian.rho},
                 {"n", src.gaussian.n},     {"seed", src.gaussian.seed}};
    } else {
        j = json{{"generator", "sine"},          {"a", src.sine.a},   {"phase", src.sine.phase},
                 {"noise_sigma", src.sine.noise_sigma}, {"n", src.sine.n}, {"seed", src.sine.seed}};
    }
    j["ground_truth"] = truth ? json(*truth) : json(nullptr);
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Data-efficient mutual information estimation", "demine"};
    app.require_subcommand(1);

    // gen
    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset as CSV");
    gen->require_subcommand(1);
    DatasetFlags gen_flags;
    std::string gen_out;
    bool gen_truth = false;
    std::size_t oracle_samples = kSineOracleSamples;
    std::string cache_dir;
    CLI::App* gen_gauss = gen->add_subcommand("gaussian", "correlated Gaussian pairs");
    CLI::App* gen_sin = gen->add_subcommand("sine", "noisy sine pairs");
    for (CLI::App* sub : {gen_gauss, gen_sin}) {
        sub->add_option("--k", gen_flags.k, "dimension");
        sub->add_option("--rho", gen_flags.rho, "correlation");
        sub->add_option("--n", gen_flags.n, "sample count");
        sub->add_option("--a", gen_flags.a, "sine frequency");
        sub->add_option("--phase", gen_flags.phase, "sine phase");
        sub->add_option("--noise", gen_flags.noise, "sine noise sigma");
        sub->add_option("--seed", gen_flags.seed, "seed");
        sub->add_option("--out", gen_out, "CSV path (stdout if omitted); sidecar JSON goes to <out>.json");
    }
    gen_sin->add_flag("--ground-truth", gen_truth, "compute the KSG oracle value for the sidecar");
    gen_sin->add_option("--oracle-samples", oracle_samples, "oracle sample count");
    gen_sin->add_option("--cache-dir", cache_dir, "cache directory for oracle values");

    // estimate
    CLI::App* est = app.add_subcommand("estimate", "estimate mutual information");
    DatasetFlags est_data;
    add_dataset_flags(est, est_data);
    TrainFlags est_train;
    add_train_flags(est, est_train);
    MetaFlags est_meta;
    add_meta_flags(est, est_meta);
    std::string method = "demine";
    std::string config_path, est_out, est_search;
    std::size_t est_budget = kDeskSearchBudget;
    std::size_t est_folds = 3;
    double est_delta = 0.05;
    std::vector<std::uint64_t> est_seeds;
    bool est_paper = false, est_timing = false;
    CLI::Option* method_opt =
        est->add_option("--method", method, "demine | meta-demine | mine-f-es | ksg")
            ->check(CLI::IsMember({"demine", "meta-demine", "mine-f-es", "ksg"}));
    est->add_option("--config", config_path, "experiment config JSON; flags given explicitly override it");
    CLI::Option* search_opt =
        est->add_option("--search", est_search, "select hyperparameters by random search: vr | sig")
            ->check(CLI::IsMember({"vr", "sig"}));
    CLI::Option* budget_opt = est->add_option("--budget", est_budget, "search trials");
    CLI::Option* folds_opt = est->add_option("--folds", est_folds, "cross-validation folds");
    CLI::Option* paper_opt = est->add_flag("--paper-scale", est_paper, "paper search ranges");
    CLI::Option* delta_opt = est->add_option("--delta", est_delta, "failure probability of the interval");
    CLI::Option* seeds_opt = est->add_option("--seed,--seeds", est_seeds, "estimator seed(s)");
    CLI::Option* out_opt = est->add_option("--out", est_out, "report path (stdout if omitted)");
    est->add_flag("--timing", est_timing, "include wall time in the report");

    // complexity
    CLI::App* cx = app.add_subcommand("complexity", "sample-complexity calculators");
    cx->require_subcommand(1);
    MineComplexityInput mine_in;
    CLI::App* cx_mine = cx->add_subcommand("mine", "samples needed by the MINE bound");
    cx_mine->add_option("--d", mine_in.d, "parameter count")->required();
    cx_mine->add_option("--M", mine_in.M, "score bound M");
    cx_mine->add_option("--K", mine_in.K, "parameter box K");
    cx_mine->add_option("--lip", mine_in.lipschitz, "Lipschitz constant");
    cx_mine->add_option("--eps", mine_in.eps, "accuracy");
    cx_mine->add_option("--delta", mine_in.delta, "failure probability");
    ScoreRange cx_range;
    double cx_eps = 0.1, cx_delta = 0.05, cx_n = 0.0;
    CLI::App* cx_demine = cx->add_subcommand("demine", "samples needed by the predictive estimator");
    cx_demine->add_option("--L", cx_range.lower, "score lower bound");
    cx_demine->add_option("--U", cx_range.upper, "score upper bound");
    CLI::Option* cx_eps_opt = cx_demine->add_option("--eps", cx_eps, "accuracy");
    CLI::Option* cx_n_opt = cx_demine->add_option("--n", cx_n, "validation size; prints eps instead of n");
    cx_eps_opt->excludes(cx_n_opt);
    cx_demine->add_option("--delta", cx_delta, "failure probability");

    // search
    CLI::App* srch = app.add_subcommand("search", "hyperparameter search on the training half");
    DatasetFlags srch_data;
    add_dataset_flags(srch, srch_data);
    std::string srch_mode = "vr", srch_trace, srch_out;
    std::size_t srch_budget = kDeskSearchBudget, srch_folds = 3;
    std::uint64_t srch_seed = 0;
    double srch_delta = 0.05;
    bool srch_paper = false;
    srch->add_option("--criterion", srch_mode, "vr | sig")->check(CLI::IsMember({"vr", "sig"}));
    srch->add_option("--budget", srch_budget, "trials");
    srch->add_option("--folds", srch_folds, "cross-validation folds");
    srch->add_option("--seed", srch_seed, "seed of the split and the search");
    srch->add_option("--delta", srch_delta, "failure probability for the sig criterion");
    srch->add_flag("--paper-scale", srch_paper, "paper search ranges");
    srch->add_option("--trace", srch_trace, "per-trial CSV path");
    srch->add_option("--out", srch_out, "best config JSON path (stdout if omitted)");

    // bench
    CLI::App* bench = app.add_subcommand("bench", "synthetic benchmark suites");
    BenchOptions bopts;
    std::string bench_cache;
    bench->add_option("--suite", bopts.suite, "suite name")->required()->check(CLI::IsMember(bench_suites()));
    bench->add_option("--scale", bopts.scale, "multiplier on search budget and N_M");
    bench->add_flag("--paper-scale", bopts.paper_scale, "paper budgets and ranges");
    bench->add_option("--seeds", bopts.seeds, "seeds per point");
    bench->add_option("--seed", bopts.master_seed, "master seed");
    bench->add_option("--delta", bopts.delta, "failure probability");
    bench->add_option("--out-dir", bopts.out_dir, "output directory");
    bench->add_option("--workers", bopts.workers, "seeds run concurrently (default DEMINE_WORKERS)");
    bench->add_option("--oracle-samples", bopts.sine_oracle_samples, "sine oracle sample count");
    bench->add_option("--cache-dir", bench_cache, "cache directory for oracle values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (gen->parsed()) {
            DatasetSource src;
            std::optional<double> truth;
            if (gen_gauss->parsed()) {
                src.kind = DatasetSource::Kind::gaussian;
                src.gaussian = GaussianSpec{gen_flags.k, gen_flags.rho, gen_flags.n, gen_flags.seed};
                validate(src.gaussian);
                truth = gaussian_ground_truth(src.gaussian.k, src.gaussian.rho);
            } else {
                src.kind = DatasetSource::Kind::sine;
                src.sine = SineSpec{gen_flags.a, gen_flags.phase, gen_flags.noise, gen_flags.n, gen_flags.seed};
                validate(src.sine);
                if (gen_truth) {
                    std::optional<std::filesystem::path> cache;
                    if (!cache_dir.empty()) cache = cache_dir;
                    truth = sine_ground_truth(src.sine, oracle_samples, cache);
                }
            }
            std::ostringstream csv;
            write_csv(load_dataset(src), csv);
            write_text(csv.str(), gen_out, out);
            if (!gen_out.empty()) write_text(dump(gen_sidecar(src, truth)), gen_out + ".json", out);
            return 0;
        }

        if (est->parsed()) {
            ExperimentConfig cfg;
            if (!config_path.empty()) {
                std::ifstream f(config_path);
                if (!f) throw InputError("cannot open config " + config_path);
                json j;
                try {
                    j = json::parse(f);
                } catch (const json::exception& e) {
                    throw InputError(config_path + ": " + e.what());
                }
                cfg = experiment_from_json(j);
            }
            if (method_opt->count() || config_path.empty()) cfg.method = method;
            if (dataset_flags_given(est_data)) cfg.dataset = to_source(est_data);
            apply_given(cfg.train, est_train);
            apply_given(cfg.meta, est_meta);
            if (search_opt->count()) {
                SearchCriterion c = cfg.search.value_or(SearchCriterion{});
                c.mode = parse_search_mode(est_search);
                cfg.search = c;
            }
            if (cfg.search && folds_opt->count()) cfg.search->folds = est_folds;
            if (budget_opt->count()) cfg.search_budget = est_budget;
            if (paper_opt->count()) cfg.paper_scale = est_paper;
            if (delta_opt->count()) cfg.delta = est_delta;
            if (seeds_opt->count()) cfg.seeds = est_seeds;
            if (out_opt->count()) cfg.output = est_out;
            const auto reports = run_experiment(cfg);
            json j;
            if (reports.size() == 1) {
                j = to_json(reports.front(), est_timing);
            } else {
                j = json::array();
                for (const auto& r : reports) j.push_back(to_json(r, est_timing));
            }
            write_text(dump(j), cfg.output ? cfg.output->string() : std::string(), out);
            return 0;
        }

        if (cx->parsed()) {
            if (cx_mine->parsed()) {
                out << mine_sample_complexity(mine_in) << "\n";
            } else if (cx_n_opt->count()) {
                out << format_double(demine_epsilon(cx_range, cx_n, cx_delta)) << "\n";
            } else {
                out << demine_sample_complexity(cx_range, cx_eps, cx_delta) << "\n";
            }
            return 0;
        }

        if (srch->parsed()) {
            SearchCriterion c;
            c.mode = parse_search_mode(srch_mode);
            c.folds = srch_folds;
            c.delta = srch_delta;
            const DatasetSource src = to_source(srch_data);
            const bool sine = src.kind == DatasetSource::Kind::sine;
            const SearchSpace space = srch_paper ? SearchSpace::paper(sine) : SearchSpace::desk(sine);
            const SearchResult result = search_on_train_split(load_dataset(src), c, space, srch_budget, srch_seed);
            if (!srch_trace.empty()) {
                std::ostringstream trace;
                write_trace_csv(result, trace);
                write_text(trace.str(), srch_trace, out);
            }
            const json best{{"criterion", to_string(c.mode)},
                            {"best_trial", result.best_index},
                            {"score", result.trials[result.best_index].score},
                            {"train", to_json(result.best)}};
            write_text(dump(best), srch_out, out);
            return 0;
        }

        if (bench->parsed()) {
            if (!bench_cache.empty()) bopts.cache_dir = bench_cache;
            if (!bench->get_option("--workers")->count()) bopts.workers = worker_count();
            const BenchResult result = run_benchmark(bopts);
            write_summary_csv(result.summary, out);
            return 0;
        }
    } catch (const std::exception& e) {
        const char* type = "error";
        if (dynamic_cast<const InputError*>(&e)) type = "input_error";
        else if (dynamic_cast<const DomainError*>(&e)) type = "domain_error";
        else if (dynamic_cast<const TrainingError*>(&e)) type = "training_error";
        err << json{{"error", {{"type", type}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}

} // namespace demine
