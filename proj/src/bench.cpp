#include "demine/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <tuple>

#include "demine/baselines.hpp"
#include "demine/errors.hpp"
#include "demine/meta.hpp"
#include "demine/parallel.hpp"
#include "demine/search.hpp"
#include "demine/synthetic.hpp"

namespace demine {

namespace {

const std::vector<std::size_t> kSampleGrid{30, 100, 300, 1000, 3000};

const std::vector<std::string> kAugmentationModes{"\xC2\xB7", "O", "G", "m", "P", "m(P)", "m(P(O))", "m(P(O(G)))"};

std::size_t scaled(std::size_t base, double scale) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(base) * scale)));
}

PairedDataset make_data(const BenchPoint& p, std::uint64_t seed) {
    if (p.dataset == "sine") return gen_sine(SineSpec{.a = p.a, .n = p.n, .seed = seed});
    return gen_gaussian(GaussianSpec{p.k, p.rho, p.n, seed});
}

double ground_truth(const BenchPoint& p, const BenchOptions& opts) {
    if (p.dataset == "sine")
        return sine_ground_truth(SineSpec{.a = p.a, .seed = 0}, opts.sine_oracle_samples, opts.cache_dir);
    return gaussian_ground_truth(p.k, p.rho);
}

// All methods of one (point, seed). Searches are shared between DEMINE and
// Meta-DEMINE of the same criterion.
std::vector<BenchRow> run_cell(const BenchPoint& point, const std::vector<BenchMethod>& methods,
                               std::size_t seed_index, const BenchOptions& opts, double truth) {
    const std::uint64_t seed = cell_seed(opts.master_seed, point, seed_index);
    const PairedDataset ds = make_data(point, derive_seed(seed, "data"));
    const std::uint64_t est_seed = derive_seed(seed, "estimator");
    const bool sine = point.dataset == "sine";
    const SearchSpace space = opts.paper_scale ? SearchSpace::paper(sine) : SearchSpace::desk(sine);

    std::map<std::string, TrainConfig> searched;
    auto config_for = [&](const std::string& criterion) {
        auto it = searched.find(criterion);
        if (it != searched.end()) return it->second;
        SearchCriterion c;
        c.mode = parse_search_mode(criterion);
        c.delta = opts.delta;
        const TrainConfig best = search_on_train_split(ds, c, space, opts.search_budget(), est_seed).best;
        searched.emplace(criterion, best);
        return best;
    };

    std::vector<BenchRow> rows;
    for (const BenchMethod& m : methods) {
        BenchRow row;
        row.point = point;
        row.method = m;
        row.seed_index = seed_index;
        row.seed = seed;
        row.ground_truth = truth;
        if (m.name == "ksg") {
            row.report = ksg_report(ds, KsgConfig{.jitter_seed = derive_seed(seed, "ksg-jitter")});
        } else if (m.name == "mine-f-es") {
            const TrainConfig cfg = config_for("vr");
            row.report = mine_f_es(ds, cfg, EarlyStopPolicy{cfg.iterations}, est_seed);
        } else if (m.name == "demine-vr" || m.name == "demine-sig") {
            row.report = demine_estimate(ds, config_for(m.name.substr(7)), opts.delta);
            row.report.method = m.name;
        } else if (m.name == "meta-demine-vr" || m.name == "meta-demine-sig") {
            MetaConfig meta;
            meta.outer_iterations = opts.meta_iterations();
            if (!m.mode.empty()) meta.augmentation = m.mode;
            meta.inner_steps = m.adaptation_steps;
            row.report = meta_demine_estimate(ds, config_for(m.name.substr(12)), meta, opts.delta);
            row.report.method = m.name;
        } else {
            throw InputError("unknown bench method '" + m.name + "'");
        }
        validate(row.report);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_optional(std::ostream& out, const std::optional<double>& v) {
    if (v) out << format_double(*v);
}

} // namespace

std::size_t BenchOptions::search_budget() const {
    return paper_scale ? kPaperSearchBudget : scaled(kDeskSearchBudget, scale);
}

std::size_t BenchOptions::meta_iterations() const {
    return paper_scale ? kPaperMetaIterations : scaled(kDeskMetaIterations, scale);
}

std::string BenchPoint::key() const {
    if (dataset == "sine") return "sine_a" + format_double(a) + "_n" + std::to_string(n);
    return "gaussian_k" + std::to_string(k) + "_rho" + format_double(rho) + "_n" + std::to_string(n);
}

std::string BenchMethod::label() const {
    std::string s = name;
    if (!mode.empty()) s += "[" + mode + "]";
    if (adaptation_steps) s += "[N_O=" + std::to_string(*adaptation_steps) + "]";
    return s;
}

std::vector<std::string> bench_suites() {
    return {"rho-sweep-20d", "n-sweep-1d", "n-sweep-20d", "n-sweep-sine", "task-augmentation"};
}

std::vector<BenchPoint> suite_points(const std::string& suite) {
    std::vector<BenchPoint> pts;
    if (suite == "rho-sweep-20d") {
        for (double rho : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}) pts.push_back({"gaussian", 20, rho, 0.0, 300});
    } else if (suite == "n-sweep-1d") {
        for (std::size_t n : kSampleGrid) pts.push_back({"gaussian", 1, 0.8, 0.0, n});
    } else if (suite == "n-sweep-20d") {
        for (std::size_t n : kSampleGrid) pts.push_back({"gaussian", 20, 0.3, 0.0, n});
    } else if (suite == "n-sweep-sine") {
        for (std::size_t n : kSampleGrid) pts.push_back({"sine", 1, 0.0, 8.0 * std::numbers::pi, n});
    } else if (suite == "task-augmentation") {
        pts.push_back({"gaussian", 20, 0.3, 0.0, 300});
    } else {
        throw InputError("unknown bench suite '" + suite + "'");
    }
    return pts;
}

std::vector<BenchMethod> suite_methods(const std::string& suite) {
    if (suite == "task-augmentation") {
        std::vector<BenchMethod> ms{{"demine-vr", "", std::nullopt}};
        for (std::size_t n_o : {0, 10, 20})
            for (const auto& mode : kAugmentationModes) ms.push_back({"meta-demine-vr", mode, n_o});
        return ms;
    }
    suite_points(suite);
    return {{"ksg", "", std::nullopt},       {"mine-f-es", "", std::nullopt},
            {"demine-vr", "", std::nullopt}, {"demine-sig", "", std::nullopt},
            {"meta-demine-vr", "", std::nullopt}, {"meta-demine-sig", "", std::nullopt}};
}

std::uint64_t cell_seed(std::uint64_t master, const BenchPoint& point, std::size_t seed_index) {
    return derive_seed(master, "bench-cell", {hash_tag(point.key()), seed_index});
}

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
    std::vector<BenchSummary> out;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::vector<std::vector<const BenchRow*>> groups;
    for (const BenchRow& r : rows) {
        const auto key = std::make_pair(r.point.key(), r.method.label());
        auto [it, inserted] = index.emplace(key, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(&r);
    }
    for (const auto& g : groups) {
        BenchSummary s;
        s.point = g.front()->point;
        s.method = g.front()->method;
        s.count = g.size();
        s.ground_truth = g.front()->ground_truth;
        s.min = s.max = g.front()->report.point_estimate;
        double sum = 0.0, eps_sum = 0.0, dependent = 0.0;
        bool has_eps = true;
        for (const BenchRow* r : g) {
            const double v = r->report.point_estimate;
            sum += v;
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
            if (r->report.epsilon) {
                eps_sum += *r->report.epsilon;
                if (r->report.significance == Significance::dependent) dependent += 1.0;
            } else {
                has_eps = false;
            }
        }
        const double n = static_cast<double>(g.size());
        s.mean = sum / n;
        double ss = 0.0;
        for (const BenchRow* r : g) ss += (r->report.point_estimate - s.mean) * (r->report.point_estimate - s.mean);
        s.std = g.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        if (has_eps) {
            s.mean_epsilon = eps_sum / n;
            s.dependent_rate = dependent / n;
        }
        out.push_back(s);
    }
    return out;
}

void write_rows_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << "dataset,k,rho,a,n,method,seed_index,seed,ground_truth,estimate,epsilon,lower,verdict,n_train,n_val\n";
    for (const BenchRow& r : rows) {
        const auto& p = r.point;
        out << p.dataset << ',' << p.k << ',' << format_double(p.rho) << ',' << format_double(p.a) << ',' << p.n << ','
            << r.method.label() << ',' << r.seed_index << ',' << r.seed << ',' << format_double(r.ground_truth) << ','
            << format_double(r.report.point_estimate) << ',';
        write_optional(out, r.report.epsilon);
        out << ',';
        if (r.report.epsilon) out << format_double(r.report.point_estimate - *r.report.epsilon);
        out << ',';
        if (r.report.significance) out << to_string(*r.report.significance);
        out << ',' << r.report.n_train << ',' << r.report.n_val << '\n';
    }
}

void write_summary_csv(const std::vector<BenchSummary>& summary, std::ostream& out) {
    out << "dataset,k,rho,a,n,method,count,ground_truth,mean,std,min,max,mean_epsilon,dependent_rate\n";
    for (const BenchSummary& s : summary) {
        const auto& p = s.point;
        out << p.dataset << ',' << p.k << ',' << format_double(p.rho) << ',' << format_double(p.a) << ',' << p.n << ','
            << s.method.label() << ',' << s.count << ',' << format_double(s.ground_truth) << ','
            << format_double(s.mean) << ',' << format_double(s.std) << ',' << format_double(s.min) << ','
            << format_double(s.max) << ',';
        write_optional(out, s.mean_epsilon);
        out << ',';
        write_optional(out, s.dependent_rate);
        out << '\n';
    }
}

BenchResult run_benchmark(const BenchOptions& opts) {
    if (opts.seeds < 1) throw InputError("bench needs at least one seed");
    if (!(opts.scale > 0.0)) throw InputError("bench scale must be > 0");
    const auto points = suite_points(opts.suite);
    const auto methods = suite_methods(opts.suite);
    const std::filesystem::path dir = opts.out_dir / opts.suite;
    std::filesystem::create_directories(dir);

    BenchResult result;
    result.suite = opts.suite;
    for (const BenchPoint& point : points) {
        const double truth = ground_truth(point, opts);
        std::vector<std::vector<BenchRow>> per_seed(opts.seeds);
        parallel_for(opts.seeds, std::max<std::size_t>(1, opts.workers),
                     [&](std::size_t s) { per_seed[s] = run_cell(point, methods, s, opts, truth); });
        std::vector<BenchRow> point_rows;
        for (auto& rows : per_seed)
            for (auto& r : rows) point_rows.push_back(std::move(r));
        std::ofstream f(dir / (point.key() + ".csv"), std::ios::binary);
        if (!f) throw InputError("cannot write bench output in " + dir.string());
        write_rows_csv(point_rows, f);
        for (auto& r : point_rows) result.rows.push_back(std::move(r));
    }
    result.summary = summarize(result.rows);
    std::ofstream f(dir / "summary.csv", std::ios::binary);
    if (!f) throw InputError("cannot write bench summary in " + dir.string());
    write_summary_csv(result.summary, f);
    return result;
}

} // namespace demine
