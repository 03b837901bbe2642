#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "demine/bounds.hpp"
#include "demine/errors.hpp"
#include "demine/estimator.hpp"
#include "demine/search.hpp"
#include "demine/synthetic.hpp"

using namespace demine;

namespace {

TrainConfig small_config(std::uint64_t seed) {
    TrainConfig c;
    c.encoder_layers = 2;
    c.hidden = 16;
    c.learning_rate = 0.01;
    c.iterations = 40;
    c.batch = 128;
    c.seed = seed;
    return c;
}

double train_set_estimate(const Critic& c, const PairedDataset& ds) {
    return estimate(BoundKind::mine_f, c.forward_batch(ds.x, ds.z));
}

} // namespace

TEST_CASE("zero iterations returns the initial critic") {
    const PairedDataset ds = gen_gaussian({1, 0.8, 100, 1});
    TrainConfig c = small_config(5);
    c.iterations = 0;
    CHECK(train_critic(ds, c).parameters() == initial_critic(1, 1, c).parameters());
}

TEST_CASE("training raises the training-set bound") {
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const PairedDataset ds = gen_gaussian({1, 0.8, 1000, seed});
        TrainConfig c = small_config(seed);
        c.iterations = 60;
        const double before = train_set_estimate(initial_critic(1, 1, c), ds);
        const double after = train_set_estimate(train_critic(ds, c), ds);
        improved += after > before;
    }
    CHECK(improved >= 4);
}

TEST_CASE("training is deterministic") {
    const PairedDataset ds = gen_gaussian({3, 0.4, 200, 2});
    CHECK(train_critic(ds, small_config(9)).parameters() == train_critic(ds, small_config(9)).parameters());
    CHECK(train_critic(ds, small_config(9)).parameters() != train_critic(ds, small_config(10)).parameters());
}

TEST_CASE("validation rows never influence training") {
    PairedDataset ds = gen_gaussian({2, 0.5, 400, 3});
    const TrainConfig cfg = small_config(4);
    const EstimateReport clean = demine_estimate(ds, cfg, 0.05);

    // Poison exactly the validation half with huge values.
    TrainConfig probe;
    probe.seed = cfg.seed;
    auto [train, val] = split(ds, 0.5, split_seed(probe));
    std::set<std::tuple<double, double>> train_keys;
    for (Eigen::Index i = 0; i < train.x.rows(); ++i) train_keys.insert({train.x(i, 0), train.x(i, 1)});
    PairedDataset poisoned = ds;
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i)
        if (!train_keys.count({ds.x(i, 0), ds.x(i, 1)})) {
            poisoned.x.row(i).setConstant(1e6);
            poisoned.z.row(i).setConstant(-1e6);
        }
    auto [ptrain, pval] = split(poisoned, 0.5, split_seed(probe));
    CHECK(ptrain.x == train.x);
    CHECK(train_critic(ptrain, cfg).parameters() == train_critic(train, cfg).parameters());
    const EstimateReport dirty = demine_estimate(poisoned, cfg, 0.05);
    CHECK(dirty.point_estimate != clean.point_estimate);
    CHECK(dirty.epsilon == clean.epsilon);
}

TEST_CASE("constant critic gives exactly zero and no verdict") {
    const PairedDataset ds = gen_gaussian({1, 0.9, 200, 1});
    Critic c = initial_critic(1, 1, small_config(1));
    c.set_head(0.0, 0.0);
    const EstimateReport r = evaluate_critic(c, ds, 0.05, 0);
    CHECK(r.point_estimate == 0.0);
    CHECK(r.significance == Significance::not_significant);
}

TEST_CASE("demine report fields") {
    const PairedDataset ds = gen_gaussian({1, 0.8, 600, 7});
    TrainConfig cfg = small_config(3);
    cfg.M = 0.5;
    cfg.t = 0.2;
    const EstimateReport r = demine_estimate(ds, cfg, 0.05);
    CHECK(r.n_train == 300);
    CHECK(r.n_val == 300);
    CHECK(r.range->lower == doctest::Approx(-0.6));
    CHECK(r.range->upper == doctest::Approx(0.4));
    CHECK(*r.epsilon == doctest::Approx(demine_epsilon({-0.6, 0.4}, 300, 0.05)));
    CHECK(r.significance == significance_verdict(r.point_estimate, *r.epsilon));
    CHECK(*r.eb1_bound >= *r.mine_bound);
    CHECK(*r.mine_bound >= r.point_estimate);
    validate(r);
    const EstimateReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
    CHECK(to_json(back).dump() == to_json(r).dump());
}

TEST_CASE("blocked MINE-f equals the dense matrix") {
    const PairedDataset ds = gen_gaussian({2, 0.3, 1500, 2});
    const Critic c = initial_critic(2, 2, small_config(2));
    CHECK(mine_f_on(c, ds) == doctest::Approx(estimate(BoundKind::mine_f, c.forward_batch(ds.x, ds.z))).epsilon(1e-12));
}

TEST_CASE("config validation") {
    TrainConfig c;
    c.M = 0.0;
    CHECK_THROWS_AS(validate(c), InputError);
    c = TrainConfig{};
    c.t = 1.5;
    CHECK_THROWS_AS(validate(c), InputError);
    CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"hidden", "wide"}}), InputError);
    const TrainConfig parsed = train_config_from_json(to_json(small_config(77)));
    CHECK(parsed.seed == 77);
    CHECK(parsed.hidden == 16);
}

TEST_CASE("k-fold indices partition the rows") {
    const auto folds = kfold_indices(31, 3, 5);
    std::multiset<std::size_t> all;
    for (const auto& f : folds) {
        CHECK(f.size() >= 10);
        all.insert(f.begin(), f.end());
    }
    CHECK(all.size() == 31);
    CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 31);
    CHECK_THROWS_AS(kfold_indices(5, 3, 0), InputError);
}

TEST_CASE("trial scores follow the two criteria") {
    const PairedDataset ds = gen_gaussian({1, 0.8, 300, 1});
    const TrainConfig cfg = small_config(2);
    SearchCriterion vr;
    const SearchTrial a = evaluate_trial(ds, cfg, vr, 11);
    CHECK(a.fold_estimates.size() == 3);
    CHECK(a.score == doctest::Approx(a.mu - 2 * a.sigma / std::sqrt(3.0)));
    SearchCriterion sig;
    sig.mode = SearchCriterion::Mode::sig;
    const SearchTrial b = evaluate_trial(ds, cfg, sig, 11);
    CHECK(b.mu == a.mu);
    CHECK(b.score == doctest::Approx(b.mu - demine_epsilon(cfg.score_range(), 100, 0.05)));
}

TEST_CASE("search is deterministic and independent of worker count") {
    const PairedDataset ds = gen_gaussian({1, 0.8, 120, 3});
    SearchSpace space = SearchSpace::desk();
    space.hidden_max = 16;
    space.iterations_max = 20;
    SearchCriterion crit;
    setenv("DEMINE_WORKERS", "1", 1);
    const SearchResult one = hyperparameter_search(ds, crit, space, 6, 4);
    setenv("DEMINE_WORKERS", "3", 1);
    const SearchResult three = hyperparameter_search(ds, crit, space, 6, 4);
    unsetenv("DEMINE_WORKERS");
    std::ostringstream a, b;
    write_trace_csv(one, a);
    write_trace_csv(three, b);
    CHECK(a.str() == b.str());
    for (std::size_t i = 0; i < one.trials.size(); ++i) CHECK(one.trials[i].score <= one.trials[one.best_index].score);
    for (std::size_t i = 0; i < one.best_index; ++i) CHECK(one.trials[i].score < one.trials[one.best_index].score);
}

TEST_CASE("sampled configs stay inside the search space") {
    const SearchSpace s = SearchSpace::paper(true);
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const TrainConfig c = sample_config(s, rng);
        CHECK(c.encoder_layers >= 1);
        CHECK(c.encoder_layers <= 5);
        CHECK(c.hidden >= 8);
        CHECK(c.hidden <= 256);
        CHECK(c.learning_rate >= 1e-4);
        CHECK(c.learning_rate <= 3e-1);
        CHECK(c.iterations >= 5);
        CHECK(c.iterations <= 5000);
        CHECK(c.batch >= 256);
        CHECK(c.batch <= 1024);
        CHECK(c.M >= 1e-3);
        CHECK(c.M <= 5.0);
        CHECK(c.t >= -1.0);
        CHECK(c.t <= 1.0);
    }
}

TEST_CASE("search never sees the validation half") {
    PairedDataset ds = gen_gaussian({1, 0.8, 200, 9});
    SearchSpace space = SearchSpace::desk();
    space.hidden_max = 8;
    space.iterations_max = 10;
    const SearchResult clean = search_on_train_split(ds, {}, space, 3, 6);
    TrainConfig probe;
    probe.seed = 6;
    auto [train, val] = split(ds, 0.5, split_seed(probe));
    std::set<double> train_x;
    for (Eigen::Index i = 0; i < train.x.rows(); ++i) train_x.insert(train.x(i, 0));
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i)
        if (!train_x.count(ds.x(i, 0))) ds.z(i, 0) = 1e3;
    const SearchResult dirty = search_on_train_split(ds, {}, space, 3, 6);
    std::ostringstream a, b;
    write_trace_csv(clean, a);
    write_trace_csv(dirty, b);
    CHECK(a.str() == b.str());
    CHECK(clean.best.seed == 6);
}
