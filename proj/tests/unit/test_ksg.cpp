#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "demine/baselines.hpp"
#include "demine/errors.hpp"
#include "demine/ksg.hpp"
#include "demine/synthetic.hpp"

using namespace demine;

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// O(n^2) KSG without trees, digamma of integers from the harmonic series.
double harmonic_digamma(std::size_t m) {
    double h = 0.0;
    for (std::size_t i = 1; i < m; ++i) h += 1.0 / double(i);
    return h - kEulerGamma;
}

double brute_ksg(const PairedDataset& ds, std::size_t k) {
    const auto n = static_cast<Eigen::Index>(ds.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> d;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = (ds.x.row(i) - ds.x.row(j)).cwiseAbs().maxCoeff();
            const double dz = (ds.z.row(i) - ds.z.row(j)).cwiseAbs().maxCoeff();
            d.push_back(std::max(dx, dz));
        }
        std::nth_element(d.begin(), d.begin() + static_cast<long>(k - 1), d.end());
        const double eps = d[k - 1];
        std::size_t nx = 0, nz = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            if ((ds.x.row(i) - ds.x.row(j)).cwiseAbs().maxCoeff() < eps) ++nx;
            if ((ds.z.row(i) - ds.z.row(j)).cwiseAbs().maxCoeff() < eps) ++nz;
        }
        acc += harmonic_digamma(nx + 1) + harmonic_digamma(nz + 1);
    }
    return harmonic_digamma(k) + harmonic_digamma(static_cast<std::size_t>(n)) - acc / double(n);
}

PairedDataset uniforms(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PairedDataset ds;
    ds.x.resize(static_cast<Eigen::Index>(n), 1);
    ds.z.resize(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) {
        ds.x(static_cast<Eigen::Index>(i), 0) = u(rng);
        ds.z(static_cast<Eigen::Index>(i), 0) = u(rng);
    }
    return ds;
}

} // namespace

TEST_CASE("digamma") {
    CHECK(digamma(1.0) == doctest::Approx(-kEulerGamma).epsilon(1e-12));
    CHECK(digamma(2.0) == doctest::Approx(1.0 - kEulerGamma).epsilon(1e-12));
    CHECK(digamma(0.5) == doctest::Approx(-kEulerGamma - 2.0 * std::numbers::ln2).epsilon(1e-12));
    for (std::size_t m : {3, 10, 57, 1000}) CHECK(digamma(double(m)) == doctest::Approx(harmonic_digamma(m)).epsilon(1e-11));
    Rng rng(2);
    std::uniform_real_distribution<double> u(0.01, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        CHECK(std::abs(digamma(x + 1) - digamma(x) - 1.0 / x) < 1e-12);
    }
    CHECK_THROWS_AS(digamma(0.0), DomainError);
}

TEST_CASE("tree KSG equals the brute-force definition") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const PairedDataset ds = gen_gaussian({2, 0.6, 400, seed});
        CHECK(ksg_estimate(ds) == doctest::Approx(brute_ksg(ds, 3)).epsilon(1e-12));
    }
    const PairedDataset u = uniforms(300, 8);
    CHECK(ksg_estimate(u, {5, 0}) == doctest::Approx(brute_ksg(u, 5)).epsilon(1e-12));
}

TEST_CASE("KSG accuracy and invariances") {
    CHECK(std::abs(ksg_estimate(uniforms(2000, 5))) < 0.05);
    const PairedDataset g = gen_gaussian({1, 0.8, 20000, 6});
    const double base = ksg_estimate(g);
    CHECK(std::abs(base - gaussian_ground_truth(1, 0.8)) < 0.03);

    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::reverse(order.begin(), order.end());
    CHECK(ksg_estimate(select_rows(g, order)) == doctest::Approx(base).epsilon(1e-12));

    const PairedDataset small = gen_gaussian({1, 0.5, 2000, 7});
    PairedDataset warped = small;
    warped.x = small.x.array().cube().matrix();
    CHECK(std::abs(ksg_estimate(warped) - ksg_estimate(small)) < 0.05);
}

TEST_CASE("KSG preconditions and duplicates") {
    CHECK_THROWS_AS(ksg_estimate(gen_gaussian({1, 0.5, 3, 1})), InputError);
    PairedDataset dup = gen_gaussian({1, 0.5, 200, 1});
    for (Eigen::Index i = 0; i < 10; ++i) {
        dup.x.row(i + 10) = dup.x.row(i);
        dup.z.row(i + 10) = dup.z.row(i);
    }
    CHECK(std::isfinite(ksg_estimate(dup)));
}

TEST_CASE("MINE-f-ES reports") {
    const PairedDataset ds = gen_gaussian({1, 0.0, 300, 4});
    TrainConfig cfg;
    cfg.hidden = 16;
    const EstimateReport untrained = mine_f_es(ds, cfg, {0}, 1);
    const ScoreRange r = mine_f_estimate_range(*untrained.range);
    CHECK(untrained.point_estimate >= r.lower);
    CHECK(untrained.point_estimate <= r.upper);
    CHECK_FALSE(untrained.epsilon.has_value());
    CHECK_FALSE(untrained.significance.has_value());
    const EstimateReport a = mine_f_es(ds, cfg, {50}, 3);
    const EstimateReport b = mine_f_es(ds, cfg, {50}, 3);
    CHECK(a.point_estimate == b.point_estimate);
}
