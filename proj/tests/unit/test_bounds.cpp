#include <doctest.h>

#include <cmath>
#include <vector>

#include "demine/bounds.hpp"
#include "demine/errors.hpp"
#include "demine/report.hpp"
#include "demine/rng.hpp"

using namespace demine;

namespace {

// Straight loops over the definitions, no stabilization.
struct NaiveBounds {
    double mine, mine_f, eb1;
};

NaiveBounds naive(const Matrix& s) {
    const auto n = static_cast<std::size_t>(s.rows());
    double diag = 0.0, all = 0.0, rows = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diag += s(i, i);
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            all += std::exp(s(i, j));
            row += std::exp(s(i, j));
        }
        rows += std::log(row / n);
    }
    diag /= n;
    all /= double(n * n);
    return {diag - std::log(all), diag - all + 1.0, diag - rows / n};
}

Matrix random_scores(std::size_t n, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix s(n, n);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = u(rng);
    return s;
}

} // namespace

TEST_CASE("two by two hand example") {
    Matrix s(2, 2);
    s << 1, 0, 0, 1;
    const double marginal = (2 * std::exp(1.0) + 2) / 4;
    CHECK(estimate(BoundKind::mine_f, s) == doctest::Approx(2.0 - marginal).epsilon(1e-14));
    CHECK(estimate(BoundKind::mine_f, s) == doctest::Approx(0.140859).epsilon(1e-6));
    CHECK(estimate(BoundKind::mine, s) == doctest::Approx(0.379885).epsilon(1e-6));
    CHECK(loss(s) == doctest::Approx(-0.140859).epsilon(1e-6));
}

TEST_CASE("constant scores") {
    CHECK(estimate(BoundKind::mine, Matrix::Zero(3, 3)) == 0.0);
    CHECK(estimate(BoundKind::mine_f, Matrix::Zero(3, 3)) == 0.0);
    CHECK(estimate(BoundKind::eb1, Matrix::Zero(3, 3)) == 0.0);
    for (double c : {-2.0, -0.3, 0.7, 4.0}) {
        const Matrix s = Matrix::Constant(5, 5, c);
        CHECK(std::abs(estimate(BoundKind::mine, s)) < 1e-12);
        CHECK(std::abs(estimate(BoundKind::eb1, s)) < 1e-12);
        // The MINE-f marginal term is not shift invariant: c - e^c + 1.
        CHECK(estimate(BoundKind::mine_f, s) == doctest::Approx(c - std::exp(c) + 1.0).epsilon(1e-13));
    }
}

TEST_CASE("stable estimators agree with naive loops") {
    Rng rng(17);
    for (int t = 0; t < 200; ++t) {
        const Matrix s = random_scores(2 + t % 9, -3.0, 3.0, rng);
        const NaiveBounds ref = naive(s);
        CHECK(estimate(BoundKind::mine, s) == doctest::Approx(ref.mine).epsilon(1e-12));
        CHECK(estimate(BoundKind::mine_f, s) == doctest::Approx(ref.mine_f).epsilon(1e-12));
        CHECK(estimate(BoundKind::eb1, s) == doctest::Approx(ref.eb1).epsilon(1e-12));
    }
}

TEST_CASE("ordering eb1 >= mine >= mine_f on random matrices") {
    Rng rng(99);
    int violations = 0;
    for (int t = 0; t < 10000; ++t) {
        const Matrix s = random_scores(2 + t % 7, -4.0, 4.0, rng);
        const double eb1 = estimate(BoundKind::eb1, s);
        const double mine = estimate(BoundKind::mine, s);
        const double mine_f = estimate(BoundKind::mine_f, s);
        if (!(eb1 >= mine - 1e-12 && mine >= mine_f - 1e-12)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("shift behaviour and range") {
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        const Matrix s = random_scores(6, -1.0, 1.0, rng);
        const Matrix shifted = (s.array() + 0.37).matrix();
        CHECK(estimate(BoundKind::mine, shifted) == doctest::Approx(estimate(BoundKind::mine, s)).epsilon(1e-12));
        CHECK(estimate(BoundKind::eb1, shifted) == doctest::Approx(estimate(BoundKind::eb1, s)).epsilon(1e-12));
        CHECK(estimate(BoundKind::mine_f, shifted) != doctest::Approx(estimate(BoundKind::mine_f, s)));
        const ScoreRange r = mine_f_estimate_range({-1.0, 1.0});
        const double v = estimate(BoundKind::mine_f, s);
        CHECK(v >= r.lower);
        CHECK(v <= r.upper);
    }
}

TEST_CASE("loss is the negated MINE-f estimate and its adjoint matches") {
    Rng rng(21);
    const Matrix s = random_scores(5, -2.0, 2.0, rng);
    CHECK(std::abs(loss(s) + estimate(BoundKind::mine_f, s)) < 1e-15);
    const Matrix adj = loss_adjoint(s);
    constexpr double h = 1e-6;
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 5; ++j) {
            Matrix up = s, down = s;
            up(i, j) += h;
            down(i, j) -= h;
            CHECK(adj(i, j) == doctest::Approx((loss(up) - loss(down)) / (2 * h)).epsilon(1e-7));
        }
}

TEST_CASE("log-mean-exp helper") {
    const std::vector<double> a{0.0, std::log(3.0)};
    CHECK(exp_mean_stable(a) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const std::vector<double> big{1000.0, 1000.0};
    CHECK(exp_mean_stable(big) == 1000.0);
    const std::vector<double> c(7, -2.5);
    CHECK(exp_mean_stable(c) == -2.5);
    CHECK_THROWS_AS(exp_mean_stable(std::vector<double>{}), InputError);
}

TEST_CASE("shape checks") {
    CHECK_THROWS_AS(estimate(BoundKind::mine, Matrix::Zero(2, 3)), InputError);
    CHECK_THROWS_AS(estimate(BoundKind::mine, Matrix::Zero(1, 1)), InputError);
    CHECK(parse_bound_kind(to_string(BoundKind::eb1)) == BoundKind::eb1);
}
