#include <doctest.h>

#include <cmath>

#include "demine/adam.hpp"
#include "demine/bounds.hpp"
#include "demine/critic.hpp"
#include "demine/errors.hpp"
#include "demine/report.hpp"

using namespace demine;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

double loss_at(const Critic& c, const Matrix& x, const Matrix& z) { return loss(c.forward_batch(x, z)); }

} // namespace

TEST_CASE("head formula on aligned embeddings gives tanh(1)") {
    // One linear layer with identity weights: f(x) = x, g(z) = z.
    Critic c({2, 2}, {2, 2}, 1.0, 0.0);
    Vector p = Vector::Zero(static_cast<Eigen::Index>(c.parameter_count()));
    Eigen::Map<Matrix>(p.data() + c.encoder(Side::x).weight_offset(0), 2, 2).setIdentity();
    Eigen::Map<Matrix>(p.data() + c.encoder(Side::z).weight_offset(0), 2, 2).setIdentity();
    c.set_parameters(p);
    c.set_head(1.0, 0.0);
    Vector v(2);
    v << 0.3, -1.2;
    CHECK(c.forward(v, 2.0 * v) == doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
    CHECK(c.forward(v, -v) == doctest::Approx(std::tanh(-1.0)).epsilon(1e-12));
}

TEST_CASE("zero head weight makes the score matrix constant") {
    Rng rng(3);
    Critic c = make_critic(3, 2, 2, 5, 1.7, 0.25, rng);
    c.set_head(0.0, 0.4);
    const Matrix s = c.forward_batch(random_matrix(4, 3, rng), random_matrix(4, 2, rng));
    for (Eigen::Index i = 0; i < s.size(); ++i) CHECK(s.data()[i] == doctest::Approx(1.7 * (std::tanh(0.4) - 0.25)));
}

TEST_CASE("outputs stay inside [-M(1+t), M(1-t)]") {
    Rng rng(11);
    std::uniform_real_distribution<double> um(1e-3, 5.0), ut(-1.0, 1.0), uw(-50.0, 50.0);
    for (int trial = 0; trial < 2000; ++trial) {
        Critic c = make_critic(2, 3, 1 + trial % 3, 4, um(rng), ut(rng), rng);
        c.set_head(uw(rng), uw(rng));
        const Matrix s = c.forward_batch(random_matrix(3, 2, rng, 10.0), random_matrix(2, 3, rng, 10.0));
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            REQUIRE(s.data()[i] >= c.lower_bound());
            REQUIRE(s.data()[i] <= c.upper_bound());
        }
    }
    Critic hi = make_critic(1, 1, 1, 2, 2.0, 1.0, rng);
    Critic lo = make_critic(1, 1, 1, 2, 2.0, -1.0, rng);
    const Matrix x = random_matrix(5, 1, rng);
    CHECK(hi.forward_batch(x, x).maxCoeff() <= 0.0);
    CHECK(lo.forward_batch(x, x).minCoeff() >= 0.0);
}

TEST_CASE("batched scores match the per-pair path") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Critic c = make_critic(4, 2, 1 + trial % 4, 6, 1.3, -0.2, rng);
        const Matrix x = random_matrix(3, 4, rng);
        const Matrix z = random_matrix(2, 2, rng);
        const Matrix s = c.forward_batch(x, z);
        REQUIRE(s.rows() == 3);
        REQUIRE(s.cols() == 2);
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 2; ++j)
                CHECK(std::abs(s(i, j) - c.forward(x.row(i).transpose(), z.row(j).transpose())) < 1e-12);
    }
}

TEST_CASE("dimension mismatch is an input error") {
    Rng rng(1);
    Critic c = make_critic(3, 2, 2, 4, 1.0, 0.0, rng);
    CHECK_THROWS_AS(c.forward_batch(Matrix::Zero(2, 2), Matrix::Zero(2, 2)), InputError);
    CHECK_THROWS_AS(c.forward(Vector::Zero(3), Vector::Zero(3)), InputError);
    CHECK_THROWS_AS(Critic({2, 3}, {2, 4}, 1.0, 0.0), InputError);
    CHECK_THROWS_AS(Critic({2, 3}, {2, 3}, -1.0, 0.0), InputError);
}

TEST_CASE("zero embedding yields cosine 0 instead of NaN") {
    Critic c({2, 2}, {2, 2}, 1.0, 0.0);
    c.set_head(1.0, 0.3);
    const Matrix s = c.forward_batch(Matrix::Zero(2, 2), Matrix::Ones(2, 2));
    CHECK(all_finite(s));
    CHECK(s(0, 0) == doctest::Approx(std::tanh(0.3)));
}

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t layers = 1 + static_cast<std::size_t>(trial % 3);
        Critic c = make_critic(3, 2, layers, 3, 0.5 + trial * 0.1, -0.5 + 0.04 * trial, rng);
        c.set_head(1.0 + 0.1 * trial, 0.05 * trial - 0.5);
        const Matrix x = random_matrix(5, 3, rng);
        const Matrix z = random_matrix(5, 2, rng);
        const CriticTrace trace = critic_forward_trace(c, x, z);
        const Vector g = critic_backward(c, trace, loss_adjoint(trace.scores)).values;
        const Vector p0 = c.parameters();
        constexpr double h = 1e-5;
        for (Eigen::Index k = 0; k < p0.size(); ++k) {
            Vector p = p0;
            p[k] += h;
            c.set_parameters(p);
            const double up = loss_at(c, x, z);
            p[k] -= 2 * h;
            c.set_parameters(p);
            const double down = loss_at(c, x, z);
            const double fd = (up - down) / (2 * h);
            const double rel = std::abs(g[k] - fd) / std::max({std::abs(g[k]), std::abs(fd), 1e-6});
            worst = std::max(worst, rel);
        }
        c.set_parameters(p0);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("panelled loss and gradient match the full-matrix path") {
    Rng rng(77);
    for (Eigen::Index n : {2, 5, 64, 65, 200}) {
        Critic c = make_critic(4, 3, 2, 6, 0.8, 0.2, rng);
        c.set_head(1.7, -0.3);
        const Matrix x = random_matrix(n, 4, rng);
        const Matrix z = random_matrix(n, 3, rng);
        const CriticTrace trace = critic_forward_trace(c, x, z);
        Matrix adjoint;
        const double full = loss_with_adjoint(trace.scores, adjoint);
        CHECK(full == doctest::Approx(loss(trace.scores)).epsilon(1e-14));
        CHECK((adjoint - loss_adjoint(trace.scores)).cwiseAbs().maxCoeff() < 1e-15);
        const Vector g_full = critic_backward(c, trace, adjoint).values;
        Vector g;
        const double fused = mine_f_loss_and_gradient(c, x, z, g);
        CHECK(fused == doctest::Approx(full).epsilon(1e-12));
        CHECK((g - g_full).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, g_full.cwiseAbs().maxCoeff()));
    }
    Critic c = make_critic(1, 1, 1, 2, 1.0, 0.0, rng);
    Vector g;
    CHECK_THROWS_AS(mine_f_loss_and_gradient(c, Matrix::Zero(3, 1), Matrix::Zero(2, 1), g), InputError);
}

TEST_CASE("gradient of the head bias at zero pre-activation is M") {
    Critic c({1, 1}, {1, 1}, 2.5, 0.3);
    c.set_head(0.0, 0.0);
    Matrix x(1, 1), z(1, 1);
    x << 1.0;
    z << -2.0;
    const CriticTrace trace = critic_forward_trace(c, x, z);
    const Vector g = critic_backward(c, trace, Matrix::Ones(1, 1)).values;
    CHECK(g[static_cast<Eigen::Index>(c.head_offset() + 1)] == doctest::Approx(2.5).epsilon(1e-15));
    // w = 0 blocks every path into the encoders.
    for (std::size_t k = 0; k < c.head_offset(); ++k) CHECK(g[static_cast<Eigen::Index>(k)] == 0.0);
}

TEST_CASE("checkpoint round trip is exact") {
    Rng rng(8);
    const Critic c = make_critic(3, 4, 3, 5, 0.7, 0.1, rng);
    const Critic back = critic_from_json(nlohmann::json::parse(to_json(c).dump()));
    CHECK(back.parameters() == c.parameters());
    CHECK(back.scale() == c.scale());
    CHECK(back.shift() == c.shift());
    CHECK(back.encoder(Side::z).layer_dims == c.encoder(Side::z).layer_dims);
}

TEST_CASE("adam closed forms") {
    SUBCASE("zero gradient leaves parameters and counts the step") {
        AdamState adam(3, AdamConfig{0.1});
        Vector p(3);
        p << 1, 2, 3;
        const Vector before = p;
        adam.step(p, Vector::Zero(3));
        CHECK(p == before);
        CHECK(adam.steps() == 1);
    }
    SUBCASE("first step moves by about -lr regardless of gradient size") {
        for (double g : {1e-3, 1.0, 250.0}) {
            AdamState adam(1, AdamConfig{0.01});
            Vector p = Vector::Constant(1, 0.5);
            adam.step(p, Vector::Constant(1, g));
            // m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps)
            CHECK(p[0] == doctest::Approx(0.5 - 0.01 * g / (g + 1e-8)).epsilon(1e-14));
        }
    }
    SUBCASE("sign-flipping gradients stay within lr of the start") {
        AdamState adam(1, AdamConfig{0.05});
        Vector p = Vector::Zero(1);
        adam.step(p, Vector::Constant(1, 2.0));
        adam.step(p, Vector::Constant(1, -2.0));
        CHECK(std::abs(p[0]) <= 0.05);
        // Second step by hand.
        const double m1 = 0.1 * 2.0, v1 = 0.001 * 4.0;
        const double m2 = 0.9 * m1 + 0.1 * -2.0, v2 = 0.999 * v1 + 0.001 * 4.0;
        const double step1 = 0.05 * (m1 / 0.1) / (std::sqrt(v1 / 0.001) + 1e-8);
        const double step2 = 0.05 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
        CHECK(p[0] == doctest::Approx(-step1 - step2).epsilon(1e-12));
    }
    SUBCASE("non-finite gradient aborts") {
        AdamState adam(2, AdamConfig{});
        Vector p = Vector::Zero(2);
        Vector g(2);
        g << 1.0, std::nan("");
        CHECK_THROWS_AS(adam.step(p, g), TrainingError);
    }
}
