#include "demine/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "demine/errors.hpp"

namespace demine {

namespace {

void check_square(const Matrix& s) {
    if (s.rows() != s.cols())
        throw InputError("score matrix must be square, got " + std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()));
    if (s.rows() < 2) throw InputError("score matrix needs n >= 2");
}

double mean_exp(const Matrix& s) { return s.array().exp().mean(); }

} // namespace

std::string to_string(BoundKind kind) {
    switch (kind) {
    case BoundKind::eb1: return "EB1";
    case BoundKind::mine: return "MINE";
    case BoundKind::mine_f: return "MINE_F";
    }
    return "?";
}

BoundKind parse_bound_kind(std::string_view name) {
    if (name == "EB1" || name == "eb1") return BoundKind::eb1;
    if (name == "MINE" || name == "mine") return BoundKind::mine;
    if (name == "MINE_F" || name == "mine_f" || name == "mine-f") return BoundKind::mine_f;
    throw InputError("unknown bound kind '" + std::string(name) + "'");
}

double exp_mean_stable(std::span<const double> values) {
    if (values.empty()) throw InputError("exp_mean_stable of an empty sequence");
    const double hi = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - hi);
    return hi + std::log(acc / static_cast<double>(values.size()));
}

double estimate(BoundKind kind, const Matrix& s) {
    check_square(s);
    const double joint = s.diagonal().mean();
    switch (kind) {
    case BoundKind::mine_f: return joint - mean_exp(s) + 1.0;
    case BoundKind::mine:
        return joint - exp_mean_stable(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())));
    case BoundKind::eb1: {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            acc += exp_mean_stable(std::span<const double>(s.row(i).data(), static_cast<std::size_t>(s.cols())));
        return joint - acc / static_cast<double>(s.rows());
    }
    }
    throw InputError("unknown bound kind");
}

double loss(const Matrix& s) { return -estimate(BoundKind::mine_f, s); }

Matrix loss_adjoint(const Matrix& s) {
    check_square(s);
    const double n = static_cast<double>(s.rows());
    Matrix adj = (s.array().exp() / (n * n)).matrix();
    adj.diagonal().array() -= 1.0 / n;
    return adj;
}

double loss_with_adjoint(const Matrix& s, Matrix& adjoint) {
    check_square(s);
    const double n = static_cast<double>(s.rows());
    adjoint = s.array().exp().matrix();
    const double value = -(s.diagonal().mean() - adjoint.mean() + 1.0);
    adjoint /= n * n;
    adjoint.diagonal().array() -= 1.0 / n;
    return value;
}

} // namespace demine
