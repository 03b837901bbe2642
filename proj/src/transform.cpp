#include "demine/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "demine/errors.hpp"
#include "demine/rng.hpp"

namespace demine {

namespace {

constexpr std::string_view kMiddleDot = "\xC2\xB7";

double signed_power(double v, double p) { return std::copysign(std::pow(std::abs(v), p), v); }

} // namespace

std::vector<TransformOp> parse_augmentation_mode(std::string_view mode) {
    std::string s;
    for (std::size_t i = 0; i < mode.size(); ++i) {
        if (mode.substr(i).starts_with(kMiddleDot)) {
            s += '.';
            ++i;
        } else if (mode[i] != ' ') {
            s += mode[i];
        }
    }
    if (s.empty() || s == "." || s == "none") return {};

    std::vector<TransformOp> ops;
    std::size_t pos = 0;
    std::size_t open = 0;
    while (pos < s.size() && s[pos] != '.' && s[pos] != ')') {
        switch (s[pos]) {
        case 'm': ops.push_back(TransformOp::mirror); break;
        case 'P': ops.push_back(TransformOp::permute); break;
        case 'O': ops.push_back(TransformOp::offset); break;
        case 'G': ops.push_back(TransformOp::gamma); break;
        default: throw InputError("unknown augmentation symbol '" + std::string(1, s[pos]) + "' in '" + std::string(mode) + "'");
        }
        ++pos;
        if (pos < s.size() && s[pos] == '(') {
            ++open;
            ++pos;
        } else {
            break;
        }
    }
    if (pos < s.size() && s[pos] == '.') ++pos;
    std::size_t closed = 0;
    while (pos < s.size() && s[pos] == ')') {
        ++closed;
        ++pos;
    }
    if (pos != s.size() || closed != open)
        throw InputError("malformed augmentation mode '" + std::string(mode) + "'");
    return ops;
}

std::string format_augmentation_mode(const std::vector<TransformOp>& ops) {
    std::string out;
    for (TransformOp op : ops) {
        switch (op) {
        case TransformOp::mirror: out += "m("; break;
        case TransformOp::permute: out += "P("; break;
        case TransformOp::offset: out += "O("; break;
        case TransformOp::gamma: out += "G("; break;
        }
    }
    out += kMiddleDot;
    out += std::string(ops.size(), ')');
    return out;
}

Vector VariableTransform::apply(const Vector& v) const {
    Vector out = v;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        switch (*it) {
        case TransformOp::mirror:
            for (Eigen::Index i = 0; i < out.size(); ++i) out[i] *= signs[static_cast<std::size_t>(i)];
            break;
        case TransformOp::permute: {
            Vector tmp(out.size());
            for (Eigen::Index i = 0; i < out.size(); ++i)
                tmp[i] = out[static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])];
            out = std::move(tmp);
            break;
        }
        case TransformOp::offset:
            for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += offsets[static_cast<std::size_t>(i)];
            break;
        case TransformOp::gamma:
            for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = signed_power(out[i], gamma);
            break;
        }
    }
    return out;
}

Vector VariableTransform::invert(const Vector& v) const {
    Vector out = v;
    for (TransformOp op : ops) {
        switch (op) {
        case TransformOp::mirror:
            for (Eigen::Index i = 0; i < out.size(); ++i) out[i] *= signs[static_cast<std::size_t>(i)];
            break;
        case TransformOp::permute: {
            Vector tmp(out.size());
            for (Eigen::Index i = 0; i < out.size(); ++i)
                tmp[static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])] = out[i];
            out = std::move(tmp);
            break;
        }
        case TransformOp::offset:
            for (Eigen::Index i = 0; i < out.size(); ++i) out[i] -= offsets[static_cast<std::size_t>(i)];
            break;
        case TransformOp::gamma:
            for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = signed_power(out[i], 1.0 / gamma);
            break;
        }
    }
    return out;
}

Matrix VariableTransform::apply_rows(const Matrix& m) const {
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.row(r) = apply(m.row(r).transpose()).transpose();
    return out;
}

VariableTransform sample_variable_transform(std::size_t dims, const std::vector<TransformOp>& ops, Rng& rng) {
    VariableTransform t;
    t.ops = ops;
    t.signs.assign(dims, 1.0);
    t.perm.resize(dims);
    std::iota(t.perm.begin(), t.perm.end(), std::size_t{0});
    t.offsets.assign(dims, 0.0);
    auto uses = [&](TransformOp op) { return std::find(ops.begin(), ops.end(), op) != ops.end(); };
    if (uses(TransformOp::mirror)) {
        std::bernoulli_distribution coin(0.5);
        for (double& s : t.signs) s = coin(rng) ? 1.0 : -1.0;
    }
    if (uses(TransformOp::permute)) std::shuffle(t.perm.begin(), t.perm.end(), rng);
    if (uses(TransformOp::offset)) {
        std::uniform_real_distribution<double> u(-0.1, 0.1);
        for (double& o : t.offsets) o = u(rng);
    }
    if (uses(TransformOp::gamma)) t.gamma = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    return t;
}

TaskTransform sample_transform(std::size_t x_dims, std::size_t z_dims, std::string_view mode, std::uint64_t seed) {
    const auto ops = parse_augmentation_mode(mode);
    Rng rng(seed);
    TaskTransform t;
    t.x = sample_variable_transform(x_dims, ops, rng);
    t.z = sample_variable_transform(z_dims, ops, rng);
    return t;
}

PairedDataset apply(const TaskTransform& t, const PairedDataset& ds) {
    PairedDataset out;
    out.x = t.x.apply_rows(ds.x);
    out.z = t.z.apply_rows(ds.z);
    out.provenance = ds.provenance;
    return out;
}

} // namespace demine
