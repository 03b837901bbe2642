#include "demine/critic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "demine/errors.hpp"

namespace demine {

namespace {

using Index = Eigen::Index;

Index as_index(std::size_t n) { return static_cast<Index>(n); }

// tanh(u) = 1 - 2 / (e^{2u} + 1) through the vectorized exp. Absolute error
// stays near machine epsilon; saturates cleanly for large |u|.
template <class Derived>
Matrix tanh_of(const Eigen::ArrayBase<Derived>& u) {
    return (1.0 - 2.0 / ((2.0 * u).exp() + 1.0)).matrix();
}

void check_dims(const std::vector<std::size_t>& dims, const char* name) {
    if (dims.size() < 2) throw InputError(std::string(name) + " encoder needs at least one layer");
    for (std::size_t d : dims)
        if (d == 0) throw InputError(std::string(name) + " encoder has a zero-width layer");
}

Matrix encode_batch(const Critic& c, Side side, const Matrix& input, EncoderTrace* trace) {
    const MlpEncoder& enc = c.encoder(side);
    if (static_cast<std::size_t>(input.cols()) != enc.input_dim())
        throw InputError("critic input has " + std::to_string(input.cols()) + " columns, encoder expects " +
                         std::to_string(enc.input_dim()));
    Matrix h = input;
    if (trace) {
        trace->activations.clear();
        trace->activations.reserve(enc.layer_count() + 1);
        trace->activations.push_back(h);
    }
    for (std::size_t l = 0; l < enc.layer_count(); ++l) {
        Matrix next = h * c.weight(side, l);
        next.rowwise() += c.bias(side, l);
        if (l + 1 < enc.layer_count()) next = tanh_of(next.array());
        h = std::move(next);
        if (trace) trace->activations.push_back(h);
    }
    return h;
}

// Backpropagates dLoss/dOutput of one encoder into the gradient buffer.
void encoder_backward(const Critic& c, Side side, const EncoderTrace& trace, Matrix grad_out,
                      Vector& grad) {
    const MlpEncoder& enc = c.encoder(side);
    for (std::size_t l = enc.layer_count(); l-- > 0;) {
        if (l + 1 < enc.layer_count()) {
            const Matrix& act = trace.activations[l + 1];
            grad_out.array() *= (1.0 - act.array().square());
        }
        const Matrix& in = trace.activations[l];
        const Index rows = as_index(enc.layer_dims[l]);
        const Index cols = as_index(enc.layer_dims[l + 1]);
        Eigen::Map<Matrix> dw(grad.data() + enc.weight_offset(l), rows, cols);
        Eigen::Map<RowVector> db(grad.data() + enc.bias_offset(l), cols);
        dw.noalias() += in.transpose() * grad_out;
        db += grad_out.colwise().sum();
        if (l > 0) grad_out = grad_out * c.weight(side, l).transpose();
    }
}

// d/df of f / (|f| + floor), applied row-wise to an upstream gradient.
Matrix normalize_backward(const Matrix& raw, const Vector& norm, const Matrix& grad_unit) {
    Matrix out(raw.rows(), raw.cols());
    for (Index i = 0; i < raw.rows(); ++i) {
        const double r = norm[i];
        const double denom = r + kNormFloor;
        out.row(i) = grad_unit.row(i) / denom;
        if (r > 0.0) {
            const double proj = raw.row(i).dot(grad_unit.row(i));
            out.row(i) -= raw.row(i) * (proj / (r * denom * denom));
        }
    }
    return out;
}

} // namespace

std::size_t MlpEncoder::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) n += (layer_dims[l] + 1) * layer_dims[l + 1];
    return n;
}

std::size_t MlpEncoder::weight_offset(std::size_t layer) const {
    std::size_t pos = offset;
    for (std::size_t l = 0; l < layer; ++l) pos += (layer_dims[l] + 1) * layer_dims[l + 1];
    return pos;
}

std::size_t MlpEncoder::bias_offset(std::size_t layer) const {
    return weight_offset(layer) + layer_dims[layer] * layer_dims[layer + 1];
}

Critic::Critic(std::vector<std::size_t> x_layers, std::vector<std::size_t> z_layers, double scale,
               double shift)
    : scale_(scale), shift_(shift) {
    check_dims(x_layers, "x");
    check_dims(z_layers, "z");
    if (x_layers.back() != z_layers.back())
        throw InputError("encoders must produce embeddings of the same width");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("critic scale M must be positive");
    if (!(shift >= -1.0 && shift <= 1.0)) throw InputError("critic shift t must lie in [-1, 1]");
    f_.layer_dims = std::move(x_layers);
    f_.offset = 0;
    g_.layer_dims = std::move(z_layers);
    g_.offset = f_.parameter_count();
    params_ = Vector::Zero(as_index(f_.parameter_count() + g_.parameter_count() + 2));
}

void Critic::set_parameters(const Vector& p) {
    if (p.size() != params_.size())
        throw InputError("parameter vector has " + std::to_string(p.size()) + " entries, critic has " +
                         std::to_string(params_.size()));
    if (!p.allFinite()) throw InputError("critic parameters must be finite");
    params_ = p;
}

void Critic::set_head(double weight, double bias) {
    params_[as_index(head_offset())] = weight;
    params_[as_index(head_offset() + 1)] = bias;
}

Eigen::Map<const Matrix> Critic::weight(Side side, std::size_t layer) const {
    const MlpEncoder& e = encoder(side);
    return {params_.data() + e.weight_offset(layer), as_index(e.layer_dims[layer]),
            as_index(e.layer_dims[layer + 1])};
}

Eigen::Map<const RowVector> Critic::bias(Side side, std::size_t layer) const {
    const MlpEncoder& e = encoder(side);
    return {params_.data() + e.bias_offset(layer), as_index(e.layer_dims[layer + 1])};
}

Eigen::Map<Matrix> Critic::weight(Side side, std::size_t layer) {
    const MlpEncoder& e = encoder(side);
    return {params_.data() + e.weight_offset(layer), as_index(e.layer_dims[layer]),
            as_index(e.layer_dims[layer + 1])};
}

Eigen::Map<RowVector> Critic::bias(Side side, std::size_t layer) {
    const MlpEncoder& e = encoder(side);
    return {params_.data() + e.bias_offset(layer), as_index(e.layer_dims[layer + 1])};
}

Vector Critic::encode(Side side, const Vector& v) const {
    const MlpEncoder& enc = encoder(side);
    if (static_cast<std::size_t>(v.size()) != enc.input_dim())
        throw InputError("critic input has dimension " + std::to_string(v.size()) + ", encoder expects " +
                         std::to_string(enc.input_dim()));
    Vector h = v;
    for (std::size_t l = 0; l < enc.layer_count(); ++l) {
        Vector next = weight(side, l).transpose() * h + bias(side, l).transpose();
        if (l + 1 < enc.layer_count()) next = next.array().tanh().matrix();
        h = std::move(next);
    }
    return h;
}

double Critic::forward(const Vector& x, const Vector& z) const {
    const Vector fx = encode(Side::x, x);
    const Vector gz = encode(Side::z, z);
    const double cosine = fx.dot(gz) / ((fx.norm() + kNormFloor) * (gz.norm() + kNormFloor));
    return scale_ * (std::tanh(head_weight() * cosine + head_bias()) - shift_);
}

Matrix Critic::forward_batch(const Matrix& x, const Matrix& z) const {
    return scores_from_units(unit_embeddings(Side::x, x), unit_embeddings(Side::z, z));
}

Matrix Critic::unit_embeddings(Side side, const Matrix& v) const {
    const Matrix e = encode_batch(*this, side, v, nullptr);
    const Vector norm = e.rowwise().norm();
    return (norm.array() + kNormFloor).inverse().matrix().asDiagonal() * e;
}

Matrix Critic::scores_from_units(const Matrix& x_unit, const Matrix& z_unit) const {
    Matrix cosine = x_unit * z_unit.transpose();
    return (scale_ * (tanh_of(head_weight() * cosine.array() + head_bias()).array() - shift_)).matrix();
}

std::vector<std::size_t> encoder_dims(std::size_t input, std::size_t layers, std::size_t hidden) {
    if (layers == 0) throw InputError("encoder needs at least one layer");
    std::vector<std::size_t> dims{input};
    for (std::size_t l = 0; l < layers; ++l) dims.push_back(hidden);
    return dims;
}

Critic make_critic(std::size_t x_dim, std::size_t z_dim, std::size_t layers, std::size_t hidden,
                   double scale, double shift, Rng& rng) {
    Critic c(encoder_dims(x_dim, layers, hidden), encoder_dims(z_dim, layers, hidden), scale, shift);
    Vector p = c.parameters();
    for (Side side : {Side::x, Side::z}) {
        const MlpEncoder& enc = c.encoder(side);
        for (std::size_t l = 0; l < enc.layer_count(); ++l) {
            const double limit = 1.0 / std::sqrt(static_cast<double>(enc.layer_dims[l]));
            std::uniform_real_distribution<double> u(-limit, limit);
            const std::size_t begin = enc.weight_offset(l);
            const std::size_t end = enc.bias_offset(l) + enc.layer_dims[l + 1];
            for (std::size_t k = begin; k < end; ++k) p[as_index(k)] = u(rng);
        }
    }
    p[as_index(c.head_offset())] = 1.0;
    p[as_index(c.head_offset() + 1)] = 0.0;
    c.set_parameters(p);
    return c;
}

CriticTrace critic_forward_trace(const Critic& c, const Matrix& x, const Matrix& z) {
    CriticTrace t;
    const Matrix fx = encode_batch(c, Side::x, x, &t.x);
    const Matrix gz = encode_batch(c, Side::z, z, &t.z);
    t.x_norm = fx.rowwise().norm();
    t.z_norm = gz.rowwise().norm();
    t.x_unit = (t.x_norm.array() + kNormFloor).inverse().matrix().asDiagonal() * fx;
    t.z_unit = (t.z_norm.array() + kNormFloor).inverse().matrix().asDiagonal() * gz;
    t.cosine.noalias() = t.x_unit * t.z_unit.transpose();
    t.head_tanh = tanh_of(c.head_weight() * t.cosine.array() + c.head_bias());
    t.scores = (c.scale() * (t.head_tanh.array() - c.shift())).matrix();
    return t;
}

GradientTape critic_backward(const Critic& c, const CriticTrace& t, const Matrix& score_adjoint) {
    if (score_adjoint.rows() != t.scores.rows() || score_adjoint.cols() != t.scores.cols())
        throw InputError("score adjoint shape does not match the traced batch");
    GradientTape tape(c.parameter_count());
    Vector& grad = tape.values;

    // Through M * tanh(u): dL/du = adj * M * (1 - tanh^2).
    const Matrix du = (score_adjoint.array() * c.scale() * (1.0 - t.head_tanh.array().square())).matrix();
    grad[static_cast<Index>(c.head_offset())] = (du.array() * t.cosine.array()).sum();
    grad[static_cast<Index>(c.head_offset() + 1)] = du.sum();

    const double w = c.head_weight();
    const Matrix dx_unit = w * (du * t.z_unit);
    const Matrix dz_unit = w * (du.transpose() * t.x_unit);
    const Matrix& fx = t.x.activations.back();
    const Matrix& gz = t.z.activations.back();
    encoder_backward(c, Side::x, t.x, normalize_backward(fx, t.x_norm, dx_unit), grad);
    encoder_backward(c, Side::z, t.z, normalize_backward(gz, t.z_norm, dz_unit), grad);
    return tape;
}

double mine_f_loss_and_gradient(const Critic& c, const Matrix& x, const Matrix& z, Vector& grad) {
    if (x.rows() != z.rows()) throw InputError("x and z batches must have the same number of rows");
    if (x.rows() < 2) throw InputError("score matrix needs n >= 2");
    EncoderTrace x_trace, z_trace;
    const Matrix fx = encode_batch(c, Side::x, x, &x_trace);
    const Matrix gz = encode_batch(c, Side::z, z, &z_trace);
    const Vector x_norm = fx.rowwise().norm();
    const Vector z_norm = gz.rowwise().norm();
    const Matrix xu = (x_norm.array() + kNormFloor).inverse().matrix().asDiagonal() * fx;
    const Matrix zu = (z_norm.array() + kNormFloor).inverse().matrix().asDiagonal() * gz;

    const Index n = x.rows();
    const double nn = static_cast<double>(n);
    const double w = c.head_weight();
    const double b = c.head_bias();
    const double scale = c.scale();
    constexpr Index kPanel = 128;
    Matrix cosine(std::min(kPanel, n), n);
    Matrix th(cosine.rows(), n);
    Matrix du(cosine.rows(), n);
    Matrix dx_unit(n, xu.cols());
    Matrix dz_unit = Matrix::Zero(n, zu.cols());
    double joint = 0.0, exp_sum = 0.0, grad_w = 0.0, grad_b = 0.0;

    for (Index start = 0; start < n; start += kPanel) {
        const Index rows = std::min(kPanel, n - start);
        auto cp = cosine.topRows(rows);
        auto tp = th.topRows(rows);
        auto dp = du.topRows(rows);
        cp.noalias() = xu.middleRows(start, rows) * zu.transpose();
        tp = tanh_of(w * cp.array() + b);
        // du = dLoss/dS * M * (1 - tanh^2), dLoss/dS = e^S / n^2 - I / n.
        dp.array() = (scale * (tp.array() - c.shift())).exp();
        exp_sum += dp.sum();
        dp.array() /= nn * nn;
        for (Index i = 0; i < rows; ++i) {
            joint += scale * (tp(i, start + i) - c.shift());
            dp(i, start + i) -= 1.0 / nn;
        }
        dp.array() *= scale * (1.0 - tp.array().square());
        grad_w += (dp.array() * cp.array()).sum();
        grad_b += dp.sum();
        dx_unit.middleRows(start, rows).noalias() = w * (dp * zu);
        dz_unit.noalias() += w * (dp.transpose() * xu.middleRows(start, rows));
    }

    grad = Vector::Zero(as_index(c.parameter_count()));
    grad[as_index(c.head_offset())] = grad_w;
    grad[as_index(c.head_offset() + 1)] = grad_b;
    encoder_backward(c, Side::x, x_trace, normalize_backward(fx, x_norm, dx_unit), grad);
    encoder_backward(c, Side::z, z_trace, normalize_backward(gz, z_norm, dz_unit), grad);
    return -(joint / nn - exp_sum / (nn * nn) + 1.0);
}

} // namespace demine
