#pragma once

#include <cstddef>
#include <vector>

#include "demine/matrix.hpp"
#include "demine/rng.hpp"

namespace demine {

// Offset added to embedding norms before normalizing, so a zero embedding
// yields cosine 0 instead of NaN.
inline constexpr double kNormFloor = 1e-12;

// Layout of one MLP encoder inside the critic's flat parameter vector.
// layer_dims = {input, hidden..., output}; tanh after every layer except the
// last, which is linear. Weights are stored [in x out] row-major, followed by
// the bias of that layer.
struct MlpEncoder {
    std::vector<std::size_t> layer_dims;
    std::size_t offset = 0;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t layer_count() const { return layer_dims.size() - 1; }
    std::size_t parameter_count() const;
    std::size_t weight_offset(std::size_t layer) const;
    std::size_t bias_offset(std::size_t layer) const;
};

enum class Side { x, z };

// T(x,z) = M * (tanh(w * cos<f(x), g(z)> + b) - t), bounded to
// [-M(1+t), M(1-t)]. M and t are fixed hyperparameters; the encoders, w and b
// are the learnable parameters held in one flat vector.
class Critic {
public:
    Critic(std::vector<std::size_t> x_layers, std::vector<std::size_t> z_layers,
           double scale, double shift);

    const MlpEncoder& encoder(Side side) const { return side == Side::x ? f_ : g_; }
    double scale() const { return scale_; }
    double shift() const { return shift_; }
    double lower_bound() const { return -scale_ * (1.0 + shift_); }
    double upper_bound() const { return scale_ * (1.0 - shift_); }

    std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }
    const Vector& parameters() const { return params_; }
    void set_parameters(const Vector& p);

    double head_weight() const { return params_[head_offset()]; }
    double head_bias() const { return params_[head_offset() + 1]; }
    void set_head(double weight, double bias);
    std::size_t head_offset() const { return f_.parameter_count() + g_.parameter_count(); }

    Eigen::Map<const Matrix> weight(Side side, std::size_t layer) const;
    Eigen::Map<const RowVector> bias(Side side, std::size_t layer) const;
    Eigen::Map<Matrix> weight(Side side, std::size_t layer);
    Eigen::Map<RowVector> bias(Side side, std::size_t layer);

    // Embedding of a single vector through one encoder.
    Vector encode(Side side, const Vector& v) const;

    double forward(const Vector& x, const Vector& z) const;
    // Entry (i,j) is forward(X.row(i), Z.row(j)); encoders run once per row.
    Matrix forward_batch(const Matrix& x, const Matrix& z) const;

    // Rows f(v_i) / (|f(v_i)| + floor).
    Matrix unit_embeddings(Side side, const Matrix& v) const;
    // Score matrix from precomputed unit embeddings.
    Matrix scores_from_units(const Matrix& x_unit, const Matrix& z_unit) const;

private:
    MlpEncoder f_;
    MlpEncoder g_;
    double scale_;
    double shift_;
    Vector params_;
};

// Encoder dims {input, hidden x (layers-1), hidden}.
std::vector<std::size_t> encoder_dims(std::size_t input, std::size_t layers, std::size_t hidden);

// Uniform(+-1/sqrt(fan_in)) weights and biases, head w = 1, b = 0.
Critic make_critic(std::size_t x_dim, std::size_t z_dim, std::size_t layers, std::size_t hidden,
                   double scale, double shift, Rng& rng);

struct EncoderTrace {
    std::vector<Matrix> activations; // [0] is the input batch
};

// Everything the backward pass needs from one batched forward pass.
struct CriticTrace {
    EncoderTrace x;
    EncoderTrace z;
    Vector x_norm; // |f(x_i)|
    Vector z_norm;
    Matrix x_unit; // f(x_i) / (|f(x_i)| + floor)
    Matrix z_unit;
    Matrix cosine;    // n x m
    Matrix head_tanh; // tanh(w*cos + b)
    Matrix scores;    // n x m critic outputs
};

CriticTrace critic_forward_trace(const Critic& c, const Matrix& x, const Matrix& z);

// Gradient buffer with the same layout as Critic::parameters().
struct GradientTape {
    Vector values;

    explicit GradientTape(std::size_t n = 0) : values(Vector::Zero(static_cast<Eigen::Index>(n))) {}
    void zero() { values.setZero(); }
};

// Reverse-mode pass: given dLoss/dScores for the traced batch, returns
// dLoss/dParameters.
GradientTape critic_backward(const Critic& c, const CriticTrace& trace, const Matrix& score_adjoint);

// MINE-f training loss of a square batch (row i of x paired with row i of z)
// and its parameter gradient, written into `grad`. Same result as
// critic_forward_trace + loss_with_adjoint + critic_backward, but the score
// matrix is processed in row panels and never held in full.
double mine_f_loss_and_gradient(const Critic& c, const Matrix& x, const Matrix& z, Vector& grad);

} // namespace demine
