#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "demine/dataset.hpp"
#include "demine/rng.hpp"

namespace demine {

// Elementary invertible maps used for task augmentation:
//   mirror  m(x) = s * x, s in {-1, +1} per dimension
//   permute P(x) = x[perm]
//   offset  O(x) = x + e, e ~ U(-0.1, 0.1) per dimension
//   gamma   G(x) = sign(x) |x|^g, g ~ U(0.5, 2)
enum class TransformOp { mirror, permute, offset, gamma };

// Parses a composition such as "m(P(O(·)))" into ops, outermost first.
// "·", ".", "" and "none" denote the identity; a bare symbol "m" means m(·).
std::vector<TransformOp> parse_augmentation_mode(std::string_view mode);
std::string format_augmentation_mode(const std::vector<TransformOp>& ops);

// One sampled transform for one variable.
struct VariableTransform {
    std::vector<TransformOp> ops; // outermost first; applied innermost first
    std::vector<double> signs;
    std::vector<std::size_t> perm; // output[i] = input[perm[i]]
    std::vector<double> offsets;
    double gamma = 1.0;

    Vector apply(const Vector& v) const;
    Vector invert(const Vector& v) const;
    Matrix apply_rows(const Matrix& m) const;
};

// Independent draws for the X side and the Z side.
struct TaskTransform {
    VariableTransform x;
    VariableTransform z;
};

VariableTransform sample_variable_transform(std::size_t dims, const std::vector<TransformOp>& ops, Rng& rng);
TaskTransform sample_transform(std::size_t x_dims, std::size_t z_dims, std::string_view mode, std::uint64_t seed);

PairedDataset apply(const TaskTransform& t, const PairedDataset& ds);

} // namespace demine
