#pragma once

#include <span>
#include <string>
#include <string_view>

#include "demine/matrix.hpp"

namespace demine {

// The three energy-based MI lower bounds, tightest first.
enum class BoundKind { eb1, mine, mine_f };

std::string to_string(BoundKind kind);
BoundKind parse_bound_kind(std::string_view name);

// log(mean(exp(values))) with max subtraction. Throws InputError on empty input.
double exp_mean_stable(std::span<const double> values);

// Empirical bound from a square score matrix S, S(i,j) = T(x_i, z_j).
// Rows index x and columns index z; the diagonal holds the joint pairs and the
// marginal term averages over all n^2 entries, diagonal included.
//   mine   : mean(diag) - log mean(exp S)
//   mine_f : mean(diag) - mean(exp S) + 1
//   eb1    : mean(diag) - mean_i log mean_j exp S(i,j)
double estimate(BoundKind kind, const Matrix& scores);

// Training loss on a minibatch score matrix; identically -estimate(mine_f, S).
double loss(const Matrix& scores);

// dLoss/dS: -I/n + exp(S)/n^2.
Matrix loss_adjoint(const Matrix& scores);
// Both at once, sharing one pass of exp over the scores.
double loss_with_adjoint(const Matrix& scores, Matrix& adjoint);

} // namespace demine
