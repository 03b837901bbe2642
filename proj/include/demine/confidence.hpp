#pragma once

#include <cstdint>
#include <string>

namespace demine {

// Inputs of the MINE sample-complexity bound. All strictly positive,
// delta in (0, 1).
struct MineComplexityInput {
    double d = 0;         // parameter count
    double M = 1;         // |T| <= M
    double K = 1;         // every parameter in [-K, K]
    double lipschitz = 1; // T is L-Lipschitz
    double eps = 0.1;
    double delta = 0.05;
};

// Smallest integer n with
//   n >= 2M^2 (d ln(16 K L sqrt(d) / eps) + 2dM + ln(2/delta)) / eps^2.
std::uint64_t mine_sample_complexity(const MineComplexityInput& in);

// Critic output range [lower, upper].
struct ScoreRange {
    double lower = -1.0;
    double upper = 1.0;
};

// Two-sided deviation bound for the predictive estimator on n validation
// pairs, splitting the accuracy budget eps into xi (joint term) and eps - xi
// (marginal term):
//   2 exp(-2 xi^2 n / (U-L)^2) + 4 exp(-(eps-xi)^2 n / (2 (e^U - e^L)^2)).
double deviation_bound(ScoreRange range, double eps, double n, double xi);

struct XiMinimum {
    double xi = 0;
    double value = 0;
};

// min over xi in [0, eps] of deviation_bound. Golden-section search, checked
// against a coarse grid in case the objective is not unimodal.
XiMinimum minimize_over_xi(ScoreRange range, double eps, double n);

// Smallest integer n such that minimize_over_xi(range, eps, n).value <= delta.
std::uint64_t demine_sample_complexity(ScoreRange range, double eps, double delta);

// Smallest eps (to 1e-6) such that minimize_over_xi(range, eps, n).value <= delta.
// This is the two-sided half-width of the (1 - delta) interval.
double demine_epsilon(ScoreRange range, double n, double delta);

enum class Significance { dependent, not_significant };

std::string to_string(Significance s);

// dependent iff estimate - eps > 0; ties are not significant.
Significance significance_verdict(double estimate, double eps);

} // namespace demine
