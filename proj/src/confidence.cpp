#include "demine/confidence.hpp"

#include <cmath>
#include <limits>

#include "demine/errors.hpp"

namespace demine {

namespace {

void check_range(ScoreRange r) {
    if (!(r.lower < r.upper) || !std::isfinite(r.lower) || !std::isfinite(r.upper))
        throw InputError("score range needs finite L < U");
}

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
}

constexpr int kGridPoints = 64;

} // namespace

std::uint64_t mine_sample_complexity(const MineComplexityInput& in) {
    if (!(in.d > 0) || !(in.M > 0) || !(in.K > 0) || !(in.lipschitz > 0) || !(in.eps > 0))
        throw InputError("MINE sample complexity needs positive d, M, K, L and eps");
    check_delta(in.delta);
    const double log_arg = 16.0 * in.K * in.lipschitz * std::sqrt(in.d) / in.eps;
    if (!(log_arg > 1.0))
        throw DomainError("16 K L sqrt(d) / eps must exceed 1 for the MINE bound to be defined");
    const double rhs = 2.0 * in.M * in.M *
                       (in.d * std::log(log_arg) + 2.0 * in.d * in.M + std::log(2.0 / in.delta)) /
                       (in.eps * in.eps);
    if (!(rhs < 1.8e19)) throw DomainError("MINE sample complexity overflows a 64-bit count");
    return static_cast<std::uint64_t>(std::ceil(rhs));
}

double deviation_bound(ScoreRange r, double eps, double n, double xi) {
    const double width = r.upper - r.lower;
    const double exp_width = std::exp(r.upper) - std::exp(r.lower);
    const double rest = eps - xi;
    return 2.0 * std::exp(-2.0 * xi * xi * n / (width * width)) +
           4.0 * std::exp(-rest * rest * n / (2.0 * exp_width * exp_width));
}

XiMinimum minimize_over_xi(ScoreRange r, double eps, double n) {
    check_range(r);
    if (!(eps > 0.0)) throw InputError("eps must be positive");
    auto f = [&](double xi) { return deviation_bound(r, eps, n, xi); };

    XiMinimum best{0.0, f(0.0)};
    auto consider = [&](double xi) {
        const double v = f(xi);
        if (v < best.value) best = {xi, v};
    };
    for (int i = 1; i <= kGridPoints; ++i) consider(eps * i / kGridPoints);

    // Golden section, bracketed around the best grid point.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::max(0.0, best.xi - eps / kGridPoints);
    double b = std::min(eps, best.xi + eps / kGridPoints);
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    const double tol = 1e-6 * eps;
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    consider(c);
    consider(d);
    return best;
}

std::uint64_t demine_sample_complexity(ScoreRange r, double eps, double delta) {
    check_range(r);
    check_delta(delta);
    if (!(eps > 0.0)) throw InputError("eps must be positive");
    auto ok = [&](std::uint64_t n) { return minimize_over_xi(r, eps, static_cast<double>(n)).value <= delta; };

    std::uint64_t hi = 1;
    while (!ok(hi)) {
        if (hi > (std::uint64_t{1} << 62)) throw DomainError("DEMINE sample complexity overflows a 64-bit count");
        hi *= 2;
    }
    std::uint64_t lo = hi / 2; // ok(lo) is false unless hi == 1
    if (hi == 1) return 1;
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double demine_epsilon(ScoreRange r, double n, double delta) {
    check_range(r);
    check_delta(delta);
    if (!(n >= 1.0)) throw InputError("demine_epsilon needs n >= 1");
    auto ok = [&](double eps) { return minimize_over_xi(r, eps, n).value <= delta; };

    double hi = (r.upper - r.lower) + (std::exp(r.upper) - std::exp(r.lower));
    while (!ok(hi)) hi *= 2.0;
    double lo = 0.0;
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

std::string to_string(Significance s) {
    return s == Significance::dependent ? "dependent" : "not_significant";
}

Significance significance_verdict(double estimate, double eps) {
    if (!(eps >= 0.0)) throw InputError("significance needs eps >= 0");
    return estimate - eps > 0.0 ? Significance::dependent : Significance::not_significant;
}

} // namespace demine
