#include "demine/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "demine/errors.hpp"
#include "demine/ksg.hpp"
#include "demine/rng.hpp"

namespace demine {

void validate(const GaussianSpec& s) {
    if (s.k < 1) throw InputError("Gaussian dimension k must be >= 1");
    if (!(std::abs(s.rho) < 1.0)) throw InputError("Gaussian correlation must satisfy |rho| < 1");
}

void validate(const SineSpec& s) {
    if (!(s.a > 0.0) || !std::isfinite(s.a)) throw InputError("sine frequency a must be positive");
    if (!(s.noise_sigma >= 0.0) || !std::isfinite(s.noise_sigma))
        throw InputError("sine noise sigma must be >= 0");
    if (!std::isfinite(s.phase)) throw InputError("sine phase must be finite");
}

PairedDataset gen_gaussian(const GaussianSpec& s) {
    validate(s);
    Rng rng(derive_seed(s.seed, "gaussian"));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double noise = std::sqrt(1.0 - s.rho * s.rho);
    PairedDataset ds;
    ds.x.resize(static_cast<Eigen::Index>(s.n), static_cast<Eigen::Index>(s.k));
    ds.z.resize(static_cast<Eigen::Index>(s.n), static_cast<Eigen::Index>(s.k));
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.x.cols(); ++j) {
            const double x = normal(rng);
            const double eta = normal(rng);
            ds.x(i, j) = x;
            ds.z(i, j) = s.rho * x + noise * eta;
        }
    }
    std::ostringstream p;
    p << "gaussian(k=" << s.k << ",rho=" << format_double(s.rho) << ",n=" << s.n << ",seed=" << s.seed << ")";
    ds.provenance = p.str();
    return ds;
}

PairedDataset gen_sine(const SineSpec& s) {
    validate(s);
    Rng rng(derive_seed(s.seed, "sine"));
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    PairedDataset ds;
    ds.x.resize(static_cast<Eigen::Index>(s.n), 1);
    ds.z.resize(static_cast<Eigen::Index>(s.n), 1);
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
        double x = uniform(rng);
        while (x == -1.0) x = uniform(rng); // open interval
        ds.x(i, 0) = x;
        ds.z(i, 0) = std::sin(s.a * x + s.phase) + s.noise_sigma * normal(rng);
    }
    std::ostringstream p;
    p << "sine(a=" << format_double(s.a) << ",phase=" << format_double(s.phase)
      << ",noise=" << format_double(s.noise_sigma) << ",n=" << s.n << ",seed=" << s.seed << ")";
    ds.provenance = p.str();
    return ds;
}

double gaussian_ground_truth(std::size_t k, double rho) {
    if (!(std::abs(rho) < 1.0)) throw InputError("Gaussian correlation must satisfy |rho| < 1");
    return -0.5 * static_cast<double>(k) * std::log1p(-rho * rho);
}

double sine_ground_truth(const SineSpec& spec, std::size_t oracle_samples,
                         const std::optional<std::filesystem::path>& cache_dir) {
    validate(spec);
    std::uint64_t key = hash_tag("sine-oracle");
    for (double v : {spec.a, spec.phase, spec.noise_sigma})
        key = mix64(key ^ hash_tag(format_double(v)));
    key = mix64(key ^ spec.seed);
    key = mix64(key ^ oracle_samples);

    std::filesystem::path cache_file;
    if (cache_dir) {
        char name[64];
        std::snprintf(name, sizeof name, "sine_oracle_%016llx.txt", static_cast<unsigned long long>(key));
        cache_file = *cache_dir / name;
        std::ifstream in(cache_file);
        double cached = 0;
        if (in >> cached) return cached;
    }

    SineSpec draw = spec;
    draw.n = oracle_samples;
    const double value = ksg_estimate(gen_sine(draw), KsgConfig{});

    if (cache_dir) {
        std::filesystem::create_directories(*cache_dir);
        std::ofstream out(cache_file);
        out << format_double(value) << '\n';
    }
    return value;
}

} // namespace demine
