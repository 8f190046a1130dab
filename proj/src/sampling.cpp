#include "qres/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "qres/error.hpp"
#include "qres/rng.hpp"

namespace qres::sampling {

namespace {
constexpr double kNegativeClamp = 1e-12;
constexpr double kSumTolerance = 1e-9;
}  // namespace

ShotConfig ShotConfig::finite(std::uint64_t shots, std::uint64_t seed) {
    ShotConfig cfg;
    cfg.shots = shots;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

ShotConfig ShotConfig::at_step(std::uint64_t t) const {
    ShotConfig out = *this;
    out.seed = rng::derive_seed(seed, rng::Stream::Shots, t);
    return out;
}

std::string ShotConfig::label() const { return shots ? std::to_string(*shots) : "exact"; }

void ShotConfig::validate() const {
    if (shots && *shots < 1) throw InvalidInput("shot count must be >= 1");
}

void validate_probabilities(const Vector& p) {
    if (p.size() == 0) throw InvalidInput("probability vector is empty");
    double sum = 0.0;
    for (Index k = 0; k < p.size(); ++k) {
        if (!std::isfinite(p[k]) || p[k] < -kNegativeClamp) {
            throw InvalidInput("probability entry " + std::to_string(k) + " = " +
                               std::to_string(p[k]) + " is invalid");
        }
        sum += p[k];
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw InvalidInput("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
}

std::vector<std::uint64_t> sample_counts(const Vector& p, std::uint64_t shots,
                                         std::uint64_t seed) {
    validate_probabilities(p);
    if (shots < 1) throw InvalidInput("shot count must be >= 1");
    const auto dim = static_cast<std::size_t>(p.size());
    std::vector<double> cumulative(dim);
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        acc += std::max(p[static_cast<Index>(k)], 0.0);
        cumulative[k] = acc;
    }
    const double total = acc;
    std::vector<std::uint64_t> counts(dim, 0);
    auto engine = rng::make_engine(seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double x = rng::uniform01(engine) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
        // Rounding can leave x == total; the last non-empty outcome owns it.
        if (it == cumulative.end()) it = std::prev(it);
        auto k = static_cast<std::size_t>(it - cumulative.begin());
        while (p[static_cast<Index>(k)] <= 0.0 && k > 0) --k;
        ++counts[k];
    }
    return counts;
}

Vector sample_probs(const Vector& p, const ShotConfig& cfg) {
    cfg.validate();
    if (cfg.is_exact()) {
        validate_probabilities(p);
        return p;
    }
    const auto counts = sample_counts(p, *cfg.shots, cfg.seed);
    const double inv = 1.0 / static_cast<double>(*cfg.shots);
    Vector out(p.size());
    for (Index k = 0; k < p.size(); ++k) {
        out[k] = static_cast<double>(counts[static_cast<std::size_t>(k)]) * inv;
    }
    return out;
}

Matrix per_step_covariance(const Vector& p, std::uint64_t shots) {
    validate_probabilities(p);
    if (shots < 1) throw InvalidInput("shot count must be >= 1");
    const Vector q = p.cwiseMax(0.0);
    Matrix cov = -q * q.transpose();
    cov.diagonal() += q;
    return cov / static_cast<double>(shots);
}

Matrix averaged_covariance(const Matrix& r, GramNormalization norm) {
    if (r.size() == 0) throw InvalidInput("averaged_covariance: empty reservoir matrix");
    const double n_tr = static_cast<double>(r.cols());
    Matrix gram = r * r.transpose();
    if (norm == GramNormalization::TimeAveraged) gram /= n_tr;
    Matrix cov = -gram;
    cov.diagonal() += r.rowwise().mean();
    return cov;
}

}  // namespace qres::sampling
