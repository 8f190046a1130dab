#pragma once

// Finite-shot measurement model: S-shot multinomial estimates of a
// probability vector and the corresponding analytic covariance.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qres/types.hpp"

namespace qres::sampling {

struct ShotConfig {
    std::optional<std::uint64_t> shots;  // nullopt = exact probabilities
    std::uint64_t seed = 0;

    static ShotConfig exact() { return {}; }
    static ShotConfig finite(std::uint64_t shots, std::uint64_t seed);

    bool is_exact() const noexcept { return !shots.has_value(); }
    // Seed for timestep `t`, independent of how timesteps are grouped into chunks.
    ShotConfig at_step(std::uint64_t t) const;
    std::string label() const;  // "exact" or the shot count
    void validate() const;
};

// Per-outcome counts from S categorical draws (inverse CDF on the cumulative
// vector); the counts sum to exactly S.
std::vector<std::uint64_t> sample_counts(const Vector& p, std::uint64_t shots,
                                         std::uint64_t seed);

// Exact mode returns p unchanged; finite mode returns counts / S.
Vector sample_probs(const Vector& p, const ShotConfig& cfg);

// (diag(p) - p p^T) / S
Matrix per_step_covariance(const Vector& p, std::uint64_t shots);

enum class GramNormalization {
    TimeAveraged,  // diag(mean of columns) - R R^T / N_tr
    AsPrinted,     // diag(mean of columns) - R R^T
};

// Time-averaged multinomial covariance over the columns of R.
Matrix averaged_covariance(const Matrix& r, GramNormalization norm = GramNormalization::TimeAveraged);

// Throws InvalidInput unless entries are >= -1e-12 and sum to 1 within 1e-9.
void validate_probabilities(const Vector& p);

}  // namespace qres::sampling
