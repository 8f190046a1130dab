#pragma once

// Noise suppression on reservoir activation matrices: truncated-SVD low-rank
// approximation of the whole matrix, or per-neuron Savitzky-Golay smoothing.

#include <string>
#include <variant>

#include "qres/reservoir.hpp"
#include "qres/types.hpp"

namespace qres::denoise {

struct FixedRank {
    Index rank = 1;
};
// Keep the smallest leading set carrying this fraction of sum(sigma^2).
struct EnergyFraction {
    double eta = 0.99;
};
// Keep singular values >= tau * median(sigma).
struct NoiseFloor {
    double tau = 2.0;
};

using SvdSpec = std::variant<FixedRank, EnergyFraction, NoiseFloor>;

void validate(const SvdSpec& spec);

struct FilterSpec {
    Index window = 11;
    Index poly_order = 3;

    void validate() const;
};

struct SvdTruncation {
    Matrix reconstruction;
    Vector singular_values;  // full spectrum of the input, descending
    Index rank = 0;          // number of singular values kept
};

// Number of leading singular values the spec keeps (at least 1).
Index cutoff_rank(const Vector& singular_values, const SvdSpec& spec);

SvdTruncation svd_truncate(const Matrix& r, const SvdSpec& spec);
reservoir::ReservoirMatrix svd_truncate(const reservoir::ReservoirMatrix& r, const SvdSpec& spec);

// Taps evaluating the window's least-squares polynomial at window offset
// `offset` in [-h, h]; offset 0 gives the usual centre kernel.
Vector savgol_taps(const FilterSpec& spec, Index offset = 0);

// Fitted value at every sample; the first and last h samples are read off the
// first and last full-window fits, so the output has the input's length.
Vector savgol_smooth(const Vector& signal, const FilterSpec& spec);

struct SvdMethod {
    SvdSpec spec;
};
struct FilterMethod {
    FilterSpec spec;
};
using DenoiseMethod = std::variant<SvdMethod, FilterMethod>;

// Short label used in result tables, e.g. "svd-rank60", "savgol-w11-p3".
std::string label(const DenoiseMethod& method);

reservoir::ReservoirMatrix denoise_reservoir(const reservoir::ReservoirMatrix& r,
                                             const DenoiseMethod& method);
Matrix denoise_matrix(const Matrix& r, const DenoiseMethod& method);

}  // namespace qres::denoise
