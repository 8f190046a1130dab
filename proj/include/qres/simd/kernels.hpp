#pragma once

// Data-parallel inner loops used by the statevector emulator, the leak
// integrator and the smoothing filter. Every kernel has a scalar reference
// implementation; wider variants are selected once at startup from the CPU
// feature flags. Element-wise kernels are bitwise identical across ISAs;
// the sliding correlation accumulates in the same order on every ISA, so it is
// bitwise identical too.

#include <complex>
#include <cstddef>
#include <string_view>

namespace qres::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

// Real 2x2 matrix acting on one qubit: [a0', a1'] = [[m00, m01], [m10, m11]] [a0, a1].
struct RealGate {
    double m00, m01, m10, m11;
};

struct KernelTable {
    Isa isa;
    // Applies `gate` to qubit `qubit` of a dense statevector with `dim` = 2^n amplitudes.
    void (*apply_real_gate)(std::complex<double>* amps, std::size_t dim, unsigned qubit,
                            const RealGate& gate);
    // out[k] = |amps[k]|^2
    void (*norm_squared)(const std::complex<double>* amps, double* out, std::size_t dim);
    // out[k] = (1 - eps) * prev[k] + eps * next[k]; out may alias prev.
    void (*blend)(const double* prev, const double* next, double eps, double* out,
                  std::size_t n);
    // Centred sliding-window correlation with odd window m, h = m / 2:
    // out[i] = x[i + h] + sum_j taps[j] * (x[i + j] - x[i + h]) for i in [0, n - m].
    // Equals sum_j taps[j] * x[i + j] whenever the taps sum to one, and
    // reproduces constant signals exactly.
    void (*centered_correlate)(const double* x, std::size_t n, const double* taps,
                               std::size_t m, double* out);
};

bool isa_supported(Isa isa) noexcept;

// Kernel table for a specific ISA; throws qres::InvalidInput if unsupported.
const KernelTable& kernels_for(Isa isa);

// The table selected at startup: the widest supported ISA unless the
// QRES_SIMD environment variable names another ("scalar", "avx2").
const KernelTable& kernels() noexcept;

Isa active_isa() noexcept;

namespace detail {
extern const KernelTable scalar_table;
#if QRES_HAVE_AVX2
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace qres::simd
