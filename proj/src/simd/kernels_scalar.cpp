#include "qres/simd/kernels.hpp"

namespace qres::simd {
namespace {

void apply_real_gate(std::complex<double>* amps, std::size_t dim, unsigned qubit,
                     const RealGate& g) {
    const std::size_t stride = std::size_t{1} << qubit;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const std::complex<double> a = amps[i];
            const std::complex<double> b = amps[i + stride];
            amps[i] = {g.m00 * a.real() + g.m01 * b.real(), g.m00 * a.imag() + g.m01 * b.imag()};
            amps[i + stride] = {g.m10 * a.real() + g.m11 * b.real(),
                                g.m10 * a.imag() + g.m11 * b.imag()};
        }
    }
}

void norm_squared(const std::complex<double>* amps, double* out, std::size_t dim) {
    for (std::size_t k = 0; k < dim; ++k) {
        const double re = amps[k].real();
        const double im = amps[k].imag();
        out[k] = re * re + im * im;
    }
}

void blend(const double* prev, const double* next, double eps, double* out, std::size_t n) {
    const double keep = 1.0 - eps;
    for (std::size_t k = 0; k < n; ++k) out[k] = keep * prev[k] + eps * next[k];
}

void centered_correlate(const double* x, std::size_t n, const double* taps, std::size_t m,
                        double* out) {
    if (m == 0 || n < m) return;
    const std::size_t h = m / 2;
    for (std::size_t i = 0; i + m <= n; ++i) {
        const double centre = x[i + h];
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += taps[j] * (x[i + j] - centre);
        out[i] = centre + acc;
    }
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::Scalar, apply_real_gate, norm_squared, blend,
                                  centered_correlate};
}

}  // namespace qres::simd
