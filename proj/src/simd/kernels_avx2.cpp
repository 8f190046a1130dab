// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include "qres/simd/kernels.hpp"

namespace qres::simd {
namespace {

void apply_real_gate(std::complex<double>* amps, std::size_t dim, unsigned qubit,
                     const RealGate& g) {
    auto* d = reinterpret_cast<double*>(amps);
    if (qubit == 0) {
        // Each 256-bit lane holds one (a0, a1) pair: [a0.re a0.im a1.re a1.im].
        const __m256d own = _mm256_setr_pd(g.m00, g.m00, g.m11, g.m11);
        const __m256d other = _mm256_setr_pd(g.m01, g.m01, g.m10, g.m10);
        for (std::size_t k = 0; k < dim; k += 2) {
            const __m256d v = _mm256_loadu_pd(d + 2 * k);
            const __m256d swapped = _mm256_permute2f128_pd(v, v, 0x01);
            _mm256_storeu_pd(d + 2 * k,
                             _mm256_add_pd(_mm256_mul_pd(own, v), _mm256_mul_pd(other, swapped)));
        }
        return;
    }
    const std::size_t stride = std::size_t{1} << qubit;
    const __m256d m00 = _mm256_set1_pd(g.m00);
    const __m256d m01 = _mm256_set1_pd(g.m01);
    const __m256d m10 = _mm256_set1_pd(g.m10);
    const __m256d m11 = _mm256_set1_pd(g.m11);
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; i += 2) {
            double* pa = d + 2 * i;
            double* pb = d + 2 * (i + stride);
            const __m256d a = _mm256_loadu_pd(pa);
            const __m256d b = _mm256_loadu_pd(pb);
            _mm256_storeu_pd(pa, _mm256_add_pd(_mm256_mul_pd(m00, a), _mm256_mul_pd(m01, b)));
            _mm256_storeu_pd(pb, _mm256_add_pd(_mm256_mul_pd(m10, a), _mm256_mul_pd(m11, b)));
        }
    }
}

void norm_squared(const std::complex<double>* amps, double* out, std::size_t dim) {
    const auto* d = reinterpret_cast<const double*>(amps);
    std::size_t k = 0;
    for (; k + 4 <= dim; k += 4) {
        const __m256d v0 = _mm256_loadu_pd(d + 2 * k);
        const __m256d v1 = _mm256_loadu_pd(d + 2 * k + 4);
        // hadd yields [k0 k2 k1 k3]; restore index order.
        const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
        _mm256_storeu_pd(out + k, _mm256_permute4x64_pd(h, 0b11011000));
    }
    for (; k < dim; ++k) {
        const double re = d[2 * k];
        const double im = d[2 * k + 1];
        out[k] = re * re + im * im;
    }
}

void blend(const double* prev, const double* next, double eps, double* out, std::size_t n) {
    const double keep_s = 1.0 - eps;
    const __m256d keep = _mm256_set1_pd(keep_s);
    const __m256d take = _mm256_set1_pd(eps);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d p = _mm256_loadu_pd(prev + k);
        const __m256d q = _mm256_loadu_pd(next + k);
        _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_mul_pd(keep, p), _mm256_mul_pd(take, q)));
    }
    for (; k < n; ++k) out[k] = keep_s * prev[k] + eps * next[k];
}

// Vectorised over output positions so each lane accumulates taps in the same
// order as the scalar loop.
void centered_correlate(const double* x, std::size_t n, const double* taps, std::size_t m,
                        double* out) {
    if (m == 0 || n < m) return;
    const std::size_t h = m / 2;
    const std::size_t count = n - m + 1;
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d centre = _mm256_loadu_pd(x + i + h);
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 0; j < m; ++j) {
            const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + i + j), centre);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[j]), diff));
        }
        _mm256_storeu_pd(out + i, _mm256_add_pd(centre, acc));
    }
    for (; i < count; ++i) {
        const double centre = x[i + h];
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += taps[j] * (x[i + j] - centre);
        out[i] = centre + acc;
    }
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::Avx2, apply_real_gate, norm_squared, blend,
                                centered_correlate};
}

}  // namespace qres::simd
