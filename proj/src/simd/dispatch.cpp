#include <cstdlib>
#include <string>

#include "qres/error.hpp"
#include "qres/simd/kernels.hpp"

namespace qres::simd {

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if QRES_HAVE_AVX2
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& kernels_for(Isa isa) {
    if (!isa_supported(isa)) {
        throw InvalidInput("SIMD variant '" + std::string(isa_name(isa)) +
                           "' is not available on this CPU/build");
    }
#if QRES_HAVE_AVX2
    if (isa == Isa::Avx2) return detail::avx2_table;
#endif
    return detail::scalar_table;
}

namespace {

const KernelTable& select_at_startup() noexcept {
    if (const char* forced = std::getenv("QRES_SIMD")) {
        const std::string_view name{forced};
        if (name == "scalar") return detail::scalar_table;
        if (name == "avx2" && isa_supported(Isa::Avx2)) return kernels_for(Isa::Avx2);
    }
    if (isa_supported(Isa::Avx2)) return kernels_for(Isa::Avx2);
    return detail::scalar_table;
}

}  // namespace

const KernelTable& kernels() noexcept {
    static const KernelTable& table = select_at_startup();
    return table;
}

Isa active_isa() noexcept { return kernels().isa; }

}  // namespace qres::simd
