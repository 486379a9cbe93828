#include <atomic>
#include <cstdlib>
#include <string>
#include <string_view>

#include "kernels_impl.hpp"
#include "vrmc/errors.hpp"
#include "vrmc/kernels.hpp"

namespace vrmc::kernels {
namespace {

const KernelTable kScalar{Backend::Scalar, "scalar", detail::dot_scalar,
                          detail::centered_square_scalar, detail::matvec_scalar};

#if defined(VRMC_HAVE_AVX2)
const KernelTable kAvx2{Backend::Avx2, "avx2", detail::dot_avx2, detail::centered_square_avx2,
                        detail::matvec_avx2};
#endif

#if defined(VRMC_HAVE_NEON)
const KernelTable kNeon{Backend::Neon, "neon", detail::dot_neon, detail::centered_square_neon,
                        detail::matvec_neon};
#endif

bool cpu_has_avx2() {
#if defined(VRMC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend best_available() {
    if (available(Backend::Avx2)) return Backend::Avx2;
    if (available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{&table(detect())};
    return slot;
}

} // namespace

const KernelTable& scalar_table() { return kScalar; }

bool available(Backend backend) {
    switch (backend) {
    case Backend::Scalar:
        return true;
    case Backend::Avx2: {
        static const bool has = cpu_has_avx2();
        return has;
    }
    case Backend::Neon:
#if defined(VRMC_HAVE_NEON)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& table(Backend backend) {
    if (!available(backend)) throw Error("SIMD backend not available on this machine");
    switch (backend) {
#if defined(VRMC_HAVE_AVX2)
    case Backend::Avx2:
        return kAvx2;
#endif
#if defined(VRMC_HAVE_NEON)
    case Backend::Neon:
        return kNeon;
#endif
    default:
        return kScalar;
    }
}

Backend detect() {
    if (const char* env = std::getenv("VRMC_KERNELS")) {
        const std::string_view want(env);
        if (want == "scalar") return Backend::Scalar;
        if (want == "avx2" && available(Backend::Avx2)) return Backend::Avx2;
        if (want == "neon" && available(Backend::Neon)) return Backend::Neon;
    }
    return best_available();
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void select(Backend backend) { active_slot().store(&table(backend), std::memory_order_release); }

ScopedBackend::ScopedBackend(Backend backend) : previous_(active().backend) { select(backend); }

ScopedBackend::~ScopedBackend() { select(previous_); }

} // namespace vrmc::kernels
