#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense reductions behind the exact dynamic-programming passes. Every routine
// has a scalar reference implementation; AVX2 (x86-64) and NEON (AArch64)
// variants are selected at runtime. Variants agree with the reference up to
// floating-point reassociation.

namespace vrmc::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
    Backend backend;
    std::string_view name;
    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// sum_i w[i] * (x[i] - center)^2
    double (*centered_square)(const double* w, const double* x, double center, std::size_t n);
    /// y = M x, M row-major with `rows` x `cols`
    void (*matvec)(const double* m, std::size_t rows, std::size_t cols, const double* x,
                   double* y);
};

/// Reference implementations; summation is strictly left to right.
const KernelTable& scalar_table();

/// True if the backend was compiled in and the CPU supports it.
bool available(Backend backend);

/// Table for an available backend; throws vrmc::Error otherwise.
const KernelTable& table(Backend backend);

/// Best backend for this CPU, unless VRMC_KERNELS=scalar|avx2|neon overrides it.
Backend detect();

/// The backend used by the library's DP routines.
const KernelTable& active();

/// Switches the active backend (process-wide). Throws if unavailable.
void select(Backend backend);

/// Restores the previous backend on destruction.
class ScopedBackend {
public:
    explicit ScopedBackend(Backend backend);
    ~ScopedBackend();
    ScopedBackend(const ScopedBackend&) = delete;
    ScopedBackend& operator=(const ScopedBackend&) = delete;

private:
    Backend previous_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double centered_square(std::span<const double> w, std::span<const double> x,
                              double center) {
    return active().centered_square(w.data(), x.data(), center, w.size());
}

inline void matvec(std::span<const double> m, std::size_t rows, std::span<const double> x,
                   std::span<double> y) {
    active().matvec(m.data(), rows, x.size(), x.data(), y.data());
}

} // namespace vrmc::kernels
