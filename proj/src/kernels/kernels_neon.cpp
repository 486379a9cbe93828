// AArch64 Advanced SIMD variants. NEON is part of the AArch64 baseline, so no
// runtime probe is needed beyond compiling for that target.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace vrmc::kernels::detail {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double centered_square_neon(const double* w, const double* x, double center, std::size_t n) {
    const float64x2_t c = vdupq_n_f64(center);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x + i), c);
        acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(w + i), d), d);
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = x[i] - center;
        sum += w[i] * d * d;
    }
    return sum;
}

void matvec_neon(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(m + r * cols, x, cols);
}

} // namespace vrmc::kernels::detail
