#include "kernels_impl.hpp"

namespace vrmc::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double centered_square_scalar(const double* w, const double* x, double center, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - center;
        sum += w[i] * d * d;
    }
    return sum;
}

void matvec_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * cols, x, cols);
}

} // namespace vrmc::kernels::detail
