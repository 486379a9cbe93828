#pragma once

// Backend entry points. Kept free of standard-library headers beyond <cstddef>
// so that the ISA-specific translation units pull in nothing that could be
// compiled with wider instructions than the rest of the program.

#include <cstddef>

namespace vrmc::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double centered_square_scalar(const double* w, const double* x, double center, std::size_t n);
void matvec_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                   double* y);

#if defined(VRMC_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
double centered_square_avx2(const double* w, const double* x, double center, std::size_t n);
void matvec_avx2(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
#endif

#if defined(VRMC_HAVE_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
double centered_square_neon(const double* w, const double* x, double center, std::size_t n);
void matvec_neon(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
#endif

} // namespace vrmc::kernels::detail
