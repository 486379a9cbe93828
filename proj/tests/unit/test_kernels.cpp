#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "vrmc/envs.hpp"
#include "vrmc/exact_dp.hpp"
#include "vrmc/kernels.hpp"

using namespace vrmc;
using kernels::Backend;

namespace {

std::vector<Backend> simd_backends() {
    std::vector<Backend> out;
    for (Backend b : {Backend::Avx2, Backend::Neon}) {
        if (kernels::available(b)) out.push_back(b);
    }
    return out;
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
    return v;
}

double sum_abs_products(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
    return s;
}

} // namespace

TEST(Kernels, ScalarReferenceIsLeftToRight) {
    const std::vector<double> a{1e16, 1.0, -1e16, 1.0};
    const std::vector<double> b{1.0, 1.0, 1.0, 1.0};
    EXPECT_EQ(kernels::scalar_table().dot(a.data(), b.data(), 4), 1.0);
    const std::vector<double> w{0.25, 0.75};
    const std::vector<double> x{0.0, 2.0};
    EXPECT_EQ(kernels::scalar_table().centered_square(w.data(), x.data(), 1.5, 2), 0.75);
}

TEST(Kernels, ScalarAlwaysAvailable) {
    EXPECT_TRUE(kernels::available(Backend::Scalar));
    EXPECT_EQ(kernels::table(Backend::Scalar).name, "scalar");
    EXPECT_TRUE(kernels::available(kernels::detect()));
}

TEST(Kernels, ScopedBackendRestores) {
    const Backend before = kernels::active().backend;
    {
        kernels::ScopedBackend guard(Backend::Scalar);
        EXPECT_EQ(kernels::active().backend, Backend::Scalar);
    }
    EXPECT_EQ(kernels::active().backend, before);
}

TEST(Kernels, SimdMatchesScalarForAllLengths) {
    const auto backends = simd_backends();
    if (backends.empty()) GTEST_SKIP() << "no SIMD backend on this machine";
    const auto& ref = kernels::scalar_table();
    Rng rng(2024);
    for (Backend b : backends) {
        const auto& k = kernels::table(b);
        for (std::size_t n = 0; n <= 67; ++n) {
            const auto x = random_vector(rng, n);
            const auto y = random_vector(rng, n);
            std::vector<double> w(n);
            for (double& v : w) v = rng.uniform();
            const double tol = 1e-14 * (1.0 + sum_abs_products(x, y));
            EXPECT_NEAR(k.dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n), tol) << n;
            const double c = rng.uniform();
            EXPECT_NEAR(k.centered_square(w.data(), x.data(), c, n),
                        ref.centered_square(w.data(), x.data(), c, n), 1e-14 * (1.0 + n))
                << n;
            for (std::size_t rows : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{9}}) {
                const auto m = random_vector(rng, rows * n);
                std::vector<double> got(rows), want(rows);
                k.matvec(m.data(), rows, n, x.data(), got.data());
                ref.matvec(m.data(), rows, n, x.data(), want.data());
                for (std::size_t r = 0; r < rows; ++r) {
                    ASSERT_NEAR(got[r], want[r], 1e-14 * (1.0 + n)) << n << " row " << r;
                }
            }
        }
    }
}

TEST(Kernels, CenteredSquareIsNonNegative) {
    Rng rng(8);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
        if (!kernels::available(b)) continue;
        const auto& k = kernels::table(b);
        for (int i = 0; i < 200; ++i) {
            const std::size_t n = 1 + rng.index(40);
            std::vector<double> w(n), x(n, 0.3);
            for (double& v : w) v = rng.uniform();
            EXPECT_GE(k.centered_square(w.data(), x.data(), 0.3, n), 0.0);
        }
    }
}

TEST(Kernels, FullDynamicProgrammingAgreesAcrossBackends) {
    const auto backends = simd_backends();
    if (backends.empty()) GTEST_SKIP() << "no SIMD backend on this machine";
    const TabularMDP mdp = make_gridworld({5, 0.9, 11});
    const TimedPolicy pi = random_policy(mdp.shape(), 12);
    dp::ValueTables ref = [&] {
        kernels::ScopedBackend guard(Backend::Scalar);
        return dp::compute_value_tables(mdp, pi);
    }();
    for (Backend b : backends) {
        kernels::ScopedBackend guard(b);
        const dp::ValueTables got = dp::compute_value_tables(mdp, pi);
        const auto compare = [](std::span<const double> x, std::span<const double> y) {
            ASSERT_EQ(x.size(), y.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                ASSERT_NEAR(x[i], y[i], 1e-11 * (1.0 + std::abs(y[i])));
            }
        };
        compare(got.v.values(), ref.v.values());
        compare(got.q.values(), ref.q.values());
        compare(got.nu.values(), ref.nu.values());
        compare(got.q_hat.values(), ref.q_hat.values());
        compare(got.u.values(), ref.u.values());
        compare(got.w_var.values(), ref.w_var.values());
        compare(got.epsilon.values(), ref.epsilon.values());
    }
}
