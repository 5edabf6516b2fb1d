#include <cmath>
#include <vector>

#include <doctest.h>

#include "styleaudit/kernels.hpp"
#include "styleaudit/rng.hpp"

using namespace styleaudit;
namespace k = styleaudit::kernels;

namespace {

std::vector<k::Backend> simd_backends() {
    std::vector<k::Backend> out;
    const k::Backend best = k::best_backend();
    if (best != k::Backend::scalar) out.push_back(best);
    return out;
}

std::vector<float> random_vec(std::size_t n, Rng& rng, float scale = 1.0f) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-scale, scale));
    return v;
}

void check_close(const std::vector<float>& a, const std::vector<float>& b,
                 double rel_tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max(1.0, std::fabs(double(a[i])));
        REQUIRE(std::fabs(double(a[i]) - double(b[i])) / denom <= rel_tol);
    }
}

struct BackendGuard {
    k::Backend saved = k::active_backend();
    ~BackendGuard() { k::set_backend(saved); }
};

}  // namespace

TEST_CASE("gemm_nn SIMD variants match the scalar reference") {
    BackendGuard guard;
    Rng rng(42);
    for (const k::Backend backend : simd_backends()) {
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t m = 1 + rng.uniform_int(40);
            const std::size_t n = 1 + rng.uniform_int(70);
            const std::size_t kk = 1 + rng.uniform_int(50);
            const auto a = random_vec(m * kk, rng);
            const auto b = random_vec(kk * n, rng);
            auto c_scalar = random_vec(m * n, rng);
            auto c_simd = c_scalar;
            const bool zero_fill = trial % 2 == 0;

            k::set_backend(k::Backend::scalar);
            k::gemm_nn(m, n, kk, a.data(), b.data(), c_scalar.data(), zero_fill);
            k::set_backend(backend);
            k::gemm_nn(m, n, kk, a.data(), b.data(), c_simd.data(), zero_fill);
            check_close(c_scalar, c_simd, 1e-5);
        }
    }
}

TEST_CASE("gemm_nt SIMD variants match the scalar reference") {
    BackendGuard guard;
    Rng rng(43);
    for (const k::Backend backend : simd_backends()) {
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t m = 1 + rng.uniform_int(30);
            const std::size_t n = 1 + rng.uniform_int(30);
            const std::size_t kk = 1 + rng.uniform_int(80);
            const auto a = random_vec(m * kk, rng);
            const auto b = random_vec(n * kk, rng);
            auto c_scalar = random_vec(m * n, rng);
            auto c_simd = c_scalar;
            const bool zero_fill = trial % 2 == 1;

            k::set_backend(k::Backend::scalar);
            k::gemm_nt(m, n, kk, a.data(), b.data(), c_scalar.data(), zero_fill);
            k::set_backend(backend);
            k::gemm_nt(m, n, kk, a.data(), b.data(), c_simd.data(), zero_fill);
            check_close(c_scalar, c_simd, 1e-5);
        }
    }
}

TEST_CASE("gemm_nn agrees with a plain triple loop") {
    Rng rng(44);
    const std::size_t m = 7, n = 19, kk = 13;
    const auto a = random_vec(m * kk, rng);
    const auto b = random_vec(kk * n, rng);
    std::vector<float> c(m * n, 0.0f);
    k::gemm_nn(m, n, kk, a.data(), b.data(), c.data(), true);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < kk; ++p)
                acc += double(a[i * kk + p]) * double(b[p * n + j]);
            REQUIRE(std::fabs(acc - c[i * n + j]) <= 1e-4);
        }
}

TEST_CASE("bias_relu_rows matches scalar on all backends") {
    BackendGuard guard;
    Rng rng(45);
    for (const k::Backend backend : simd_backends()) {
        const std::size_t rows = 5, cols = 37;
        const auto bias = random_vec(rows, rng);
        auto data_scalar = random_vec(rows * cols, rng);
        auto data_simd = data_scalar;
        k::set_backend(k::Backend::scalar);
        k::bias_relu_rows(data_scalar.data(), rows, cols, bias.data());
        k::set_backend(backend);
        k::bias_relu_rows(data_simd.data(), rows, cols, bias.data());
        for (std::size_t i = 0; i < data_scalar.size(); ++i) {
            REQUIRE(data_scalar[i] == data_simd[i]);
            REQUIRE(data_scalar[i] >= 0.0f);
        }
    }
}

TEST_CASE("max_mean equals a brute-force scan") {
    BackendGuard guard;
    Rng rng(46);
    std::vector<k::Backend> backends{k::Backend::scalar};
    for (const auto b : simd_backends()) backends.push_back(b);
    for (const k::Backend backend : backends) {
        k::set_backend(backend);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 1 + rng.uniform_int(300);
            const auto data = random_vec(n, rng, 10.0f);
            float ref_max = data[0];
            double ref_sum = 0.0;
            for (const float v : data) {
                ref_max = std::max(ref_max, v);
                ref_sum += v;
            }
            const auto [mx, mean] = k::max_mean(data.data(), n);
            REQUIRE(mx == ref_max);
            REQUIRE(std::fabs(mean - ref_sum / double(n)) <= 1e-6);
        }
    }
}

TEST_CASE("maxpool2x2 equals scalar exactly on all backends") {
    BackendGuard guard;
    Rng rng(47);
    for (const k::Backend backend : simd_backends()) {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t h = 2 + rng.uniform_int(40);
            const std::size_t w = 2 + rng.uniform_int(40);
            const auto src = random_vec(h * w, rng);
            std::vector<float> dst_scalar((h / 2) * (w / 2));
            std::vector<float> dst_simd(dst_scalar.size());
            k::set_backend(k::Backend::scalar);
            k::maxpool2x2(src.data(), h, w, dst_scalar.data());
            k::set_backend(backend);
            k::maxpool2x2(src.data(), h, w, dst_simd.data());
            REQUIRE(dst_scalar == dst_simd);
        }
    }
}

TEST_CASE("adam_step matches scalar closely on all backends") {
    BackendGuard guard;
    Rng rng(48);
    for (const k::Backend backend : simd_backends()) {
        const std::size_t n = 333;
        const auto grad = random_vec(n, rng);
        auto p0 = random_vec(n, rng);
        auto m0 = random_vec(n, rng, 0.01f);
        std::vector<float> v0(n);
        for (auto& v : v0) v = static_cast<float>(rng.uniform(0.0, 0.01));
        auto p1 = p0;
        auto m1 = m0;
        auto v1 = v0;

        k::set_backend(k::Backend::scalar);
        k::adam_step(p0.data(), grad.data(), m0.data(), v0.data(), n, 1e-3f,
                     0.9f, 0.999f, 1e-8f, 0.1f, 0.001f);
        k::set_backend(backend);
        k::adam_step(p1.data(), grad.data(), m1.data(), v1.data(), n, 1e-3f,
                     0.9f, 0.999f, 1e-8f, 0.1f, 0.001f);
        check_close(p0, p1, 1e-6);
        check_close(m0, m1, 1e-6);
        check_close(v0, v1, 1e-6);
    }
}

TEST_CASE("backend override is honoured") {
    BackendGuard guard;
    k::set_backend(k::Backend::scalar);
    REQUIRE(k::active_backend() == k::Backend::scalar);
    REQUIRE(k::backend_name(k::Backend::scalar) == "scalar");
}
