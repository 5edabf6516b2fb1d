#include "styleaudit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace styleaudit::kernels {
namespace {

using detail::KernelTable;

Backend detect_best() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return Backend::avx2;
    return Backend::scalar;
#elif defined(__aarch64__)
    return Backend::neon;
#else
    return Backend::scalar;
#endif
}

Backend initial_backend() {
    if (const char* env = std::getenv("STYLEAUDIT_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) return Backend::avx2;
        if (std::strcmp(env, "neon") == 0) return Backend::neon;
    }
    return detect_best();
}

std::atomic<Backend> g_backend{initial_backend()};

const KernelTable& table_for(Backend backend) {
    switch (backend) {
        case Backend::scalar:
            return detail::scalar_table();
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return detail::avx2_table();
#else
            break;
#endif
        case Backend::neon:
#if defined(__aarch64__)
            return detail::neon_table();
#else
            break;
#endif
    }
    throw std::runtime_error("kernel backend not available on this machine");
}

const KernelTable& active_table() { return table_for(g_backend.load()); }

}  // namespace

Backend best_backend() { return detect_best(); }

Backend active_backend() { return g_backend.load(); }

void set_backend(Backend backend) {
    table_for(backend);  // validates availability
    g_backend.store(backend);
}

std::string backend_name(Backend backend) {
    switch (backend) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a,
             const float* b, float* c, bool zero_fill) {
    active_table().gemm_nn(m, n, k, a, b, c, zero_fill);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a,
             const float* b, float* c, bool zero_fill) {
    active_table().gemm_nt(m, n, k, a, b, c, zero_fill);
}

void bias_relu_rows(float* data, std::size_t rows, std::size_t cols,
                    const float* bias) {
    active_table().bias_relu_rows(data, rows, cols, bias);
}

std::pair<float, float> max_mean(const float* data, std::size_t n) {
    return active_table().max_mean(data, n);
}

void maxpool2x2(const float* src, std::size_t h, std::size_t w, float* dst) {
    active_table().maxpool2x2(src, h, w, dst);
}

void adam_step(float* param, const float* grad, float* m, float* v,
               std::size_t n, float lr, float beta1, float beta2, float eps,
               float corr1, float corr2) {
    active_table().adam_step(param, grad, m, v, n, lr, beta1, beta2, eps,
                             corr1, corr2);
}

}  // namespace styleaudit::kernels
