#pragma once

#include <cstddef>
#include <string>
#include <utility>

// Data-parallel inner loops behind the extractor, the discriminator and the
// pooling stage. Every kernel has a scalar reference implementation plus
// SIMD variants (AVX2 on x86-64, NEON on aarch64) selected at runtime; the
// variants are equivalence-tested against the scalar reference.
//
// Matrix convention: row-major, C[M x N], no implicit transposes beyond the
// _nt / _tn entry points.

namespace styleaudit::kernels {

enum class Backend { scalar, avx2, neon };

// Highest backend usable on this machine.
Backend best_backend();

// Active backend; defaults to best_backend(). The STYLEAUDIT_KERNELS
// environment variable ("scalar", "avx2", "neon") overrides at startup.
Backend active_backend();
void set_backend(Backend backend);
std::string backend_name(Backend backend);

// C[M x N] = (zero_fill ? 0 : C) + A[M x K] * B[K x N]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a,
             const float* b, float* c, bool zero_fill);

// C[M x N] = (zero_fill ? 0 : C) + A[M x K] * B[N x K]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a,
             const float* b, float* c, bool zero_fill);

// Double-precision gemm for the small-network instantiation used by
// numerical checks. Scalar only; these nets have a few hundred weights.
void gemm_nn_f64(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c, bool zero_fill);
void gemm_nt_f64(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c, bool zero_fill);

// rows[r][:] = max(0, rows[r][:] + bias[r]) for an [rows x cols] matrix.
void bias_relu_rows(float* data, std::size_t rows, std::size_t cols,
                    const float* bias);

// (max, mean) over n contiguous floats. n >= 1.
std::pair<float, float> max_mean(const float* data, std::size_t n);

// 2x2 max pooling with stride 2 over a single [h x w] plane; odd trailing
// row/column is dropped (h, w >= 2 in practice).
void maxpool2x2(const float* src, std::size_t h, std::size_t w, float* dst);

// One Adam update over n parameters. m and v are the exponential moments;
// corr1/corr2 are the 1 - beta^t bias corrections for the current step.
void adam_step(float* param, const float* grad, float* m, float* v,
               std::size_t n, float lr, float beta1, float beta2, float eps,
               float corr1, float corr2);

namespace detail {

struct KernelTable {
    void (*gemm_nn)(std::size_t, std::size_t, std::size_t, const float*,
                    const float*, float*, bool);
    void (*gemm_nt)(std::size_t, std::size_t, std::size_t, const float*,
                    const float*, float*, bool);
    void (*bias_relu_rows)(float*, std::size_t, std::size_t, const float*);
    std::pair<float, float> (*max_mean)(const float*, std::size_t);
    void (*maxpool2x2)(const float*, std::size_t, std::size_t, float*);
    void (*adam_step)(float*, const float*, float*, float*, std::size_t,
                      float, float, float, float, float, float);
};

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

}  // namespace detail

}  // namespace styleaudit::kernels
