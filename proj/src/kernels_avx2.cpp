// AVX2 + FMA kernel variants. Compiled with -mavx2 -mfma on x86-64 only;
// dispatch.cpp checks cpu support before handing out this table.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "styleaudit/kernels.hpp"

namespace styleaudit::kernels {
namespace {

// 6x16 microkernel: accumulates A[i0..i0+6, :] * B[:, j0..j0+16] into C.
// B rows are contiguous 16-float spans; A values are broadcast.
inline void micro_6x16(std::size_t k, const float* a, std::size_t lda,
                       const float* b, std::size_t ldb, float* c,
                       std::size_t ldc) {
    __m256 c00 = _mm256_loadu_ps(c + 0 * ldc);
    __m256 c01 = _mm256_loadu_ps(c + 0 * ldc + 8);
    __m256 c10 = _mm256_loadu_ps(c + 1 * ldc);
    __m256 c11 = _mm256_loadu_ps(c + 1 * ldc + 8);
    __m256 c20 = _mm256_loadu_ps(c + 2 * ldc);
    __m256 c21 = _mm256_loadu_ps(c + 2 * ldc + 8);
    __m256 c30 = _mm256_loadu_ps(c + 3 * ldc);
    __m256 c31 = _mm256_loadu_ps(c + 3 * ldc + 8);
    __m256 c40 = _mm256_loadu_ps(c + 4 * ldc);
    __m256 c41 = _mm256_loadu_ps(c + 4 * ldc + 8);
    __m256 c50 = _mm256_loadu_ps(c + 5 * ldc);
    __m256 c51 = _mm256_loadu_ps(c + 5 * ldc + 8);
    for (std::size_t p = 0; p < k; ++p) {
        const __m256 b0 = _mm256_loadu_ps(b + p * ldb);
        const __m256 b1 = _mm256_loadu_ps(b + p * ldb + 8);
        __m256 av;
        av = _mm256_broadcast_ss(a + 0 * lda + p);
        c00 = _mm256_fmadd_ps(av, b0, c00);
        c01 = _mm256_fmadd_ps(av, b1, c01);
        av = _mm256_broadcast_ss(a + 1 * lda + p);
        c10 = _mm256_fmadd_ps(av, b0, c10);
        c11 = _mm256_fmadd_ps(av, b1, c11);
        av = _mm256_broadcast_ss(a + 2 * lda + p);
        c20 = _mm256_fmadd_ps(av, b0, c20);
        c21 = _mm256_fmadd_ps(av, b1, c21);
        av = _mm256_broadcast_ss(a + 3 * lda + p);
        c30 = _mm256_fmadd_ps(av, b0, c30);
        c31 = _mm256_fmadd_ps(av, b1, c31);
        av = _mm256_broadcast_ss(a + 4 * lda + p);
        c40 = _mm256_fmadd_ps(av, b0, c40);
        c41 = _mm256_fmadd_ps(av, b1, c41);
        av = _mm256_broadcast_ss(a + 5 * lda + p);
        c50 = _mm256_fmadd_ps(av, b0, c50);
        c51 = _mm256_fmadd_ps(av, b1, c51);
    }
    _mm256_storeu_ps(c + 0 * ldc, c00);
    _mm256_storeu_ps(c + 0 * ldc + 8, c01);
    _mm256_storeu_ps(c + 1 * ldc, c10);
    _mm256_storeu_ps(c + 1 * ldc + 8, c11);
    _mm256_storeu_ps(c + 2 * ldc, c20);
    _mm256_storeu_ps(c + 2 * ldc + 8, c21);
    _mm256_storeu_ps(c + 3 * ldc, c30);
    _mm256_storeu_ps(c + 3 * ldc + 8, c31);
    _mm256_storeu_ps(c + 4 * ldc, c40);
    _mm256_storeu_ps(c + 4 * ldc + 8, c41);
    _mm256_storeu_ps(c + 5 * ldc, c50);
    _mm256_storeu_ps(c + 5 * ldc + 8, c51);
}

// Single-row fallback used for M/N tails inside a column block.
inline void row_tail(std::size_t k, const float* a, const float* b,
                     std::size_t ldb, float* c, std::size_t j0,
                     std::size_t j1) {
    for (std::size_t p = 0; p < k; ++p) {
        const __m256 av = _mm256_broadcast_ss(a + p);
        const float as = a[p];
        const float* brow = b + p * ldb;
        std::size_t j = j0;
        for (; j + 8 <= j1; j += 8) {
            __m256 cv = _mm256_loadu_ps(c + j);
            cv = _mm256_fmadd_ps(av, _mm256_loadu_ps(brow + j), cv);
            _mm256_storeu_ps(c + j, cv);
        }
        for (; j < j1; ++j) c[j] += as * brow[j];
    }
}

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a,
                  const float* b, float* c, bool zero_fill) {
    if (zero_fill) std::memset(c, 0, m * n * sizeof(float));
    // Column blocks sized so the K x Nc panel of B stays cache-resident
    // while every row strip of A passes over it.
    std::size_t nc = k == 0 ? n : (65536 / std::max<std::size_t>(k, 1));
    nc = std::max<std::size_t>(nc - nc % 16, 32);
    for (std::size_t jc = 0; jc < n; jc += nc) {
        const std::size_t jend = std::min(n, jc + nc);
        std::size_t i = 0;
        for (; i + 6 <= m; i += 6) {
            std::size_t j = jc;
            for (; j + 16 <= jend; j += 16)
                micro_6x16(k, a + i * k, k, b + j, n, c + i * n + j, n);
            if (j < jend)
                for (std::size_t r = 0; r < 6; ++r)
                    row_tail(k, a + (i + r) * k, b, n, c + (i + r) * n, j,
                             jend);
        }
        for (; i < m; ++i) row_tail(k, a + i * k, b, n, c + i * n, jc, jend);
    }
}

inline float hsum8(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
    return _mm_cvtss_f32(lo);
}

void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a,
                  const float* b, float* c, bool zero_fill) {
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        float* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const float* brow = b + j * k;
            __m256 acc0 = _mm256_setzero_ps();
            __m256 acc1 = _mm256_setzero_ps();
            std::size_t p = 0;
            for (; p + 16 <= k; p += 16) {
                acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p),
                                       _mm256_loadu_ps(brow + p), acc0);
                acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p + 8),
                                       _mm256_loadu_ps(brow + p + 8), acc1);
            }
            for (; p + 8 <= k; p += 8)
                acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p),
                                       _mm256_loadu_ps(brow + p), acc0);
            float acc = hsum8(_mm256_add_ps(acc0, acc1));
            for (; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = zero_fill ? acc : crow[j] + acc;
        }
    }
}

void bias_relu_rows_avx2(float* data, std::size_t rows, std::size_t cols,
                         const float* bias) {
    const __m256 zero = _mm256_setzero_ps();
    for (std::size_t r = 0; r < rows; ++r) {
        float* row = data + r * cols;
        const __m256 bv = _mm256_set1_ps(bias[r]);
        std::size_t j = 0;
        for (; j + 8 <= cols; j += 8) {
            const __m256 v =
                _mm256_max_ps(zero, _mm256_add_ps(_mm256_loadu_ps(row + j), bv));
            _mm256_storeu_ps(row + j, v);
        }
        for (; j < cols; ++j) row[j] = std::max(0.0f, row[j] + bias[r]);
    }
}

std::pair<float, float> max_mean_avx2(const float* data, std::size_t n) {
    // Max in 8 float lanes; sum in 4 double lanes so the mean agrees with
    // the scalar reference to double rounding.
    __m256 mx = _mm256_set1_ps(data[0]);
    __m256d sum0 = _mm256_setzero_pd();
    __m256d sum1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 v = _mm256_loadu_ps(data + i);
        mx = _mm256_max_ps(mx, v);
        sum0 = _mm256_add_pd(sum0, _mm256_cvtps_pd(_mm256_castps256_ps128(v)));
        sum1 = _mm256_add_pd(sum1, _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)));
    }
    alignas(32) float mx_lanes[8];
    _mm256_store_ps(mx_lanes, mx);
    float best = mx_lanes[0];
    for (int l = 1; l < 8; ++l) best = std::max(best, mx_lanes[l]);
    alignas(32) double s_lanes[4];
    _mm256_store_pd(s_lanes, _mm256_add_pd(sum0, sum1));
    double total = s_lanes[0] + s_lanes[1] + s_lanes[2] + s_lanes[3];
    for (; i < n; ++i) {
        best = std::max(best, data[i]);
        total += data[i];
    }
    return {best, static_cast<float>(total / double(n))};
}

void maxpool2x2_avx2(const float* src, std::size_t h, std::size_t w,
                     float* dst) {
    const std::size_t oh = h / 2, ow = w / 2;
    const __m256i lane_fix = _mm256_setr_epi32(0, 1, 4, 5, 2, 3, 6, 7);
    for (std::size_t y = 0; y < oh; ++y) {
        const float* r0 = src + (2 * y) * w;
        const float* r1 = r0 + w;
        float* out = dst + y * ow;
        std::size_t x = 0;
        for (; x + 8 <= ow; x += 8) {
            const std::size_t j = 2 * x;
            const __m256 v0 = _mm256_max_ps(_mm256_loadu_ps(r0 + j),
                                            _mm256_loadu_ps(r1 + j));
            const __m256 v1 = _mm256_max_ps(_mm256_loadu_ps(r0 + j + 8),
                                            _mm256_loadu_ps(r1 + j + 8));
            const __m256 even = _mm256_shuffle_ps(v0, v1, _MM_SHUFFLE(2, 0, 2, 0));
            const __m256 odd = _mm256_shuffle_ps(v0, v1, _MM_SHUFFLE(3, 1, 3, 1));
            const __m256 mx =
                _mm256_permutevar8x32_ps(_mm256_max_ps(even, odd), lane_fix);
            _mm256_storeu_ps(out + x, mx);
        }
        for (; x < ow; ++x) {
            const std::size_t j = 2 * x;
            out[x] = std::max(std::max(r0[j], r0[j + 1]),
                              std::max(r1[j], r1[j + 1]));
        }
    }
}

void adam_step_avx2(float* param, const float* grad, float* m, float* v,
                    std::size_t n, float lr, float beta1, float beta2,
                    float eps, float corr1, float corr2) {
    const __m256 b1 = _mm256_set1_ps(beta1);
    const __m256 b1c = _mm256_set1_ps(1.0f - beta1);
    const __m256 b2 = _mm256_set1_ps(beta2);
    const __m256 b2c = _mm256_set1_ps(1.0f - beta2);
    const __m256 inv1 = _mm256_set1_ps(1.0f / corr1);
    const __m256 inv2 = _mm256_set1_ps(1.0f / corr2);
    const __m256 vlr = _mm256_set1_ps(lr);
    const __m256 veps = _mm256_set1_ps(eps);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 g = _mm256_loadu_ps(grad + i);
        __m256 mv = _mm256_loadu_ps(m + i);
        __m256 vv = _mm256_loadu_ps(v + i);
        mv = _mm256_fmadd_ps(b1, mv, _mm256_mul_ps(b1c, g));
        vv = _mm256_fmadd_ps(b2, vv, _mm256_mul_ps(b2c, _mm256_mul_ps(g, g)));
        _mm256_storeu_ps(m + i, mv);
        _mm256_storeu_ps(v + i, vv);
        const __m256 mhat = _mm256_mul_ps(mv, inv1);
        const __m256 vhat = _mm256_mul_ps(vv, inv2);
        const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
        const __m256 upd = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom);
        _mm256_storeu_ps(param + i,
                         _mm256_sub_ps(_mm256_loadu_ps(param + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0f - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0f - beta2) * grad[i] * grad[i];
        const float mhat = m[i] / corr1;
        const float vhat = v[i] / corr2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

namespace detail {

const KernelTable& avx2_table() {
    static const KernelTable table{
        gemm_nn_avx2,  gemm_nt_avx2,    bias_relu_rows_avx2,
        max_mean_avx2, maxpool2x2_avx2, adam_step_avx2,
    };
    return table;
}

}  // namespace detail
}  // namespace styleaudit::kernels

#endif  // x86-64
