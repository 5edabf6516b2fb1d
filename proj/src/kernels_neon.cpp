// NEON kernel variants for aarch64. Same contracts as the scalar table.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "styleaudit/kernels.hpp"

namespace styleaudit::kernels {
namespace {

// 4x16 microkernel: 4 rows of A against 16 columns of B.
inline void micro_4x16(std::size_t k, const float* a, std::size_t lda,
                       const float* b, std::size_t ldb, float* c,
                       std::size_t ldc) {
    float32x4_t acc[4][4];
    for (int r = 0; r < 4; ++r)
        for (int q = 0; q < 4; ++q) acc[r][q] = vld1q_f32(c + r * ldc + 4 * q);
    for (std::size_t p = 0; p < k; ++p) {
        const float* brow = b + p * ldb;
        const float32x4_t b0 = vld1q_f32(brow);
        const float32x4_t b1 = vld1q_f32(brow + 4);
        const float32x4_t b2 = vld1q_f32(brow + 8);
        const float32x4_t b3 = vld1q_f32(brow + 12);
        for (int r = 0; r < 4; ++r) {
            const float32x4_t av = vdupq_n_f32(a[r * lda + p]);
            acc[r][0] = vfmaq_f32(acc[r][0], av, b0);
            acc[r][1] = vfmaq_f32(acc[r][1], av, b1);
            acc[r][2] = vfmaq_f32(acc[r][2], av, b2);
            acc[r][3] = vfmaq_f32(acc[r][3], av, b3);
        }
    }
    for (int r = 0; r < 4; ++r)
        for (int q = 0; q < 4; ++q) vst1q_f32(c + r * ldc + 4 * q, acc[r][q]);
}

inline void row_tail(std::size_t k, const float* a, const float* b,
                     std::size_t ldb, float* c, std::size_t j0,
                     std::size_t j1) {
    for (std::size_t p = 0; p < k; ++p) {
        const float32x4_t av = vdupq_n_f32(a[p]);
        const float as = a[p];
        const float* brow = b + p * ldb;
        std::size_t j = j0;
        for (; j + 4 <= j1; j += 4)
            vst1q_f32(c + j, vfmaq_f32(vld1q_f32(c + j), av, vld1q_f32(brow + j)));
        for (; j < j1; ++j) c[j] += as * brow[j];
    }
}

void gemm_nn_neon(std::size_t m, std::size_t n, std::size_t k, const float* a,
                  const float* b, float* c, bool zero_fill) {
    if (zero_fill) std::memset(c, 0, m * n * sizeof(float));
    std::size_t nc = k == 0 ? n : (65536 / std::max<std::size_t>(k, 1));
    nc = std::max<std::size_t>(nc - nc % 16, 32);
    for (std::size_t jc = 0; jc < n; jc += nc) {
        const std::size_t jend = std::min(n, jc + nc);
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) {
            std::size_t j = jc;
            for (; j + 16 <= jend; j += 16)
                micro_4x16(k, a + i * k, k, b + j, n, c + i * n + j, n);
            if (j < jend)
                for (std::size_t r = 0; r < 4; ++r)
                    row_tail(k, a + (i + r) * k, b, n, c + (i + r) * n, j,
                             jend);
        }
        for (; i < m; ++i) row_tail(k, a + i * k, b, n, c + i * n, jc, jend);
    }
}

void gemm_nt_neon(std::size_t m, std::size_t n, std::size_t k, const float* a,
                  const float* b, float* c, bool zero_fill) {
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        float* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const float* brow = b + j * k;
            float32x4_t acc0 = vdupq_n_f32(0.0f);
            float32x4_t acc1 = vdupq_n_f32(0.0f);
            std::size_t p = 0;
            for (; p + 8 <= k; p += 8) {
                acc0 = vfmaq_f32(acc0, vld1q_f32(arow + p), vld1q_f32(brow + p));
                acc1 = vfmaq_f32(acc1, vld1q_f32(arow + p + 4),
                                 vld1q_f32(brow + p + 4));
            }
            for (; p + 4 <= k; p += 4)
                acc0 = vfmaq_f32(acc0, vld1q_f32(arow + p), vld1q_f32(brow + p));
            float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
            for (; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = zero_fill ? acc : crow[j] + acc;
        }
    }
}

void bias_relu_rows_neon(float* data, std::size_t rows, std::size_t cols,
                         const float* bias) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    for (std::size_t r = 0; r < rows; ++r) {
        float* row = data + r * cols;
        const float32x4_t bv = vdupq_n_f32(bias[r]);
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4)
            vst1q_f32(row + j, vmaxq_f32(zero, vaddq_f32(vld1q_f32(row + j), bv)));
        for (; j < cols; ++j) row[j] = std::max(0.0f, row[j] + bias[r]);
    }
}

std::pair<float, float> max_mean_neon(const float* data, std::size_t n) {
    float32x4_t mx = vdupq_n_f32(data[0]);
    float64x2_t sum0 = vdupq_n_f64(0.0);
    float64x2_t sum1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t v = vld1q_f32(data + i);
        mx = vmaxq_f32(mx, v);
        sum0 = vaddq_f64(sum0, vcvt_f64_f32(vget_low_f32(v)));
        sum1 = vaddq_f64(sum1, vcvt_f64_f32(vget_high_f32(v)));
    }
    float best = vmaxvq_f32(mx);
    double total = vaddvq_f64(vaddq_f64(sum0, sum1));
    for (; i < n; ++i) {
        best = std::max(best, data[i]);
        total += data[i];
    }
    return {best, static_cast<float>(total / double(n))};
}

void maxpool2x2_neon(const float* src, std::size_t h, std::size_t w,
                     float* dst) {
    const std::size_t oh = h / 2, ow = w / 2;
    for (std::size_t y = 0; y < oh; ++y) {
        const float* r0 = src + (2 * y) * w;
        const float* r1 = r0 + w;
        float* out = dst + y * ow;
        std::size_t x = 0;
        for (; x + 4 <= ow; x += 4) {
            const std::size_t j = 2 * x;
            const float32x4_t v0 = vmaxq_f32(vld1q_f32(r0 + j), vld1q_f32(r1 + j));
            const float32x4_t v1 =
                vmaxq_f32(vld1q_f32(r0 + j + 4), vld1q_f32(r1 + j + 4));
            vst1q_f32(out + x, vpmaxq_f32(v0, v1));
        }
        for (; x < ow; ++x) {
            const std::size_t j = 2 * x;
            out[x] = std::max(std::max(r0[j], r0[j + 1]),
                              std::max(r1[j], r1[j + 1]));
        }
    }
}

void adam_step_neon(float* param, const float* grad, float* m, float* v,
                    std::size_t n, float lr, float beta1, float beta2,
                    float eps, float corr1, float corr2) {
    const float32x4_t b1 = vdupq_n_f32(beta1);
    const float32x4_t b1c = vdupq_n_f32(1.0f - beta1);
    const float32x4_t b2 = vdupq_n_f32(beta2);
    const float32x4_t b2c = vdupq_n_f32(1.0f - beta2);
    const float32x4_t inv1 = vdupq_n_f32(1.0f / corr1);
    const float32x4_t inv2 = vdupq_n_f32(1.0f / corr2);
    const float32x4_t vlr = vdupq_n_f32(lr);
    const float32x4_t veps = vdupq_n_f32(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t g = vld1q_f32(grad + i);
        float32x4_t mv = vld1q_f32(m + i);
        float32x4_t vv = vld1q_f32(v + i);
        mv = vfmaq_f32(vmulq_f32(b1c, g), b1, mv);
        vv = vfmaq_f32(vmulq_f32(b2c, vmulq_f32(g, g)), b2, vv);
        vst1q_f32(m + i, mv);
        vst1q_f32(v + i, vv);
        const float32x4_t mhat = vmulq_f32(mv, inv1);
        const float32x4_t vhat = vmulq_f32(vv, inv2);
        const float32x4_t denom = vaddq_f32(vsqrtq_f32(vhat), veps);
        const float32x4_t upd = vdivq_f32(vmulq_f32(vlr, mhat), denom);
        vst1q_f32(param + i, vsubq_f32(vld1q_f32(param + i), upd));
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

const KernelTable& neon_table() {
    static const KernelTable table{
        gemm_nn_neon,  gemm_nt_neon,    bias_relu_rows_neon,
        max_mean_neon, maxpool2x2_neon, adam_step_neon,
    };
    return table;
}

}  // namespace detail
}  // namespace styleaudit::kernels

#endif  // __aarch64__
