#include <algorithm>
#include <cmath>
#include <cstring>

#include "styleaudit/kernels.hpp"

// Reference kernels. Plain loops, no intrinsics; the SIMD variants are
// validated against these.

namespace styleaudit::kernels {
namespace {

void gemm_nn_scalar(std::size_t m, std::size_t n, std::size_t k,
                    const float* a, const float* b, float* c, bool zero_fill) {
    if (zero_fill) std::memset(c, 0, m * n * sizeof(float));
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        float* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const float av = arow[p];
            const float* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt_scalar(std::size_t m, std::size_t n, std::size_t k,
                    const float* a, const float* b, float* c, bool zero_fill) {
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        float* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const float* brow = b + j * k;
            float acc = 0.0f;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = zero_fill ? acc : crow[j] + acc;
        }
    }
}

void bias_relu_rows_scalar(float* data, std::size_t rows, std::size_t cols,
                           const float* bias) {
    for (std::size_t r = 0; r < rows; ++r) {
        float* row = data + r * cols;
        const float bv = bias[r];
        for (std::size_t j = 0; j < cols; ++j)
            row[j] = std::max(0.0f, row[j] + bv);
    }
}

std::pair<float, float> max_mean_scalar(const float* data, std::size_t n) {
    float mx = data[0];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx = std::max(mx, data[i]);
        sum += data[i];
    }
    return {mx, static_cast<float>(sum / double(n))};
}

void maxpool2x2_scalar(const float* src, std::size_t h, std::size_t w,
                       float* dst) {
    const std::size_t oh = h / 2, ow = w / 2;
    for (std::size_t y = 0; y < oh; ++y) {
        const float* r0 = src + (2 * y) * w;
        const float* r1 = r0 + w;
        float* out = dst + y * ow;
        for (std::size_t x = 0; x < ow; ++x) {
            const std::size_t j = 2 * x;
            out[x] = std::max(std::max(r0[j], r0[j + 1]),
                              std::max(r1[j], r1[j + 1]));
        }
    }
}

void adam_step_scalar(float* param, const float* grad, float* m, float* v,
                      std::size_t n, float lr, float beta1, float beta2,
                      float eps, float corr1, float corr2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0f - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0f - beta2) * grad[i] * grad[i];
        const float mhat = m[i] / corr1;
        const float vhat = v[i] / corr2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

namespace detail {

const KernelTable& scalar_table() {
    static const KernelTable table{
        gemm_nn_scalar,  gemm_nt_scalar,    bias_relu_rows_scalar,
        max_mean_scalar, maxpool2x2_scalar, adam_step_scalar,
    };
    return table;
}

}  // namespace detail

void gemm_nn_f64(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c, bool zero_fill) {
    if (zero_fill) std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt_f64(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c, bool zero_fill) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = zero_fill ? acc : crow[j] + acc;
        }
    }
}

}  // namespace styleaudit::kernels
