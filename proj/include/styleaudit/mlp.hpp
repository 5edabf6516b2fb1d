#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "styleaudit/errors.hpp"
#include "styleaudit/kernels.hpp"
#include "styleaudit/rng.hpp"

namespace styleaudit {

template <typename T>
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T(0)) {}

    T* row(std::size_t r) { return data.data() + r * cols; }
    const T* row(std::size_t r) const { return data.data() + r * cols; }
    bool empty() const { return rows == 0; }
};

namespace detail {

inline void gemm_nn_t(std::size_t m, std::size_t n, std::size_t k,
                      const float* a, const float* b, float* c, bool zero) {
    kernels::gemm_nn(m, n, k, a, b, c, zero);
}
inline void gemm_nn_t(std::size_t m, std::size_t n, std::size_t k,
                      const double* a, const double* b, double* c, bool zero) {
    kernels::gemm_nn_f64(m, n, k, a, b, c, zero);
}
inline void gemm_nt_t(std::size_t m, std::size_t n, std::size_t k,
                      const float* a, const float* b, float* c, bool zero) {
    kernels::gemm_nt(m, n, k, a, b, c, zero);
}
inline void gemm_nt_t(std::size_t m, std::size_t n, std::size_t k,
                      const double* a, const double* b, double* c, bool zero) {
    kernels::gemm_nt_f64(m, n, k, a, b, c, zero);
}

}  // namespace detail

// Fully connected regression network: ReLU hidden layers, tanh output.
// Weights are [in x out] row-major per layer. Instantiated with float for
// production training and double for numerical gradient verification.
template <typename T>
class Mlp {
public:
    Mlp() = default;

    // Zero-initialized network (tanh(0) = 0 for any input).
    explicit Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
        if (sizes_.size() < 2) throw InvalidConfig("mlp needs >= 2 layer sizes");
        if (sizes_.back() != 1) throw InvalidConfig("mlp output size must be 1");
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            weights_.emplace_back(
                static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1], T(0));
            biases_.emplace_back(static_cast<std::size_t>(sizes_[l + 1]), T(0));
        }
    }

    void init_random(std::uint64_t seed) {
        const Rng base(seed);
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            Rng rng = base.derive(l);
            const bool last = l + 1 == weights_.size();
            const double fan_in = sizes_[l];
            const double fan_out = sizes_[l + 1];
            const double std_dev = last ? std::sqrt(1.0 / (fan_in + fan_out))
                                        : std::sqrt(2.0 / fan_in);
            for (auto& w : weights_[l])
                w = static_cast<T>(rng.normal(0.0, std_dev));
            for (auto& b : biases_[l]) b = T(0);
        }
    }

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    std::size_t layer_count() const { return weights_.size(); }
    std::vector<std::vector<T>>& weights() { return weights_; }
    std::vector<std::vector<T>>& biases() { return biases_; }
    const std::vector<std::vector<T>>& weights() const { return weights_; }
    const std::vector<std::vector<T>>& biases() const { return biases_; }

    // Forward pass over a batch; returns the tanh outputs, one per row.
    std::vector<T> forward(const Matrix<T>& input) const {
        std::vector<Matrix<T>> acts;
        return forward_impl(input, acts, /*keep=*/false);
    }

    T score_one(const T* rep, std::size_t dim) const {
        if (dim != static_cast<std::size_t>(sizes_.front()))
            throw DimMismatch("representation length " + std::to_string(dim) +
                              " != input dim " + std::to_string(sizes_.front()));
        Matrix<T> input(1, dim);
        std::copy(rep, rep + dim, input.data.begin());
        return forward(input)[0];
    }

    // Squared-error regression term plus pair-calibration term, each term
    // averaged over its own count:
    //   L = mean_i (y_i - f(x_i))^2 + mean_j (f(g_j) - f(p_j))^2
    T loss(const Matrix<T>& batch, const std::vector<T>& targets,
           const Matrix<T>& pair_public, const Matrix<T>& pair_generated) const {
        check_pair_shapes(batch, targets, pair_public, pair_generated);
        const std::vector<T> f_batch = forward(batch);
        T total = T(0);
        for (std::size_t i = 0; i < f_batch.size(); ++i) {
            const T d = targets[i] - f_batch[i];
            total += d * d;
        }
        total /= static_cast<T>(batch.rows);
        if (pair_public.rows > 0) {
            const std::vector<T> fp = forward(pair_public);
            const std::vector<T> fg = forward(pair_generated);
            T pair_term = T(0);
            for (std::size_t j = 0; j < fp.size(); ++j) {
                const T d = fg[j] - fp[j];
                pair_term += d * d;
            }
            total += pair_term / static_cast<T>(pair_public.rows);
        }
        return total;
    }

    struct Gradients {
        std::vector<std::vector<T>> weights;
        std::vector<std::vector<T>> biases;
    };

    // Loss plus analytic gradients via backprop. The regression rows and the
    // two pair sides run as one concatenated batch.
    T loss_and_grad(const Matrix<T>& batch, const std::vector<T>& targets,
                    const Matrix<T>& pair_public,
                    const Matrix<T>& pair_generated, Gradients& grads) const {
        check_pair_shapes(batch, targets, pair_public, pair_generated);
        const std::size_t b = batch.rows;
        const std::size_t p = pair_public.rows;
        const std::size_t total_rows = b + 2 * p;
        const std::size_t dim = sizes_.front();

        Matrix<T> all(total_rows, dim);
        std::copy(batch.data.begin(), batch.data.end(), all.data.begin());
        if (p > 0) {
            std::copy(pair_public.data.begin(), pair_public.data.end(),
                      all.data.begin() + b * dim);
            std::copy(pair_generated.data.begin(), pair_generated.data.end(),
                      all.data.begin() + (b + p) * dim);
        }

        std::vector<Matrix<T>> acts;  // acts[0] = input, acts[l] = hidden l
        const std::vector<T> f = forward_impl(all, acts, /*keep=*/true);

        T loss_value = T(0);
        std::vector<T> df(total_rows);
        for (std::size_t i = 0; i < b; ++i) {
            const T d = targets[i] - f[i];
            loss_value += d * d;
            df[i] = T(-2) * d / static_cast<T>(b);
        }
        loss_value /= static_cast<T>(b);
        if (p > 0) {
            T pair_term = T(0);
            for (std::size_t j = 0; j < p; ++j) {
                const T d = f[b + p + j] - f[b + j];  // f(g) - f(p)
                pair_term += d * d;
                df[b + p + j] = T(2) * d / static_cast<T>(p);
                df[b + j] = T(-2) * d / static_cast<T>(p);
            }
            loss_value += pair_term / static_cast<T>(p);
        }

        backward(acts, f, df, grads);
        return loss_value;
    }

private:
    void check_pair_shapes(const Matrix<T>& batch, const std::vector<T>& targets,
                           const Matrix<T>& pair_public,
                           const Matrix<T>& pair_generated) const {
        if (batch.rows == 0) throw InvalidConfig("loss: empty batch");
        if (batch.cols != static_cast<std::size_t>(sizes_.front()))
            throw DimMismatch("batch width != network input dim");
        if (targets.size() != batch.rows)
            throw DimMismatch("targets length != batch rows");
        if (pair_public.rows != pair_generated.rows)
            throw DimMismatch("pair sides differ in length");
        if (pair_public.rows > 0 &&
            (pair_public.cols != batch.cols || pair_generated.cols != batch.cols))
            throw DimMismatch("pair width != network input dim");
    }

    std::vector<T> forward_impl(const Matrix<T>& input,
                                std::vector<Matrix<T>>& acts, bool keep) const {
        if (input.cols != static_cast<std::size_t>(sizes_.front()))
            throw DimMismatch("input width != network input dim");
        if (keep) acts.push_back(input);
        Matrix<T> current = input;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            Matrix<T> next(current.rows, sizes_[l + 1]);
            detail::gemm_nn_t(current.rows, next.cols, current.cols,
                              current.data.data(), weights_[l].data(),
                              next.data.data(), /*zero=*/true);
            const bool last = l + 1 == weights_.size();
            for (std::size_t r = 0; r < next.rows; ++r) {
                T* row = next.row(r);
                for (std::size_t j = 0; j < next.cols; ++j) {
                    row[j] += biases_[l][j];
                    if (!last && row[j] < T(0)) row[j] = T(0);
                }
            }
            if (keep && !last) acts.push_back(next);
            current = std::move(next);
        }
        std::vector<T> out(current.rows);
        for (std::size_t r = 0; r < current.rows; ++r)
            out[r] = std::tanh(current.row(r)[0]);
        return out;
    }

    void backward(const std::vector<Matrix<T>>& acts, const std::vector<T>& f,
                  const std::vector<T>& df, Gradients& grads) const {
        const std::size_t layers = weights_.size();
        grads.weights.assign(layers, {});
        grads.biases.assign(layers, {});
        for (std::size_t l = 0; l < layers; ++l) {
            grads.weights[l].assign(weights_[l].size(), T(0));
            grads.biases[l].assign(biases_[l].size(), T(0));
        }

        const std::size_t rows = acts.front().rows;
        // d/dz of tanh output.
        Matrix<T> delta(rows, 1);
        for (std::size_t r = 0; r < rows; ++r)
            delta.row(r)[0] = df[r] * (T(1) - f[r] * f[r]);

        for (std::size_t l = layers; l-- > 0;) {
            const Matrix<T>& below = acts[l];
            // dW = below^T * delta, via an explicit transpose + gemm_nn so
            // the hot path stays on the blocked kernel.
            Matrix<T> below_t(below.cols, below.rows);
            for (std::size_t r = 0; r < below.rows; ++r)
                for (std::size_t c = 0; c < below.cols; ++c)
                    below_t.data[c * below.rows + r] = below.row(r)[c];
            detail::gemm_nn_t(below.cols, delta.cols, below.rows,
                              below_t.data.data(), delta.data.data(),
                              grads.weights[l].data(), /*zero=*/true);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < delta.cols; ++j)
                    grads.biases[l][j] += delta.row(r)[j];
            if (l == 0) break;
            // delta_below = delta * W^T, masked by the ReLU activation.
            Matrix<T> next(rows, below.cols);
            detail::gemm_nt_t(rows, below.cols, delta.cols, delta.data.data(),
                              weights_[l].data(), next.data.data(),
                              /*zero=*/true);
            for (std::size_t r = 0; r < rows; ++r) {
                T* nrow = next.row(r);
                const T* arow = below.row(r);
                for (std::size_t c = 0; c < below.cols; ++c)
                    if (arow[c] <= T(0)) nrow[c] = T(0);
            }
            delta = std::move(next);
        }
    }

    std::vector<int> sizes_;
    std::vector<std::vector<T>> weights_;
    std::vector<std::vector<T>> biases_;
};

}  // namespace styleaudit
