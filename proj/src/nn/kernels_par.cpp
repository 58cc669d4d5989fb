#include <algorithm>
#include <cmath>
#include <cstring>

#include "fedhar/nn/kernels.hpp"

// OpenMP backend. Parallel loops only ever split work across independent
// output elements; every element is accumulated in the same order as the
// reference backend, so the two agree bitwise for any thread count.

namespace fedhar::nn::kernels::par {

void conv1d_forward(const double* in, std::size_t B, std::size_t C, std::size_t T,
                    const double* w, const double* bias, std::size_t F, std::size_t K,
                    double* out) {
    const std::size_t L = T - K + 1;
    const std::int64_t BF = static_cast<std::int64_t>(B * F);
#pragma omp parallel for schedule(static)
    for (std::int64_t bf = 0; bf < BF; ++bf) {
        const std::size_t b = static_cast<std::size_t>(bf) / F;
        const std::size_t f = static_cast<std::size_t>(bf) % F;
        for (std::size_t t = 0; t < L; ++t) {
            double acc = bias[f];
            for (std::size_t c = 0; c < C; ++c) {
                const double* xin = in + (b * C + c) * T + t;
                const double* wf = w + (f * C + c) * K;
                for (std::size_t k = 0; k < K; ++k) acc += xin[k] * wf[k];
            }
            out[(b * F + f) * L + t] = acc;
        }
    }
}

void conv1d_backward(const double* in, std::size_t B, std::size_t C, std::size_t T,
                     const double* w, std::size_t F, std::size_t K, const double* dout,
                     double* dw, double* dbias, double* din) {
    const std::size_t L = T - K + 1;

#pragma omp parallel for schedule(static)
    for (std::int64_t f = 0; f < static_cast<std::int64_t>(F); ++f) {
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const double* g = dout + (b * F + static_cast<std::size_t>(f)) * L;
            for (std::size_t t = 0; t < L; ++t) acc += g[t];
        }
        dbias[f] = acc;
    }

    const std::int64_t FCK = static_cast<std::int64_t>(F * C * K);
#pragma omp parallel for schedule(static)
    for (std::int64_t fck = 0; fck < FCK; ++fck) {
        const std::size_t f = static_cast<std::size_t>(fck) / (C * K);
        const std::size_t c = (static_cast<std::size_t>(fck) / K) % C;
        const std::size_t k = static_cast<std::size_t>(fck) % K;
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const double* g = dout + (b * F + f) * L;
            const double* xin = in + (b * C + c) * T + k;
            for (std::size_t t = 0; t < L; ++t) acc += g[t] * xin[t];
        }
        dw[fck] = acc;
    }

    if (din) {
        const std::int64_t BC = static_cast<std::int64_t>(B * C);
#pragma omp parallel for schedule(static)
        for (std::int64_t bc = 0; bc < BC; ++bc) {
            const std::size_t b = static_cast<std::size_t>(bc) / C;
            const std::size_t c = static_cast<std::size_t>(bc) % C;
            double* d = din + (b * C + c) * T;
            std::memset(d, 0, T * sizeof(double));
            for (std::size_t f = 0; f < F; ++f) {
                const double* g = dout + (b * F + f) * L;
                const double* wf = w + (f * C + c) * K;
                for (std::size_t l = 0; l < L; ++l) {
                    for (std::size_t k = 0; k < K; ++k) d[l + k] += g[l] * wf[k];
                }
            }
        }
    }
}

void maxpool1d_forward(const double* in, std::size_t B, std::size_t F, std::size_t T,
                       std::size_t P, double* out, std::int32_t* argmax) {
    const std::size_t L = T / P;
    const std::int64_t BF = static_cast<std::int64_t>(B * F);
#pragma omp parallel for schedule(static)
    for (std::int64_t bf = 0; bf < BF; ++bf) {
        const double* x = in + static_cast<std::size_t>(bf) * T;
        double* y = out + static_cast<std::size_t>(bf) * L;
        std::int32_t* a = argmax + static_cast<std::size_t>(bf) * L;
        for (std::size_t t = 0; t < L; ++t) {
            std::size_t base = t * P;
            std::size_t best = base;
            for (std::size_t p = 1; p < P; ++p) {
                if (x[base + p] > x[best]) best = base + p;
            }
            y[t] = x[best];
            a[t] = static_cast<std::int32_t>(best);
        }
    }
}

void maxpool1d_backward(const double* dout, const std::int32_t* argmax, std::size_t B,
                        std::size_t F, std::size_t T, std::size_t P, double* din) {
    const std::size_t L = T / P;
    const std::int64_t BF = static_cast<std::int64_t>(B * F);
#pragma omp parallel for schedule(static)
    for (std::int64_t bf = 0; bf < BF; ++bf) {
        const double* g = dout + static_cast<std::size_t>(bf) * L;
        const std::int32_t* a = argmax + static_cast<std::size_t>(bf) * L;
        double* d = din + static_cast<std::size_t>(bf) * T;
        std::memset(d, 0, T * sizeof(double));
        for (std::size_t t = 0; t < L; ++t) d[a[t]] += g[t];
    }
}

void dense_forward(const double* in, std::size_t B, std::size_t In, const double* w,
                   const double* bias, std::size_t Out, double* out) {
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(B); ++b) {
        const double* x = in + static_cast<std::size_t>(b) * In;
        double* y = out + static_cast<std::size_t>(b) * Out;
        for (std::size_t o = 0; o < Out; ++o) y[o] = bias[o];
        for (std::size_t i = 0; i < In; ++i) {
            const double xi = x[i];
            const double* wr = w + i * Out;
            for (std::size_t o = 0; o < Out; ++o) y[o] += xi * wr[o];
        }
    }
}

void dense_backward(const double* in, std::size_t B, std::size_t In, const double* w,
                    std::size_t Out, const double* dout, double* dw, double* dbias,
                    double* din) {
#pragma omp parallel for schedule(static)
    for (std::int64_t o = 0; o < static_cast<std::int64_t>(Out); ++o) {
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b) acc += dout[b * Out + static_cast<std::size_t>(o)];
        dbias[o] = acc;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(In); ++i) {
        for (std::size_t o = 0; o < Out; ++o) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                acc += in[b * In + static_cast<std::size_t>(i)] * dout[b * Out + o];
            }
            dw[static_cast<std::size_t>(i) * Out + o] = acc;
        }
    }
    if (din) {
#pragma omp parallel for schedule(static)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(B); ++b) {
            const double* g = dout + static_cast<std::size_t>(b) * Out;
            double* d = din + static_cast<std::size_t>(b) * In;
            for (std::size_t i = 0; i < In; ++i) {
                const double* wr = w + i * Out;
                double acc = 0.0;
                for (std::size_t o = 0; o < Out; ++o) acc += wr[o] * g[o];
                d[i] = acc;
            }
        }
    }
}

void relu_forward(const double* in, std::size_t n, double* out) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        out[i] = in[i] > 0.0 ? in[i] : 0.0;
    }
}

void relu_backward(const double* pre, const double* dout, std::size_t n, double* din) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        din[i] = pre[i] > 0.0 ? dout[i] : 0.0;
    }
}

void softmax_rows(double* x, std::size_t B, std::size_t K) {
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(B); ++b) {
        double* row = x + static_cast<std::size_t>(b) * K;
        double mx = row[0];
        for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            row[k] = std::exp(row[k] - mx);
            sum += row[k];
        }
        for (std::size_t k = 0; k < K; ++k) row[k] /= sum;
    }
}

}  // namespace fedhar::nn::kernels::par
