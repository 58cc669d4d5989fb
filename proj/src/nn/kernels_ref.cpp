#include <algorithm>
#include <cmath>
#include <cstring>

#include "fedhar/nn/kernels.hpp"

// Reference backend: the simplest correct loops, no parallelism. Tests pin
// the OpenMP backend against these bit for bit.

namespace fedhar::nn::kernels::ref {

void conv1d_forward(const double* in, std::size_t B, std::size_t C, std::size_t T,
                    const double* w, const double* bias, std::size_t F, std::size_t K,
                    double* out) {
    const std::size_t L = T - K + 1;
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t f = 0; f < F; ++f) {
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
}

void conv1d_backward(const double* in, std::size_t B, std::size_t C, std::size_t T,
                     const double* w, std::size_t F, std::size_t K, const double* dout,
                     double* dw, double* dbias, double* din) {
    const std::size_t L = T - K + 1;

    for (std::size_t f = 0; f < F; ++f) {
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const double* g = dout + (b * F + f) * L;
            for (std::size_t t = 0; t < L; ++t) acc += g[t];
        }
        dbias[f] = acc;
    }

    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < K; ++k) {
                double acc = 0.0;
                for (std::size_t b = 0; b < B; ++b) {
                    const double* g = dout + (b * F + f) * L;
                    const double* xin = in + (b * C + c) * T + k;
                    for (std::size_t t = 0; t < L; ++t) acc += g[t] * xin[t];
                }
                dw[(f * C + c) * K + k] = acc;
            }
        }
    }

    if (din) {
        // din[b,c,t] = sum over filters and taps with t = l + k.
        std::memset(din, 0, B * C * T * sizeof(double));
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t c = 0; c < C; ++c) {
                double* d = din + (b * C + c) * T;
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
}

void maxpool1d_forward(const double* in, std::size_t B, std::size_t F, std::size_t T,
                       std::size_t P, double* out, std::int32_t* argmax) {
    const std::size_t L = T / P;
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t f = 0; f < F; ++f) {
            const double* x = in + (b * F + f) * T;
            for (std::size_t t = 0; t < L; ++t) {
                std::size_t base = t * P;
                std::size_t best = base;
                for (std::size_t p = 1; p < P; ++p) {
                    if (x[base + p] > x[best]) best = base + p;
                }
                out[(b * F + f) * L + t] = x[best];
                argmax[(b * F + f) * L + t] = static_cast<std::int32_t>(best);
            }
        }
    }
}

void maxpool1d_backward(const double* dout, const std::int32_t* argmax, std::size_t B,
                        std::size_t F, std::size_t T, std::size_t P, double* din) {
    const std::size_t L = T / P;
    std::memset(din, 0, B * F * T * sizeof(double));
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t f = 0; f < F; ++f) {
            const double* g = dout + (b * F + f) * L;
            const std::int32_t* a = argmax + (b * F + f) * L;
            double* d = din + (b * F + f) * T;
            for (std::size_t t = 0; t < L; ++t) d[a[t]] += g[t];
        }
    }
}

void dense_forward(const double* in, std::size_t B, std::size_t In, const double* w,
                   const double* bias, std::size_t Out, double* out) {
    for (std::size_t b = 0; b < B; ++b) {
        const double* x = in + b * In;
        double* y = out + b * Out;
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
    for (std::size_t o = 0; o < Out; ++o) {
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b) acc += dout[b * Out + o];
        dbias[o] = acc;
    }
    for (std::size_t i = 0; i < In; ++i) {
        for (std::size_t o = 0; o < Out; ++o) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b) acc += in[b * In + i] * dout[b * Out + o];
            dw[i * Out + o] = acc;
        }
    }
    if (din) {
        for (std::size_t b = 0; b < B; ++b) {
            const double* g = dout + b * Out;
            double* d = din + b * In;
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
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* pre, const double* dout, std::size_t n, double* din) {
    for (std::size_t i = 0; i < n; ++i) din[i] = pre[i] > 0.0 ? dout[i] : 0.0;
}

void softmax_rows(double* x, std::size_t B, std::size_t K) {
    for (std::size_t b = 0; b < B; ++b) {
        double* row = x + b * K;
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

}  // namespace fedhar::nn::kernels::ref
