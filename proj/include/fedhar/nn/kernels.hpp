#pragma once

#include <cstddef>
#include <cstdint>

// Low-level numeric kernels for the 1-D conv net.
//
// Two backends share one signature set:
//   kernels::ref — plain nested loops, the reference used by tests,
//   kernels::par — OpenMP versions used by the production path.
// Both compute every output element with the same inner summation order, so
// results are bitwise identical regardless of thread count.
//
// Layout conventions (row-major):
//   conv input   [B, C, T]   batch, channels, timesteps
//   conv weight  [F, C, K]   filters, channels, kernel taps
//   conv output  [B, F, L]   L = T - K + 1 (valid convolution, stride 1)
//   pool output  [B, F, L/P] non-overlapping windows, remainder dropped
//   dense weight [In, Out]

namespace fedhar::nn::kernels {

#define FEDHAR_KERNEL_SET                                                                  \
    void conv1d_forward(const double* in, std::size_t B, std::size_t C, std::size_t T,    \
                        const double* w, const double* bias, std::size_t F, std::size_t K, \
                        double* out);                                                      \
    void conv1d_backward(const double* in, std::size_t B, std::size_t C, std::size_t T,   \
                         const double* w, std::size_t F, std::size_t K, const double* dout,\
                         double* dw, double* dbias, double* din);                          \
    void maxpool1d_forward(const double* in, std::size_t B, std::size_t F, std::size_t T, \
                           std::size_t P, double* out, std::int32_t* argmax);              \
    void maxpool1d_backward(const double* dout, const std::int32_t* argmax, std::size_t B, \
                            std::size_t F, std::size_t T, std::size_t P, double* din);     \
    void dense_forward(const double* in, std::size_t B, std::size_t In, const double* w,  \
                       const double* bias, std::size_t Out, double* out);                  \
    void dense_backward(const double* in, std::size_t B, std::size_t In, const double* w, \
                        std::size_t Out, const double* dout, double* dw, double* dbias,    \
                        double* din);                                                      \
    void relu_forward(const double* in, std::size_t n, double* out);                      \
    void relu_backward(const double* pre, const double* dout, std::size_t n, double* din);\
    void softmax_rows(double* x, std::size_t B, std::size_t K);

namespace ref {
FEDHAR_KERNEL_SET
}

namespace par {
FEDHAR_KERNEL_SET
}

#undef FEDHAR_KERNEL_SET

}  // namespace fedhar::nn::kernels
