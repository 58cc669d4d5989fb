// Compares the serial reference kernels against the OpenMP backend: checks
// that outputs match bitwise, then reports timings for each kernel.
//
//   fedhar_bench [--quick]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <omp.h>

#include "fedhar/nn/kernels.hpp"
#include "fedhar/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<double> random_vec(std::size_t n, fedhar::Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Timing {
    double ref_ms = 0.0;
    double par_ms = 0.0;
    bool match = true;
};

void report(const char* name, const Timing& t) {
    std::printf("%-18s ref %8.2f ms   omp %8.2f ms   speedup %5.2fx   %s\n", name, t.ref_ms,
                t.par_ms, t.ref_ms / t.par_ms, t.match ? "outputs identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--quick") quick = true;
    }

    namespace ref = fedhar::nn::kernels::ref;
    namespace par = fedhar::nn::kernels::par;

    const std::size_t B = quick ? 8 : 64;
    const std::size_t C = 3, T = 128, F = 32, K = 5;
    const std::size_t L = T - K + 1;
    const std::size_t In = 1024, Out = 256;
    const int reps = quick ? 2 : 20;

    std::printf("threads: %d, batch %zu, conv %zux%zux%zu k=%zu, dense %zux%zu, reps %d\n\n",
                omp_get_max_threads(), B, B, C, T, K, In, Out, reps);

    fedhar::Rng rng(20240917);
    const auto input = random_vec(B * C * T, rng);
    const auto weights = random_vec(F * C * K, rng);
    const auto bias = random_vec(F, rng);
    const auto dout = random_vec(B * F * L, rng);

    bool all_match = true;

    {
        std::vector<double> out_ref(B * F * L), out_par(B * F * L);
        Timing t;
        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            ref::conv1d_forward(input.data(), B, C, T, weights.data(), bias.data(), F, K,
                                out_ref.data());
        }
        t.ref_ms = ms_since(t0) / reps;
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            par::conv1d_forward(input.data(), B, C, T, weights.data(), bias.data(), F, K,
                                out_par.data());
        }
        t.par_ms = ms_since(t0) / reps;
        t.match = bitwise_equal(out_ref, out_par);
        all_match &= t.match;
        report("conv1d_forward", t);
    }

    {
        std::vector<double> dw_ref(F * C * K), db_ref(F), din_ref(B * C * T);
        std::vector<double> dw_par(F * C * K), db_par(F), din_par(B * C * T);
        Timing t;
        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            ref::conv1d_backward(input.data(), B, C, T, weights.data(), F, K, dout.data(),
                                 dw_ref.data(), db_ref.data(), din_ref.data());
        }
        t.ref_ms = ms_since(t0) / reps;
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            par::conv1d_backward(input.data(), B, C, T, weights.data(), F, K, dout.data(),
                                 dw_par.data(), db_par.data(), din_par.data());
        }
        t.par_ms = ms_since(t0) / reps;
        t.match = bitwise_equal(dw_ref, dw_par) && bitwise_equal(db_ref, db_par) &&
                  bitwise_equal(din_ref, din_par);
        all_match &= t.match;
        report("conv1d_backward", t);
    }

    {
        const auto din = random_vec(B * In, rng);
        const auto w = random_vec(In * Out, rng);
        const auto b = random_vec(Out, rng);
        const auto g = random_vec(B * Out, rng);
        std::vector<double> out_ref(B * Out), out_par(B * Out);
        Timing t;
        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            ref::dense_forward(din.data(), B, In, w.data(), b.data(), Out, out_ref.data());
        }
        t.ref_ms = ms_since(t0) / reps;
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            par::dense_forward(din.data(), B, In, w.data(), b.data(), Out, out_par.data());
        }
        t.par_ms = ms_since(t0) / reps;
        t.match = bitwise_equal(out_ref, out_par);
        all_match &= t.match;
        report("dense_forward", t);

        std::vector<double> dw_ref(In * Out), db_ref(Out), dx_ref(B * In);
        std::vector<double> dw_par(In * Out), db_par(Out), dx_par(B * In);
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            ref::dense_backward(din.data(), B, In, w.data(), Out, g.data(), dw_ref.data(),
                                db_ref.data(), dx_ref.data());
        }
        t.ref_ms = ms_since(t0) / reps;
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            par::dense_backward(din.data(), B, In, w.data(), Out, g.data(), dw_par.data(),
                                db_par.data(), dx_par.data());
        }
        t.par_ms = ms_since(t0) / reps;
        t.match = bitwise_equal(dw_ref, dw_par) && bitwise_equal(db_ref, db_par) &&
                  bitwise_equal(dx_ref, dx_par);
        all_match &= t.match;
        report("dense_backward", t);
    }

    {
        std::vector<double> rows_ref = random_vec(4096 * 16, rng);
        std::vector<double> rows_par = rows_ref;
        Timing t;
        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            std::vector<double> w = rows_ref;
            ref::softmax_rows(w.data(), 4096, 16);
            if (r == reps - 1) rows_ref = w;
        }
        t.ref_ms = ms_since(t0) / reps;
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            std::vector<double> w = rows_par;
            par::softmax_rows(w.data(), 4096, 16);
            if (r == reps - 1) rows_par = w;
        }
        t.par_ms = ms_since(t0) / reps;
        t.match = bitwise_equal(rows_ref, rows_par);
        all_match &= t.match;
        report("softmax_rows", t);
    }

    std::printf("\n%s\n", all_match ? "all backends agree" : "BACKEND MISMATCH");
    return all_match ? 0 : 1;
}
