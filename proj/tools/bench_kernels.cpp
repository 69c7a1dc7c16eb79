// Benchmark of the coagulation convolution kernels: serial reference vs the
// OpenMP symmetry-halved loop vs the FFT path, plus the flux closure.
// Usage: bench_kernels [reps]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "ffire/genfunc.hpp"
#include "ffire/kernels.hpp"

using Clock = std::chrono::steady_clock;

static double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
    std::printf("threads: %d, reps per kernel: %d\n", omp_get_max_threads(), reps);
    std::printf("%8s %14s %14s %14s %12s %14s\n", "K", "serial(ms)", "omp(ms)",
                "fft(ms)", "speedup", "max|omp-serial|");

    for (int K : {1000, 2000, 5000, 10000, 20000}) {
        const auto dist = ffire::stationary_critical_distribution(K);
        const std::vector<double>& v = dist.v;
        std::vector<double> c_ser, c_omp, c_fft;

        ffire::convolve_half_serial(v, c_ser);  // warm-up + reference values
        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) ffire::convolve_half_serial(v, c_ser);
        const double t_ser = ms_since(t0) / reps;

        ffire::convolve_half_parallel(v, c_omp);
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) ffire::convolve_half_parallel(v, c_omp);
        const double t_omp = ms_since(t0) / reps;

        ffire::FftConvolver fft(K);
        fft(v, c_fft);
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) fft(v, c_fft);
        const double t_fft = ms_since(t0) / reps;

        double dmax = 0.0, dfft = 0.0;
        for (int k = 2; k <= K; ++k) {
            dmax = std::max(dmax, std::abs(c_omp[k] - c_ser[k]));
            dfft = std::max(dfft, std::abs(c_fft[k] - c_ser[k]));
        }
        std::printf("%8d %14.3f %14.3f %14.3f %11.2fx %14.2e (fft %8.2e)\n", K,
                    t_ser, t_omp, t_fft, t_ser / t_omp, dmax, dfft);
    }

    // flux closure is O(K); time it at the largest size
    const int K = 20000;
    const auto dist = ffire::stationary_critical_distribution(K);
    auto t0 = Clock::now();
    double acc = 0.0;
    for (int r = 0; r < 200; ++r) acc += ffire::flux_closure(dist.v);
    std::printf("flux_closure K=%d: %.4f ms (phi=%.6f)\n", K, ms_since(t0) / 200,
                acc / 200);
    return 0;
}
