#include <cmath>

#include "doctest.h"
#include "ffire/genfunc.hpp"
#include "ffire/kernels.hpp"
#include "ffire/rng.hpp"

using namespace ffire;

namespace {
std::vector<double> random_vec(int K, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(K + 1, 0.0);
    double m = 0.0;
    for (int k = 1; k <= K; ++k) {
        v[k] = rng.uniform() / k;
        m += v[k];
    }
    for (int k = 1; k <= K; ++k) v[k] /= m;
    return v;
}
}  // namespace

TEST_CASE("parallel convolution matches the serial reference") {
    for (int K : {2, 3, 17, 256, 1001}) {
        const auto v = random_vec(K, 42 + K);
        std::vector<double> ref, fast;
        convolve_half_serial(v, ref);
        convolve_half_parallel(v, fast);
        for (int k = 1; k <= K; ++k)
            CHECK(fast[k] == doctest::Approx(ref[k]).epsilon(1e-13));
        CHECK(fast[1] == 0.0);
    }
}

TEST_CASE("fft convolution matches the serial reference") {
    for (int K : {64, 1000, 4096}) {
        const auto v = random_vec(K, 7 + K);
        std::vector<double> ref, fft_out;
        convolve_half_serial(v, ref);
        FftConvolver fft(K);
        fft(v, fft_out);
        double scale = 0.0;
        for (int k = 1; k <= K; ++k) scale = std::max(scale, std::abs(ref[k]));
        for (int k = 1; k <= K; ++k)
            CHECK(std::abs(fft_out[k] - ref[k]) <= 1e-12 * scale + 1e-300);
    }
}

TEST_CASE("convolution of a point mass") {
    std::vector<double> v(11, 0.0);
    v[3] = 0.5;
    std::vector<double> c;
    convolve_half_parallel(v, c);
    for (int k = 1; k <= 10; ++k)
        CHECK(c[k] == (k == 6 ? doctest::Approx(0.25) : doctest::Approx(0.0)));
}

TEST_CASE("flux closure against a brute-force double sum") {
    for (int K : {5, 37, 200}) {
        const auto v = random_vec(K, 99 + K);
        double brute = 0.0;
        for (int a = 1; a <= K; ++a)
            for (int b = 1; b <= K; ++b)
                if (a + b > K) brute += 0.5 * (a + b) * v[a] * v[b];
        CHECK(flux_closure(v) == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("flux closure at the exact critical law is 1/2 - 1/pi + O(K^-1/2)") {
    // The infinite-system flux through any level is 1/2, but a truncated
    // array cannot see partners beyond K: the missing pairs carry
    // m1 * tail = 4c^2 = 1/pi of flux at the k^{-3/2} law.
    const auto crit = stationary_critical_distribution(10000);
    const double phi = flux_closure(crit.v);
    CHECK(phi == doctest::Approx(0.5 - 1.0 / M_PI).epsilon(2e-4));
}
