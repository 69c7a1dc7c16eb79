#ifndef FFIRE_KERNELS_HPP
#define FFIRE_KERNELS_HPP

#include <memory>
#include <vector>

#include "ffire/types.hpp"

namespace ffire {

// Self-convolution of the size distribution,
//     c_k = sum_{l=1}^{k-1} v_l v_{k-l},   k = 1..K,
// the hot loop of every coagulation right-hand side. Inputs and outputs are
// 1-based like SizeDistribution::v (index 0 ignored).

/// Plain O(K^2) loop. Reference implementation, kept for testing and as the
/// baseline in bench_kernels.
void convolve_half_serial(const std::vector<double>& v, std::vector<double>& out);

/// Symmetry-halved O(K^2/2) loop, parallelized over the output index with
/// OpenMP. Each c_k is an independently summed scalar, so the result is
/// identical for any thread count.
void convolve_half_parallel(const std::vector<double>& v, std::vector<double>& out);

/// FFT-backed convolution (FFTW, real transforms of length >= 2K). Used for
/// large truncations where the direct loop is too slow; agrees with the
/// direct kernels to rounding. Plans are cached per instance.
class FftConvolver {
  public:
    explicit FftConvolver(int K);
    ~FftConvolver();
    FftConvolver(const FftConvolver&) = delete;
    FftConvolver& operator=(const FftConvolver&) = delete;

    void operator()(const std::vector<double>& v, std::vector<double>& out);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Dispatcher honoring RegimeSpec::conv. Auto picks the direct OpenMP kernel
/// below FFIRE_FFT_THRESHOLD and the FFT kernel above it.
class Convolver {
  public:
    static constexpr int kFftThreshold = 4096;

    Convolver(int K, ConvMethod method);
    void operator()(const std::vector<double>& v, std::vector<double>& out);
    bool uses_fft() const { return fft_ != nullptr; }

  private:
    std::unique_ptr<FftConvolver> fft_;
};

/// Truncation-boundary coagulation flux
///     phi_K = sum_{k,l <= K, k+l > K} ((k+l)/2) v_k v_l,
/// computed in O(K) via suffix sums.
double flux_closure(const std::vector<double>& v);

}  // namespace ffire

#endif
